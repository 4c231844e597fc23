"""Seeded generators for the six artificial MIL datasets.

Every bag draws from its own random streams keyed by (seed, kind, bag index,
role), so the content of a bag never depends on how many bags precede it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Bag, MilDataset
from .rng import RNG_NAME, name_key, stream

KINDS = ("gaussian", "maron", "concept", "difficult", "rotated", "widened")

# stream roles
_SIZE, _BACKGROUND, _CONCEPT, _COUNT, _MIXTURE = range(5)

_DEFAULTS = {
    # kind: (n_pos, n_neg, size_min, size_max, params)
    "gaussian": (50, 50, 5, 9, {"concept_x": 7.0, "concept_y": 1.0}),
    "maron": (50, 50, 10, 10, {"domain": 100.0, "concept_width": 5.0}),
    "concept": (10, 10, 5, 8, {"offset": 2.0}),
    "difficult": (10, 40, 5, 9, {"shift": 2.0, "var_long": 9.0, "var_short": 1.0}),
    "rotated": (30, 30, 15, 29, {"angle_deg": 10.0, "var_long": 9.0, "var_short": 1.0}),
    "widened": (30, 30, 15, 29, {"widen": 1.5}),
}


class GenSpecError(ValueError):
    pass


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n_pos: int
    n_neg: int
    bag_size_min: int
    bag_size_max: int
    seed: int = 1
    params: dict = field(default_factory=dict)

    def validate(self):
        if self.kind not in KINDS:
            raise GenSpecError(f"unknown generator kind {self.kind!r}")
        if not 1 <= self.bag_size_min <= self.bag_size_max:
            raise GenSpecError("need 1 <= bag_size_min <= bag_size_max")
        if self.n_pos < 1 or self.n_neg < 1:
            raise GenSpecError("need at least one positive and one negative bag")
        if not 0 <= self.seed < 2**64:
            raise GenSpecError("seed must be a 64-bit unsigned integer")
        unknown = set(self.params) - set(_DEFAULTS[self.kind][4])
        if unknown:
            raise GenSpecError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        if self.kind == "maron":
            p = self.param("domain"), self.param("concept_width")
            if not 0 < p[1] <= p[0]:
                raise GenSpecError("maron needs 0 < concept_width <= domain")
        if self.kind == "widened" and self.param("widen") <= 0:
            raise GenSpecError("widen factor must be positive")
        if self.kind in ("difficult", "rotated"):
            if self.param("var_long") <= 0 or self.param("var_short") <= 0:
                raise GenSpecError("variances must be positive")
        return self

    def param(self, key):
        return float(self.params.get(key, _DEFAULTS[self.kind][4][key]))

    def to_text(self) -> str:
        lines = [f"rng={RNG_NAME}", f"kind={self.kind}", f"n_pos={self.n_pos}",
                 f"n_neg={self.n_neg}", f"bag_size_min={self.bag_size_min}",
                 f"bag_size_max={self.bag_size_max}", f"seed={self.seed}"]
        for key in sorted(_DEFAULTS[self.kind][4]):
            lines.append(f"param.{key}={self.param(key)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GenSpec":
        kv = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise GenSpecError(f"line {lineno}: expected key=value")
            kv[key.strip()] = value.strip()
        rng = kv.pop("rng", RNG_NAME)
        if rng != RNG_NAME:
            raise GenSpecError(f"unsupported rng {rng!r}")
        try:
            params = {k[len("param."):]: float(kv.pop(k)) for k in list(kv)
                      if k.startswith("param.")}
            spec = cls(kind=kv.pop("kind"), n_pos=int(kv.pop("n_pos")),
                       n_neg=int(kv.pop("n_neg")),
                       bag_size_min=int(kv.pop("bag_size_min")),
                       bag_size_max=int(kv.pop("bag_size_max")),
                       seed=int(kv.pop("seed")), params=params)
        except KeyError as exc:
            raise GenSpecError(f"missing key {exc.args[0]}") from None
        except ValueError as exc:
            raise GenSpecError(str(exc)) from None
        if kv:
            raise GenSpecError(f"unknown keys {sorted(kv)}")
        return spec.validate()


def default_spec(kind: str, seed: int = 1, **params) -> GenSpec:
    if kind not in _DEFAULTS:
        raise GenSpecError(f"unknown generator kind {kind!r}")
    n_pos, n_neg, lo, hi, _ = _DEFAULTS[kind]
    return GenSpec(kind, n_pos, n_neg, lo, hi, seed, dict(params)).validate()


class _Streams:
    def __init__(self, spec):
        self.seed = spec.seed
        self.kind = name_key(spec.kind)

    def __call__(self, bag_index, role):
        return stream(self.seed, self.kind, bag_index, role)


def _bag_size(spec, streams, i):
    return int(streams(i, _SIZE).integers(spec.bag_size_min, spec.bag_size_max + 1))


def _assemble(spec, make_bag, with_roles):
    bags, roles = [], []
    n = spec.n_pos + spec.n_neg
    for i in range(n):
        label = 1 if i < spec.n_pos else 0
        x, is_concept = make_bag(i, label)
        prefix = "pos" if label else "neg"
        j = i if label else i - spec.n_pos
        bags.append(Bag(f"{prefix}{j:04d}", x, label))
        roles.append(is_concept)
    ds = MilDataset(spec.kind, tuple(bags), 2)
    return (ds, roles) if with_roles else ds


def _check(spec, kind):
    spec.validate()
    if spec.kind != kind:
        raise GenSpecError(f"expected a {kind} spec, got {spec.kind}")


def gen_gaussian(spec: GenSpec, with_roles=False):
    """Concept Gaussian at (7, 1) planted in positive bags over a background at the origin."""
    _check(spec, "gaussian")
    streams = _Streams(spec)
    concept_mean = np.array([spec.param("concept_x"), spec.param("concept_y")])

    def make_bag(i, label):
        n = _bag_size(spec, streams, i)
        m = int(streams(i, _COUNT).integers(1, math.ceil(n / 2) + 1)) if label else 0
        concept = concept_mean + streams(i, _CONCEPT).standard_normal((m, 2))
        background = streams(i, _BACKGROUND).standard_normal((n - m, 2))
        mask = np.r_[np.ones(m, bool), np.zeros(n - m, bool)]
        return np.vstack([concept, background]), mask

    return _assemble(spec, make_bag, with_roles)


def gen_maron(spec: GenSpec, with_roles=False):
    """Uniform instances on a square; each positive bag gets one instance in the central patch."""
    _check(spec, "maron")
    streams = _Streams(spec)
    side, width = spec.param("domain"), spec.param("concept_width")
    lo = side / 2 - width / 2

    def make_bag(i, label):
        n = _bag_size(spec, streams, i)
        m = 1 if label else 0
        concept = lo + width * streams(i, _CONCEPT).random((m, 2))
        background = side * streams(i, _BACKGROUND).random((n - m, 2))
        mask = np.r_[np.ones(m, bool), np.zeros(n - m, bool)]
        return np.vstack([concept, background]), mask

    return _assemble(spec, make_bag, with_roles)


def gen_concept(spec: GenSpec, with_roles=False):
    """Three background Gaussians; positive bags add one instance from the fourth corner."""
    _check(spec, "concept")
    streams = _Streams(spec)
    a = spec.param("offset")
    centers = np.array([[a, -a], [-a, a], [-a, -a]])
    concept_center = np.array([a, a])

    def make_bag(i, label):
        n = _bag_size(spec, streams, i)
        m = 1 if label else 0
        comp = streams(i, _MIXTURE).integers(0, 3, size=n - m)
        background = centers[comp] + streams(i, _BACKGROUND).standard_normal((n - m, 2))
        concept = concept_center + streams(i, _CONCEPT).standard_normal((m, 2))
        mask = np.r_[np.ones(m, bool), np.zeros(n - m, bool)]
        return np.vstack([concept, background]), mask

    return _assemble(spec, make_bag, with_roles)


def _elongated(spec, streams, i, n):
    z = streams(i, _BACKGROUND).standard_normal((n, 2))
    return z * np.sqrt([spec.param("var_long"), spec.param("var_short")])


def gen_difficult(spec: GenSpec, with_roles=False):
    """Elongated Gaussian; positive-bag instances shifted along the first feature only."""
    _check(spec, "difficult")
    streams = _Streams(spec)
    shift = np.array([spec.param("shift"), 0.0])

    def make_bag(i, label):
        n = _bag_size(spec, streams, i)
        x = _elongated(spec, streams, i, n)
        if label:
            x = x + shift
        return x, np.zeros(n, bool)

    return _assemble(spec, make_bag, with_roles)


def gen_rotated(spec: GenSpec, with_roles=False):
    """Elongated Gaussian; positive bags use the same Gaussian rotated about its mean."""
    _check(spec, "rotated")
    streams = _Streams(spec)
    theta = math.radians(spec.param("angle_deg"))
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])

    def make_bag(i, label):
        n = _bag_size(spec, streams, i)
        x = _elongated(spec, streams, i, n)
        if label:
            x = x @ rot.T
        return x, np.zeros(n, bool)

    return _assemble(spec, make_bag, with_roles)


def gen_widened(spec: GenSpec, with_roles=False):
    """Unit Gaussian; positive bags have the covariance scaled by the widening factor."""
    _check(spec, "widened")
    streams = _Streams(spec)
    scale = math.sqrt(spec.param("widen"))

    def make_bag(i, label):
        n = _bag_size(spec, streams, i)
        x = streams(i, _BACKGROUND).standard_normal((n, 2))
        if label:
            x = x * scale
        return x, np.zeros(n, bool)

    return _assemble(spec, make_bag, with_roles)


_GENERATORS = {
    "gaussian": gen_gaussian,
    "maron": gen_maron,
    "concept": gen_concept,
    "difficult": gen_difficult,
    "rotated": gen_rotated,
    "widened": gen_widened,
}


def generate(spec: GenSpec, with_roles=False):
    spec.validate()
    return _GENERATORS[spec.kind](spec, with_roles=with_roles)


def artificial_datasets(seed: int = 1) -> list[MilDataset]:
    """The six default artificial datasets, in canonical order."""
    return [generate(default_spec(k, seed)) for k in KINDS]
