"""The fixed catalog of 22 MIL classifiers and the train/score entry points."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import MilDataset
from ..rng import stream
from .bagvec import MILES, BagDissimilarity, BagOfWords, BagStatistics, CitationKNN, MILKernel
from .concept import EMDD, DiverseDensity
from .instance import MILBoost, MiSVM, SimpleMIL

FAMILIES = ("SimpleMIL", "DiverseDensity", "EMDD", "MILBoost", "CitationKNN", "MiSVM",
            "MILES", "MILKernel", "BagStatistics", "BagOfWords", "BagDissimilarity")


@dataclass(frozen=True)
class ClassifierSpec:
    family: str
    variant_id: int
    display_name: str
    params: dict = field(default_factory=dict, compare=False, hash=False)

    def build(self):
        return _BUILDERS[self.family](**self.params)


_BUILDERS = {
    "SimpleMIL": SimpleMIL,
    "DiverseDensity": DiverseDensity,
    "EMDD": EMDD,
    "MILBoost": MILBoost,
    "CitationKNN": CitationKNN,
    "MiSVM": MiSVM,
    "MILES": MILES,
    "MILKernel": MILKernel,
    "BagStatistics": BagStatistics,
    "BagOfWords": BagOfWords,
    "BagDissimilarity": BagDissimilarity,
}

_VARIANTS = [
    ("SimpleMIL", "simpleMIL", {}),
    ("DiverseDensity", "DD", {}),
    ("EMDD", "EMDD", {}),
    ("MILBoost", "MILBoost", {}),
    ("CitationKNN", "citationKNN-R3C5", {"n_refs": 3, "n_citers": 5}),
    ("CitationKNN", "citationKNN-R5C7", {"n_refs": 5, "n_citers": 7}),
    ("MiSVM", "miSVM-C1", {"C": 1.0}),
    ("MiSVM", "miSVM-C100", {"C": 100.0}),
    ("MILES", "MILES-s1d", {"width_factor": 1.0}),
    ("MILES", "MILES-s5d", {"width_factor": 5.0}),
    ("MILKernel", "MILkernel-g0.1", {"gamma_factor": 0.1}),
    ("MILKernel", "MILkernel-g1", {"gamma_factor": 1.0}),
    ("MILKernel", "MILkernel-g10", {"gamma_factor": 10.0}),
    ("BagStatistics", "bagstats-mean", {"stats": "mean"}),
    ("BagStatistics", "bagstats-minmax", {"stats": "minmax"}),
    ("BagStatistics", "bagstats-meanminmax", {"stats": "meanminmax"}),
    ("BagOfWords", "BoW-k10", {"k": 10}),
    ("BagOfWords", "BoW-k25", {"k": 25}),
    ("BagOfWords", "BoW-k50", {"k": 50}),
    ("BagDissimilarity", "bagdis-meanmin", {"rule": "meanmin"}),
    ("BagDissimilarity", "bagdis-minmin", {"rule": "minmin"}),
    ("BagDissimilarity", "bagdis-meanmean", {"rule": "meanmean"}),
]


def _build_catalog():
    specs, seen = [], {}
    for family, name, params in _VARIANTS:
        variant = seen.get(family, 0)
        seen[family] = variant + 1
        specs.append(ClassifierSpec(family, variant, name, dict(params)))
    return tuple(specs)


_CATALOG = _build_catalog()


def catalog() -> list[ClassifierSpec]:
    return list(_CATALOG)


def catalog_index(spec: ClassifierSpec) -> int:
    return _CATALOG.index(spec)


def find_classifiers(names) -> list[ClassifierSpec]:
    """Look up display names (case-insensitive), keeping catalog order."""
    wanted = {n.strip().lower() for n in names if n.strip()}
    found = [s for s in _CATALOG if s.display_name.lower() in wanted]
    missing = wanted - {s.display_name.lower() for s in found}
    if missing:
        raise KeyError(f"unknown classifier(s): {', '.join(sorted(missing))}")
    return found


def manifest() -> str:
    """Tab-separated listing: display name, family, hyperparameters."""
    lines = ["display_name\tfamily\tvariant\tparams"]
    for s in _CATALOG:
        params = ";".join(f"{k}={v}" for k, v in sorted(s.params.items()))
        lines.append(f"{s.display_name}\t{s.family}\t{s.variant_id}\t{params}")
    return "\n".join(lines) + "\n"


class TrainingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: ClassifierSpec
    feature_dim: int
    estimator: object


def train(spec: ClassifierSpec, train_set, seed: int) -> TrainedModel:
    """Fit one catalog classifier on a MilDataset (or a plain sequence of Bags)."""
    bags = train_set.bags if isinstance(train_set, MilDataset) else tuple(train_set)
    if not bags:
        raise TrainingError("empty training set")
    labels = np.array([b.label for b in bags])
    if labels.min() == labels.max():
        raise TrainingError("single-class training set")
    dims = {b.instances.shape[1] for b in bags}
    if len(dims) != 1:
        raise TrainingError("bags differ in feature dimension")
    est = spec.build()
    with np.errstate(over="ignore", under="ignore"):
        est.fit([b.instances for b in bags], labels, stream(seed))
    return TrainedModel(spec, dims.pop(), est)


def score_bags(model: TrainedModel, bags) -> np.ndarray:
    arrays = [np.asarray(getattr(b, "instances", b), dtype=np.float64) for b in bags]
    for a in arrays:
        if a.ndim != 2 or a.shape[1] != model.feature_dim:
            raise ValueError(f"bag has {a.shape[-1]} features, model expects {model.feature_dim}")
    if not arrays:
        return np.empty(0)
    with np.errstate(over="ignore", under="ignore"):
        scores = np.asarray(model.estimator.score(arrays), dtype=np.float64)
    if not np.all(np.isfinite(scores)):
        raise FloatingPointError(f"{model.spec.display_name} produced non-finite scores")
    return scores
