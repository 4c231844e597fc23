"""Classical MDS of a distance matrix and out-of-sample placement of new points."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .distance import DistanceMatrix


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvectors as columns, in the
    order the diagonal ends up (unsorted). Rotations whose off-diagonal entry
    is below ``tol`` times the matrix norm are skipped; iteration stops once
    the off-diagonal mass falls under the same relative threshold.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0))):
        raise ValueError("matrix must be symmetric")
    a = (a + a.T) / 2.0
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0 or n < 2:
        return np.diag(a).copy(), v
    thresh = tol * scale
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= thresh * 1e-3:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v


def _pair_dists(coords):
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff * diff).sum(-1))


def stress(coords, dist) -> float:
    """sqrt(sum_{i<j} (d_ij - dhat_ij)^2 / sum_{i<j} d_ij^2)."""
    d = dist.values if isinstance(dist, DistanceMatrix) else np.asarray(dist, dtype=np.float64)
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[0] != d.shape[0] or d.shape[0] != d.shape[1]:
        raise ValueError("coordinate rows must match the distance matrix")
    iu = np.triu_indices(d.shape[0], 1)
    realized = _pair_dists(coords)[iu]
    target = d[iu]
    num = float(np.sum((target - realized) ** 2))
    den = float(np.sum(target ** 2))
    if den == 0:
        return 0.0 if num == 0 else float("inf")
    return float(np.sqrt(num / den))


@dataclass(frozen=True, eq=False)
class Embedding2D:
    names: tuple
    coords: np.ndarray
    stress: float

    def __post_init__(self):
        c = np.array(self.coords, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != len(self.names) or not np.all(np.isfinite(c)):
            raise ValueError("coords must be finite, one row per name")
        if not self.stress >= 0:
            raise ValueError("stress must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "coords", c)


def classical_mds(dist: DistanceMatrix, dim: int = 2) -> Embedding2D:
    """Torgerson scaling with canonical orientation.

    Each axis is the eigenvector of the double-centered squared distances with
    its largest-magnitude loading made positive; axes with a non-positive
    eigenvalue collapse to zero.
    """
    d = dist.values
    n = d.shape[0]
    if n < 3:
        raise ValueError("classical MDS needs at least 3 points")
    if not 1 <= dim <= n - 1:
        raise ValueError(f"dim must be in [1, {n - 1}]")
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (d * d) @ j
    evals, evecs = jacobi_eigh(b)
    order = np.argsort(-evals, kind="stable")[:dim]
    coords = np.zeros((n, dim))
    for axis, k in enumerate(order):
        vec = evecs[:, k]
        lead = int(np.argmax(np.abs(vec)))
        if vec[lead] < 0:
            vec = -vec
        coords[:, axis] = np.sqrt(max(evals[k], 0.0)) * vec
    return Embedding2D(dist.names, coords, stress(coords, d))


def placement_residual(base_coords, dists, z) -> float:
    """Sum of squared differences between realized and target distances."""
    r = np.sqrt(((np.asarray(base_coords) - z) ** 2).sum(axis=1)) - dists
    return float(r @ r)


def out_of_sample(base: Embedding2D, dists_to_base, max_iter=500, tol=1e-10) -> np.ndarray:
    """Place a new point so its distances to the base points match ``dists_to_base``.

    Nelder-Mead from the centroid and four axis-aligned offsets around it; the
    lowest residual wins, ties going to the earlier start. Each initial simplex
    spans a quarter of the base spread, so a centroid at the origin does not
    shrink it to nothing.
    """
    c = base.coords
    dists = np.asarray(dists_to_base, dtype=np.float64)
    if dists.shape != (c.shape[0],):
        raise ValueError(f"expected {c.shape[0]} distances, got {dists.shape}")
    if np.any(dists < 0) or not np.all(np.isfinite(dists)):
        raise ValueError("distances must be finite and nonnegative")
    centroid = c.mean(axis=0)
    spread = float(np.sqrt(((c - centroid) ** 2).sum(axis=1).mean()))
    r = spread if spread > 0 else max(float(dists.mean()), 1.0)
    dim = c.shape[1]
    offsets = [np.zeros(dim)]
    for axis in range(min(dim, 2)):
        for sign in (1.0, -1.0):
            e = np.zeros(dim)
            e[axis] = sign * r
            offsets.append(e)

    def objective(z):
        return placement_residual(c, dists, z)

    edges = np.vstack([np.zeros(dim), 0.25 * r * np.eye(dim)])
    best = None
    for off in offsets:
        x0 = centroid + off
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxiter": max_iter, "xatol": tol, "fatol": tol,
                                "initial_simplex": x0 + edges})
        if best is None or res.fun < best.fun:
            best = res
    return np.asarray(best.x, dtype=np.float64)


def dumps_embedding(emb: Embedding2D, marker=None) -> str:
    """``name,x,y`` rows and a trailing stress comment; ``marker`` adds an oos column."""
    buf = io.StringIO()
    buf.write("name,x,y" + (",oos" if marker is not None else "") + "\n")
    for i, (name, (x, y)) in enumerate(zip(emb.names, emb.coords[:, :2])):
        row = [name, repr(float(x)), repr(float(y))]
        if marker is not None:
            row.append(str(int(marker[i])))
        buf.write(",".join(row) + "\n")
    buf.write(f"# stress={float(emb.stress)!r}\n")
    return buf.getvalue()


def loads_embedding(text: str) -> Embedding2D:
    names, coords, stress_value = [], [], None
    lines = text.splitlines()
    if not lines or not lines[0].startswith("name,x,y"):
        raise ValueError("embedding file must start with a name,x,y header")
    for ln in lines[1:]:
        if not ln:
            continue
        if ln.startswith("#"):
            key, _, value = ln[1:].strip().partition("=")
            if key == "stress":
                stress_value = float(value)
            continue
        parts = ln.split(",")
        names.append(parts[0])
        coords.append([float(parts[1]), float(parts[2])])
    if stress_value is None:
        raise ValueError("embedding file lacks a stress line")
    return Embedding2D(names, np.array(coords).reshape(-1, 2), stress_value)


def save_embedding(emb: Embedding2D, path, marker=None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_embedding(emb, marker))


def load_embedding(path) -> Embedding2D:
    with open(path, encoding="utf-8") as fh:
        return loads_embedding(fh.read())
