"""Dataset-to-dataset distances and classifier diversity diagnostics."""

from __future__ import annotations

import io
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .evaluation import EvalMatrix
from .roc import roc_area_between


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    names: tuple
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        names = tuple(self.names)
        if v.shape != (len(names), len(names)):
            raise ValueError("distance matrix shape does not match names")
        if not np.allclose(v, v.T, rtol=0, atol=1e-12) or np.any(np.diag(v) != 0) or np.any(v < 0):
            raise ValueError("distance matrix must be symmetric, nonnegative, zero diagonal")
        v.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.names)


def _pairwise_norms(vectors):
    v = np.asarray(vectors, dtype=np.float64)
    n = v.shape[0]
    out = np.zeros((n, n))
    for i, j in combinations(range(n), 2):
        out[i, j] = out[j, i] = np.linalg.norm(v[i] - v[j])
    return out


def d_meta(metas, names) -> DistanceMatrix:
    """Euclidean distance between (normalized) metadata rows."""
    metas = np.asarray(metas, dtype=np.float64)
    if metas.ndim != 2 or metas.shape[0] != len(names):
        raise ValueError("one metadata row per dataset name required")
    return DistanceMatrix(names, _pairwise_norms(metas))


def d_auc(em: EvalMatrix) -> DistanceMatrix:
    """Euclidean distance between the per-dataset vectors of AUCs."""
    return DistanceMatrix(em.datasets, _pairwise_norms(em.auc_matrix()))


def pair_order(n):
    return list(combinations(range(n), 2))


def per_classifier_distances(em: EvalMatrix) -> np.ndarray:
    """Area between ROC curves, one row per dataset pair (i < j), one column per classifier."""
    pairs = pair_order(len(em.datasets))
    out = np.empty((len(pairs), len(em.classifiers)))
    rows = [em.row(d) for d in em.datasets]
    for p, (i, j) in enumerate(pairs):
        for k in range(len(em.classifiers)):
            out[p, k] = roc_area_between(rows[i][k].roc, rows[j][k].roc)
    return out


def d_roc(em: EvalMatrix, features=None) -> DistanceMatrix:
    """Root of summed squared ROC-difference areas over classifiers."""
    if features is None:
        features = per_classifier_distances(em)
    n = len(em.datasets)
    out = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    out[iu] = np.linalg.norm(np.asarray(features, dtype=np.float64), axis=1)
    out.T[iu] = out[iu]
    return DistanceMatrix(em.datasets, out)


def classifier_correlations(features) -> np.ndarray:
    """Pearson correlation between columns; constant columns correlate 0 (1 with themselves)."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least 2 rows")
    centered = x - x.mean(axis=0)
    norms = np.linalg.norm(centered, axis=0)
    constant = np.ptp(x, axis=0) == 0
    unit = np.where(constant, 0.0, centered / np.where(constant, 1.0, norms))
    corr = np.clip(unit.T @ unit, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def pca_cumulative_variance(features) -> np.ndarray:
    """Cumulative explained-variance fractions of the column-standardized data."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least 2 rows")
    centered = x - x.mean(axis=0)
    std = x.std(axis=0, ddof=1)
    constant = np.ptp(x, axis=0) == 0
    z = np.where(constant, 0.0, centered / np.where(constant, 1.0, std))
    cov = z.T @ z / (x.shape[0] - 1)
    eig = np.clip(np.sort(np.linalg.eigvalsh(cov))[::-1], 0.0, None)
    total = eig.sum()
    if total <= 0:
        return np.ones(x.shape[1])
    frac = np.cumsum(eig) / total
    frac[-1] = 1.0
    return np.minimum(frac, 1.0)


@dataclass(frozen=True, eq=False)
class DiversityReport:
    features: np.ndarray
    correlations: np.ndarray
    cumulative_variance: np.ndarray


def diversity_report(em: EvalMatrix) -> DiversityReport:
    feats = per_classifier_distances(em)
    return DiversityReport(feats, classifier_correlations(feats), pca_cumulative_variance(feats))


def _f(v):
    return repr(float(v))


def dumps_square(names, values, corner="name") -> str:
    buf = io.StringIO()
    buf.write(",".join([corner, *names]) + "\n")
    for name, row in zip(names, values):
        buf.write(",".join([name, *map(_f, row)]) + "\n")
    return buf.getvalue()


def loads_distance(text: str) -> DistanceMatrix:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty distance file")
    names = lines[0].split(",")[1:]
    rows, row_names = [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        row_names.append(parts[0])
        rows.append([float(v) for v in parts[1:]])
    if row_names != names:
        raise ValueError("row and column names differ")
    return DistanceMatrix(names, np.array(rows))


def save_distance(dm: DistanceMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_square(dm.names, dm.values))


def load_distance(path) -> DistanceMatrix:
    with open(path, encoding="utf-8") as fh:
        return loads_distance(fh.read())
