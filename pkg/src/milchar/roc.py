"""ROC curves, trapezoidal AUC and the area between two ROC curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Piecewise-linear ROC curve through ``(fpr[i], tpr[i])``.

    Vertical and horizontal segments are allowed; consecutive points may share
    an fpr value.
    """

    fpr: np.ndarray
    tpr: np.ndarray

    def __post_init__(self):
        f = np.array(self.fpr, dtype=np.float64)
        t = np.array(self.tpr, dtype=np.float64)
        if f.ndim != 1 or f.shape != t.shape or f.size < 2:
            raise ValueError("ROC curve needs matching 1-D fpr/tpr with >= 2 points")
        if f[0] != 0 or t[0] != 0 or f[-1] != 1 or t[-1] != 1:
            raise ValueError("ROC curve must run from (0,0) to (1,1)")
        if np.any(np.diff(f) < 0) or np.any(np.diff(t) < 0):
            raise ValueError("ROC curve must be non-decreasing in fpr and tpr")
        f.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "fpr", f)
        object.__setattr__(self, "tpr", t)

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def __eq__(self, other):
        if not isinstance(other, RocCurve):
            return NotImplemented
        return np.array_equal(self.fpr, other.fpr) and np.array_equal(self.tpr, other.tpr)

    def __hash__(self):
        return hash((self.fpr.tobytes(), self.tpr.tobytes()))


def roc_curve(scores, labels) -> RocCurve:
    """Threshold-sweep ROC curve. Tied scores form a single (diagonal) step."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-D of equal length")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be binary")
    y = y.astype(bool)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC curve needs both positive and negative labels (single-class labels)")

    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # last index of every group of equal scores
    ends = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tp = np.cumsum(y)[ends]
    fp = (ends + 1) - tp
    fpr = np.r_[0.0, fp / n_neg]
    tpr = np.r_[0.0, tp / n_pos]
    return RocCurve(fpr, tpr)


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the curve."""
    f, t = curve.fpr, curve.tpr
    return float(np.sum(np.diff(f) * (t[1:] + t[:-1])) / 2.0)


def _limit(curve, x, side):
    """Left/right limit of tpr(fpr) at each x (vertical segments jump)."""
    f, t = curve.fpr, curve.tpr
    if side == "right":
        j = np.searchsorted(f, x, side="right") - 1
        j = np.clip(j, 0, f.size - 1)
        k = np.minimum(j + 1, f.size - 1)
    else:
        k = np.searchsorted(f, x, side="left")
        k = np.clip(k, 0, f.size - 1)
        j = np.maximum(k - 1, 0)
    f0, f1, t0, t1 = f[j], f[k], t[j], t[k]
    width = f1 - f0
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(width > 0, (x - f0) / np.where(width > 0, width, 1.0), 0.0)
    out = t0 + w * (t1 - t0)
    # exact hits on a breakpoint take that point's value
    out = np.where(f[j] == x, t[j], out) if side == "right" else np.where(f[k] == x, t[k], out)
    return out


def roc_area_between(a: RocCurve, b: RocCurve) -> float:
    """Exact integral of |tpr_a - tpr_b| over fpr in [0, 1].

    Evaluated as |auc(a) - auc(b)| + 2 min(P, N), where P and N are the areas
    where a lies above and below b. The two forms agree exactly in real
    arithmetic; this one keeps the area >= |AUC difference| in floating point.
    """
    grid = np.union1d(a.fpr, b.fpr)
    x0, x1 = grid[:-1], grid[1:]
    w = x1 - x0
    e0 = _limit(a, x0, "right") - _limit(b, x0, "right")
    e1 = _limit(a, x1, "left") - _limit(b, x1, "left")
    absum = np.abs(e0) + np.abs(e1)
    with np.errstate(invalid="ignore", divide="ignore"):
        inv = np.where(absum > 0, 1.0 / np.where(absum > 0, absum, 1.0), 0.0)
    crossing = e0 * e1 < 0
    # a segment that changes sign splits into two triangles at the crossing
    pos = np.where(crossing, np.maximum(e0, e1) ** 2 * inv, np.maximum(e0 + e1, 0.0))
    neg = np.where(crossing, np.minimum(e0, e1) ** 2 * inv, np.maximum(-(e0 + e1), 0.0))
    above = float(np.sum(pos * w)) / 2.0
    below = float(np.sum(neg * w)) / 2.0
    return abs(auc(a) - auc(b)) + 2.0 * min(above, below)
