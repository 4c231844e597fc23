"""Shared pieces for the MIL classifiers: standardization, the logistic base
learner and order-independent pooling of per-instance values into bags."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import expit, log_expit


class Standardizer:
    """Zero-mean/unit-variance scaling; constant features map to 0."""

    def fit(self, x):
        x = np.asarray(x, dtype=np.float64)
        self.mean_ = x.mean(axis=0)
        std = x.std(axis=0)
        constant = np.ptp(x, axis=0) == 0
        self.scale_ = np.where(constant, 0.0, 1.0 / np.where(constant, 1.0, std))
        return self

    def transform(self, x):
        return (np.asarray(x, dtype=np.float64) - self.mean_) * self.scale_

    def inverse_point(self, z):
        """Map a point from standardized space back; constant features get the mean."""
        with np.errstate(divide="ignore"):
            std = np.where(self.scale_ > 0, 1.0 / np.where(self.scale_ > 0, self.scale_, 1.0), 0.0)
        return np.asarray(z) * std + self.mean_


class LogisticRegression:
    """Binary logistic regression fit by full-batch gradient descent.

    Minimizes mean log-loss + l2/2 ||w||^2 + l1 ||w||_1 (intercept unpenalized).
    With l1 > 0 the update is a proximal (soft-threshold) step. The step size
    is 1/L for the smooth part's Lipschitz constant L.
    """

    def __init__(self, l2=0.01, l1=0.0, max_iter=2000, tol=1e-6):
        self.l2 = l2
        self.l1 = l1
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, x, y):
        self.scaler_ = Standardizer().fit(x)
        z = self.scaler_.transform(x)
        y = np.asarray(y, dtype=np.float64)
        n, p = z.shape
        active = self.scaler_.scale_ > 0
        za = np.hstack([z, np.ones((n, 1))])
        lipschitz = 0.25 * np.linalg.norm(za, 2) ** 2 / n + self.l2
        step = 1.0 / lipschitz

        w = np.zeros(p + 1)
        self.n_iter_ = self.max_iter
        for it in range(self.max_iter):
            r = expit(za @ w) - y
            grad = za.T @ r / n
            grad[:p] += self.l2 * w[:p]
            if self.l1 > 0:
                w_new = w - step * grad
                w_new[:p] = np.sign(w_new[:p]) * np.maximum(np.abs(w_new[:p]) - step * self.l1, 0.0)
                done = np.linalg.norm(w_new - w) / step < self.tol
                w = w_new
            else:
                done = np.linalg.norm(grad) < self.tol
                if not done:
                    w = w - step * grad
            w[:p][~active] = 0.0
            if done:
                self.n_iter_ = it + 1
                break
        self.coef_ = w[:p]
        self.intercept_ = w[p]
        return self

    def decision_function(self, x):
        return rowdot(self.scaler_.transform(x), self.coef_) + self.intercept_

    def predict_proba(self, x):
        return expit(self.decision_function(x))

    def log_proba(self, x):
        return log_expit(self.decision_function(x))


def stack_bags(bags):
    """Concatenate bags into one instance matrix plus the bag sizes."""
    arrays = [np.asarray(getattr(b, "instances", b), dtype=np.float64) for b in bags]
    sizes = np.array([a.shape[0] for a in arrays], dtype=np.int64)
    return np.vstack(arrays), sizes


def bag_offsets(sizes):
    return np.r_[0, np.cumsum(sizes)[:-1]]


def pool(values, sizes, how, stable=True):
    """Aggregate per-instance rows into per-bag rows.

    With ``stable`` sums and means sort each bag's values first, so the result
    is bit-identical under any permutation of the instances within a bag.
    Training loops pass ``stable=False`` for speed.
    """
    values = np.asarray(values, dtype=np.float64)
    starts = bag_offsets(sizes)
    if how == "min":
        return np.minimum.reduceat(values, starts, axis=0)
    if how == "max":
        return np.maximum.reduceat(values, starts, axis=0)
    if stable:
        out = np.empty((len(sizes),) + values.shape[1:])
        for i, (s, n) in enumerate(zip(starts, sizes)):
            out[i] = np.sort(values[s:s + n], axis=0).sum(axis=0)
    else:
        out = np.add.reduceat(values, starts, axis=0)
    if how == "sum":
        return out
    if how == "mean":
        return out / np.reshape(sizes, (-1,) + (1,) * (values.ndim - 1))
    raise ValueError(f"unknown pooling {how!r}")


def noisy_or_log(log_one_minus, sizes, stable=True):
    """log(1 - P(bag positive)) from per-instance log(1 - p)."""
    return pool(log_one_minus, sizes, "sum", stable)


def noisy_or(p, sizes, stable=True):
    """Bag probability 1 - prod(1 - p_j)."""
    with np.errstate(divide="ignore"):
        log_q = np.log1p(-np.asarray(p, dtype=np.float64))
    return -np.expm1(noisy_or_log(log_q, sizes, stable))


def sq_dists(a, b):
    """Squared Euclidean distances between the rows of a and b."""
    return cdist(a, b, "sqeuclidean")


def rowdot(x, w):
    # elementwise form: each row's result is independent of its position
    return (x * w).sum(axis=1)
