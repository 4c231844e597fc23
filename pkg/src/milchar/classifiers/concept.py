"""Concept learners: Diverse Density and EM-DD.

Both model the probability that an instance belongs to the concept as
p(x) = exp(-sum_d s_d^2 (x_d - t_d)^2) around a target t with per-feature
scales s. Parameters are optimized in standardized feature space with the
scales stored as log s, which keeps them positive.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from .base import Standardizer, noisy_or, pool, stack_bags

_EPS = 1e-12
_LOG_SCALE_BOUNDS = (-8.0, 8.0)


def _unpack(theta, d):
    return theta[:d], theta[d:]


def _instance_q(z, t, u):
    diff = z - t
    s2 = np.exp(2.0 * u)
    return (diff * diff * s2).sum(axis=1), diff, s2


def _log_not_concept(q):
    """log(1 - p + eps) and its derivative w.r.t. q."""
    one_minus = -np.expm1(-q)
    return np.log(one_minus + _EPS), np.exp(-q) / (one_minus + _EPS)


def _q_grads(g, diff, s2):
    """Chain rule from dLL/dq (one weight per instance) to (t, log s)."""
    gt = -2.0 * s2 * (g[:, None] * diff).sum(axis=0)
    gu = 2.0 * s2 * (g[:, None] * diff * diff).sum(axis=0)
    return np.concatenate([gt, gu])


def dd_neg_log_likelihood(theta, z, sizes, labels):
    """Noisy-or diverse density: negative log-likelihood and its gradient."""
    d = z.shape[1]
    t, u = _unpack(theta, d)
    q, diff, s2 = _instance_q(z, t, u)
    a, da = _log_not_concept(q)
    s = pool(a, sizes, "sum", stable=False)
    one_minus = np.maximum(-np.expm1(s), 0.0)
    ll_bag = np.where(labels == 1, np.log(one_minus + _EPS), s)
    dll_ds = np.where(labels == 1, -np.exp(s) / (one_minus + _EPS), 1.0)
    g = np.repeat(dll_ds, sizes) * da
    return -ll_bag.sum(), -_q_grads(g, diff, s2)


def _single_instance_nll(theta, z_sel, labels):
    """EM-DD M-step objective over one selected instance per bag."""
    d = z_sel.shape[1]
    t, u = _unpack(theta, d)
    q, diff, s2 = _instance_q(z_sel, t, u)
    a, da = _log_not_concept(q)
    pos = labels == 1
    ll = np.where(pos, -q, a)
    g = np.where(pos, -1.0, da)
    return -ll.sum(), -_q_grads(g, diff, s2)


def _settle_collapsed(theta, z_sel, labels):
    """Place targets of features whose scale sits at the lower bound.

    There the M-step gradient in t_d vanishes like s_d^2, so the optimizer
    leaves t_d wherever it started. As s_d -> 0 the stationarity condition
    becomes a weighted mean: positives with weight 1, negatives with weight
    -p/(1 - p) computed from the remaining features.
    """
    d = z_sel.shape[1]
    t, u = _unpack(theta, d)
    collapsed = u <= _LOG_SCALE_BOUNDS[0] + 1e-9
    if not collapsed.any():
        return theta
    q, _, _ = _instance_q(z_sel, t, np.where(collapsed, -np.inf, u))
    p = np.exp(-q)
    w = np.where(labels == 1, 1.0, -p / (1.0 - p + _EPS))
    den = w.sum()
    if den <= 0:
        return theta
    theta = theta.copy()
    theta[:d][collapsed] = (w @ z_sel[:, collapsed]) / den
    return theta


def _starts(z, sizes, labels, rng, n_restarts):
    inst_label = np.repeat(labels, sizes)
    candidates = np.flatnonzero(inst_label == 1)
    k = min(n_restarts, candidates.size)
    return z[np.sort(rng.choice(candidates, size=k, replace=False))]


def _bounds(d):
    return [(None, None)] * d + [_LOG_SCALE_BOUNDS] * d


class _ConceptModel:
    init_scale = 1.0

    def _prepare(self, bags, labels):
        x, sizes = stack_bags(bags)
        self.scaler_ = Standardizer().fit(x)
        return self.scaler_.transform(x), sizes, np.asarray(labels)

    def instance_prob(self, z):
        q, _, _ = _instance_q(z, self.target_, self.log_scale_)
        return np.exp(-q)

    @property
    def concept(self):
        """Target location in the original feature space."""
        return self.scaler_.inverse_point(self.target_)

    @property
    def scales(self):
        """Per-feature scales in the original feature space."""
        return np.exp(self.log_scale_) * self.scaler_.scale_


class DiverseDensity(_ConceptModel):
    """Maximum diverse density with restarts from positive-bag instances."""

    def __init__(self, n_restarts=10, max_iter=200):
        self.n_restarts = n_restarts
        self.max_iter = max_iter

    def fit(self, bags, labels, rng):
        z, sizes, labels = self._prepare(bags, labels)
        d = z.shape[1]
        best = None
        for start in _starts(z, sizes, labels, rng, self.n_restarts):
            theta0 = np.r_[start, np.full(d, np.log(self.init_scale))]
            res = minimize(dd_neg_log_likelihood, theta0, args=(z, sizes, labels), jac=True,
                           method="L-BFGS-B", bounds=_bounds(d),
                           options={"maxiter": self.max_iter})
            if np.isfinite(res.fun) and (best is None or res.fun < best[0]):
                best = (res.fun, res.x)
        theta = best[1] if best is not None else theta0
        self.target_, self.log_scale_ = theta[:d].copy(), theta[d:].copy()
        return self

    def score(self, bags):
        x, sizes = stack_bags(bags)
        return noisy_or(self.instance_prob(self.scaler_.transform(x)), sizes)


class EMDD(_ConceptModel):
    """EM-DD: alternate most-likely-instance selection and single-instance DD."""

    def __init__(self, n_restarts=10, max_em_iter=20, tol=1e-6, max_iter=100):
        self.n_restarts = n_restarts
        self.max_em_iter = max_em_iter
        self.tol = tol
        self.max_iter = max_iter

    def _select(self, z, starts, theta):
        d = z.shape[1]
        q, _, _ = _instance_q(z, theta[:d], theta[d:])
        # first minimum in each bag
        return np.array([s + int(np.argmin(q[s:e])) for s, e in starts])

    def fit(self, bags, labels, rng):
        z, sizes, labels = self._prepare(bags, labels)
        d = z.shape[1]
        offsets = np.r_[0, np.cumsum(sizes)]
        segments = list(zip(offsets[:-1], offsets[1:]))
        best = None
        for start in _starts(z, sizes, labels, rng, self.n_restarts):
            theta = np.r_[start, np.full(d, np.log(self.init_scale))]
            for _ in range(self.max_em_iter):
                sel = self._select(z, segments, theta)
                res = minimize(_single_instance_nll, theta, args=(z[sel], labels), jac=True,
                               method="L-BFGS-B", bounds=_bounds(d),
                               options={"maxiter": self.max_iter})
                new = _settle_collapsed(res.x, z[sel], labels)
                moved = np.linalg.norm(new[:d] - theta[:d])
                theta = new
                nll, _ = dd_neg_log_likelihood(theta, z, sizes, labels)
                if np.isfinite(nll) and (best is None or nll < best[0]):
                    best = (nll, theta.copy())
                if moved < self.tol:
                    break
        if best is None:
            best = (np.inf, theta)
        self.target_, self.log_scale_ = best[1][:d].copy(), best[1][d:].copy()
        return self

    def score(self, bags):
        # bag probability of its most likely instance
        x, sizes = stack_bags(bags)
        return pool(self.instance_prob(self.scaler_.transform(x)), sizes, "max")
