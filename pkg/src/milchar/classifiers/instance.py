"""Instance-level MIL classifiers: simpleMIL, MILBoost and miSVM."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit, log_expit

from .base import LogisticRegression, Standardizer, noisy_or, pool, rowdot, stack_bags


class SimpleMIL:
    """Every instance inherits its bag label; bag score is the mean instance posterior."""

    def fit(self, bags, labels, rng):
        x, sizes = stack_bags(bags)
        self.clf_ = LogisticRegression().fit(x, np.repeat(labels, sizes))
        return self

    def score(self, bags):
        x, sizes = stack_bags(bags)
        return pool(self.clf_.predict_proba(x), sizes, "mean")


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo, hi, n_iter=30):
    """Maximize a unimodal f on [lo, hi]; returns the best evaluated point."""
    a, b = lo, hi
    c, d = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(n_iter):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return c if fc >= fd else d


class _StumpSearch:
    """Precomputed per-feature orderings for fast weighted stump selection."""

    def __init__(self, x):
        self.x = x
        self.order = np.argsort(x, axis=0, kind="stable")
        self.features = []
        for k in range(x.shape[1]):
            xs = x[self.order[:, k], k]
            # positions where the sorted value changes: a threshold between them
            cut = np.flatnonzero(np.diff(xs) > 0)
            thresholds = (xs[cut] + xs[cut + 1]) / 2.0
            self.features.append((cut, thresholds))

    def best(self, w):
        """Stump (feature, threshold, polarity) maximizing sum_i w_i c(x_i)."""
        total = w.sum()
        best = (0.0, None)
        for k, (cut, thresholds) in enumerate(self.features):
            if cut.size == 0:
                continue
            left = np.cumsum(w[self.order[:, k]])[cut]
            gain = total - 2.0 * left  # c = +1 above threshold
            j = int(np.argmax(np.abs(gain)))
            if abs(gain[j]) > best[0]:
                best = (abs(gain[j]), (k, thresholds[j], 1.0 if gain[j] > 0 else -1.0))
        return best[1]


def _stump(x, stump):
    k, thr, polarity = stump
    return np.where(x[:, k] > thr, polarity, -polarity)


class MILBoost:
    """Gradient boosting of decision stumps under a noisy-or bag likelihood."""

    def __init__(self, n_rounds=100, max_step=5.0, line_search_iter=30):
        self.n_rounds = n_rounds
        self.max_step = max_step
        self.line_search_iter = line_search_iter

    @staticmethod
    def _log_likelihood(y_inst, sizes, labels):
        log_not = pool(log_expit(-y_inst), sizes, "sum", stable=False)
        log_pos = np.log(np.maximum(-np.expm1(log_not), 1e-300))
        return float(np.where(labels == 1, log_pos, log_not).sum())

    def fit(self, bags, labels, rng):
        x, sizes = stack_bags(bags)
        labels = np.asarray(labels)
        search = _StumpSearch(x)
        inst_label = np.repeat(labels, sizes)
        y_inst = np.zeros(x.shape[0])
        self.stumps_, self.alphas_ = [], []
        for _ in range(self.n_rounds):
            p_inst = expit(y_inst)
            p_bag = noisy_or(p_inst, sizes, stable=False)
            p_bag_inst = np.maximum(np.repeat(p_bag, sizes), 1e-12)
            w = p_inst * (inst_label - p_bag_inst) / p_bag_inst
            stump = search.best(w)
            if stump is None:
                break
            c = _stump(x, stump)
            alpha = golden_section_max(
                lambda a: self._log_likelihood(y_inst + a * c, sizes, labels),
                0.0, self.max_step, self.line_search_iter)
            if alpha <= 0:
                break
            y_inst = y_inst + alpha * c
            self.stumps_.append(stump)
            self.alphas_.append(alpha)
        return self

    def instance_scores(self, x):
        y = np.zeros(x.shape[0])
        for stump, alpha in zip(self.stumps_, self.alphas_):
            y += alpha * _stump(x, stump)
        return y

    def score(self, bags):
        x, sizes = stack_bags(bags)
        return noisy_or(expit(self.instance_scores(x)), sizes)


class LinearSVM:
    """Primal hinge-loss SVM by mini-batch subgradient descent (Pegasos).

    Minimizes lam/2 ||w||^2 + mean hinge with lam = 1/(C n). A constant
    feature is appended so the bias is part of w. Returns the average of the
    iterates from the second half of training.
    """

    def __init__(self, C=1.0, epochs=50, batches_per_epoch=10):
        self.C = C
        self.epochs = epochs
        self.batches_per_epoch = batches_per_epoch

    def fit(self, z, y, rng):
        n = z.shape[0]
        za = np.hstack([z, np.ones((n, 1))])
        lam = 1.0 / (self.C * n)
        radius = 1.0 / math.sqrt(lam)
        w = np.zeros(za.shape[1])
        avg = np.zeros_like(w)
        n_avg = 0
        total = self.epochs * self.batches_per_epoch
        t = 0
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for batch in np.array_split(order, self.batches_per_epoch):
                if batch.size == 0:
                    continue
                t += 1
                eta = 1.0 / (lam * t)
                zb, yb = za[batch], y[batch]
                viol = yb * (zb @ w) < 1.0
                w = (1.0 - eta * lam) * w + (eta / batch.size) * (yb[viol] @ zb[viol])
                norm = np.linalg.norm(w)
                if norm > radius:
                    w *= radius / norm
                if t > total // 2:
                    avg += w
                    n_avg += 1
        w = avg / max(n_avg, 1)
        self.coef_, self.intercept_ = w[:-1], w[-1]
        return self

    def decision_function(self, z):
        return rowdot(z, self.coef_) + self.intercept_


class MiSVM:
    """mi-SVM: alternate a linear SVM with relabeling of positive-bag instances."""

    def __init__(self, C=1.0, max_outer=20, epochs=50):
        self.C = C
        self.max_outer = max_outer
        self.epochs = epochs

    def fit(self, bags, labels, rng):
        x, sizes = stack_bags(bags)
        labels = np.asarray(labels)
        self.scaler_ = Standardizer().fit(x)
        z = self.scaler_.transform(x)
        starts = np.r_[0, np.cumsum(sizes)]
        in_pos = np.repeat(labels == 1, sizes)
        y = np.where(in_pos, 1.0, -1.0)
        for _ in range(self.max_outer):
            svm = LinearSVM(self.C, self.epochs).fit(z, y, rng)
            f = svm.decision_function(z)
            new_y = np.where(in_pos, np.where(f >= 0, 1.0, -1.0), -1.0)
            for b in np.flatnonzero(labels == 1):
                s, e = starts[b], starts[b + 1]
                if not np.any(new_y[s:e] > 0):
                    new_y[s + int(np.argmax(f[s:e]))] = 1.0
            self.svm_ = svm
            if np.array_equal(new_y, y):
                break
            y = new_y
        return self

    def score(self, bags):
        x, sizes = stack_bags(bags)
        return pool(self.svm_.decision_function(self.scaler_.transform(x)), sizes, "max")
