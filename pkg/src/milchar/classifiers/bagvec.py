"""Bag-level classifiers: each bag becomes one vector (or kernel row) that a
supervised learner consumes."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.cluster.vq import kmeans2

from .base import LogisticRegression, Standardizer, pool, sq_dists, stack_bags


class _VectorClassifier:
    """Embed bags, then fit the logistic base learner on the bag vectors."""

    l1 = 0.0

    def _fit_embedding(self, bags, rng):
        raise NotImplementedError

    def embed(self, bags):
        raise NotImplementedError

    def fit(self, bags, labels, rng):
        self._fit_embedding(bags, rng)
        l1 = self.l1
        self.clf_ = (LogisticRegression(l1=l1) if l1 else LogisticRegression()).fit(
            self.embed(bags), labels)
        return self

    def score(self, bags):
        return self.clf_.decision_function(self.embed(bags))


class BagStatistics(_VectorClassifier):
    """Per-feature summary statistics of the instances."""

    STATS = {"mean": ("mean",), "minmax": ("min", "max"), "meanminmax": ("mean", "min", "max")}

    def __init__(self, stats="mean"):
        if stats not in self.STATS:
            raise ValueError(f"unknown statistics {stats!r}")
        self.stats = stats

    def _fit_embedding(self, bags, rng):
        pass

    def embed(self, bags):
        x, sizes = stack_bags(bags)
        return np.hstack([pool(x, sizes, how) for how in self.STATS[self.stats]])


class BagOfWords(_VectorClassifier):
    """k-means vocabulary over training instances; bags become word histograms."""

    def __init__(self, k=10):
        self.k = k

    def _fit_embedding(self, bags, rng):
        x, _ = stack_bags(bags)
        self.scaler_ = Standardizer().fit(x)
        z = self.scaler_.transform(x)
        k = min(self.k, np.unique(z, axis=0).shape[0])
        with warnings.catch_warnings():
            # empty clusters are kept; they just never fire
            warnings.simplefilter("ignore")
            self.codebook_, _ = kmeans2(z, k, minit="++", seed=rng)

    def embed(self, bags):
        x, sizes = stack_bags(bags)
        words = np.argmin(sq_dists(self.scaler_.transform(x), self.codebook_), axis=1)
        onehot = np.zeros((x.shape[0], self.codebook_.shape[0]))
        onehot[np.arange(x.shape[0]), words] = 1.0
        return pool(onehot, sizes, "sum") / sizes[:, None]


class MILES(_VectorClassifier):
    """Similarity of a bag to every training instance, with an L1-penalized learner."""

    l1 = 0.01

    def __init__(self, width_factor=1.0):
        self.width_factor = width_factor

    def _fit_embedding(self, bags, rng):
        x, _ = stack_bags(bags)
        self.scaler_ = Standardizer().fit(x)
        self.prototypes_ = self.scaler_.transform(x)
        self.sigma2_ = self.width_factor * x.shape[1]

    def embed(self, bags):
        x, sizes = stack_bags(bags)
        sim = np.exp(-sq_dists(self.scaler_.transform(x), self.prototypes_) / self.sigma2_)
        return pool(sim, sizes, "max")


class BagDissimilarity(_VectorClassifier):
    """Dissimilarities to each training bag, aggregated from instance distances."""

    RULES = ("meanmin", "minmin", "meanmean")

    def __init__(self, rule="meanmin"):
        if rule not in self.RULES:
            raise ValueError(f"unknown dissimilarity {rule!r}")
        self.rule = rule

    def _fit_embedding(self, bags, rng):
        x, sizes = stack_bags(bags)
        self.scaler_ = Standardizer().fit(x)
        self.train_x_ = self.scaler_.transform(x)
        self.train_sizes_ = sizes

    def embed(self, bags):
        x, sizes = stack_bags(bags)
        dist = np.sqrt(sq_dists(self.scaler_.transform(x), self.train_x_))
        # reduce over the training bag's instances, then over the scored bag's
        inner = "mean" if self.rule == "meanmean" else "min"
        per_inst = pool(dist.T, self.train_sizes_, inner, stable=False).T
        outer = "min" if self.rule == "minmin" else "mean"
        return pool(per_inst, sizes, outer)


def set_kernel(xa, sizes_a, xb, sizes_b, gamma):
    """K(A, B) = mean over instance pairs of exp(-gamma ||a - b||^2)."""
    k = np.exp(-gamma * sq_dists(xa, xb))
    per_a = pool(k.T, sizes_b, "sum", stable=False).T
    return pool(per_a, sizes_a, "sum") / np.outer(sizes_a, sizes_b)


class MILKernel:
    """Set kernel with a kernel ridge classifier on +/-1 bag targets."""

    def __init__(self, gamma_factor=1.0, ridge=0.1):
        self.gamma_factor = gamma_factor
        self.ridge = ridge

    def fit(self, bags, labels, rng):
        x, sizes = stack_bags(bags)
        self.scaler_ = Standardizer().fit(x)
        self.train_x_ = self.scaler_.transform(x)
        self.train_sizes_ = sizes
        self.gamma_ = self.gamma_factor / x.shape[1]
        gram = self.gram(bags)
        gram = (gram + gram.T) / 2.0
        target = np.where(np.asarray(labels) == 1, 1.0, -1.0)
        self.offset_ = target.mean()
        self.dual_ = np.linalg.solve(gram + self.ridge * np.eye(len(target)),
                                     target - self.offset_)
        return self

    def gram(self, bags):
        """Set-kernel matrix between ``bags`` and the training bags."""
        x, sizes = stack_bags(bags)
        return set_kernel(self.scaler_.transform(x), sizes, self.train_x_,
                          self.train_sizes_, self.gamma_)

    def score(self, bags):
        return (self.gram(bags) * self.dual_).sum(axis=1) + self.offset_


def minimal_hausdorff(xa, sizes_a, xb, sizes_b):
    """Smallest instance-to-instance distance between every pair of bags."""
    d = np.sqrt(sq_dists(xa, xb))
    return pool(pool(d, sizes_a, "min").T, sizes_b, "min").T


class CitationKNN:
    """Citation-kNN: vote of R nearest references and the bags citing the query."""

    def __init__(self, n_refs=3, n_citers=5):
        self.n_refs = n_refs
        self.n_citers = n_citers

    def fit(self, bags, labels, rng):
        x, sizes = stack_bags(bags)
        self.scaler_ = Standardizer().fit(x)
        self.train_x_ = self.scaler_.transform(x)
        self.train_sizes_ = sizes
        self.labels_ = np.asarray(labels)
        dist = minimal_hausdorff(self.train_x_, sizes, self.train_x_, sizes)
        n = len(sizes)
        np.fill_diagonal(dist, np.inf)
        # distance to each training bag's C-th nearest other training bag; a
        # query ranked after ties (it has the largest index) cites if strictly closer
        c = min(self.n_citers, n - 1)
        self.cite_radius_ = np.sort(dist, axis=1)[:, c - 1] if c > 0 else np.full(n, -np.inf)
        return self

    def score(self, bags):
        x, sizes = stack_bags(bags)
        dist = minimal_hausdorff(self.scaler_.transform(x), sizes, self.train_x_,
                                 self.train_sizes_)
        r = min(self.n_refs, dist.shape[1])
        scores = np.empty(len(sizes))
        for i, row in enumerate(dist):
            refs = np.argsort(row, kind="stable")[:r]
            citers = np.flatnonzero(row < self.cite_radius_)
            scores[i] = (self.labels_[refs].sum() + self.labels_[citers].sum()) / (r + citers.size)
        return scores
