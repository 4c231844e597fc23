"""MIL data model, the flat dataset CSV format and metadata features."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np


class DatasetFormatError(ValueError):
    """Malformed dataset file or a dataset that violates the MIL invariants."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Bag:
    bag_id: str
    instances: np.ndarray
    label: int

    def __post_init__(self):
        if not self.bag_id or any(c in self.bag_id for c in ",\r\n"):
            raise DatasetFormatError(f"invalid bag id {self.bag_id!r}")
        x = np.array(self.instances, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise DatasetFormatError(
                f"bag {self.bag_id!r}: instances must be a non-empty 2-D array")
        if not np.all(np.isfinite(x)):
            raise DatasetFormatError(f"bag {self.bag_id!r}: non-finite feature value")
        if self.label not in (0, 1):
            raise DatasetFormatError(f"bag {self.bag_id!r}: label must be 0 or 1")
        x.setflags(write=False)
        object.__setattr__(self, "instances", x)
        object.__setattr__(self, "label", int(self.label))

    @property
    def size(self):
        return self.instances.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Bag):
            return NotImplemented
        return (self.bag_id == other.bag_id and self.label == other.label
                and np.array_equal(self.instances, other.instances))

    def __hash__(self):
        return hash((self.bag_id, self.label, self.instances.tobytes()))


@dataclass(frozen=True, eq=False)
class MilDataset:
    name: str
    bags: tuple[Bag, ...]
    feature_dim: int

    def __post_init__(self):
        bags = tuple(self.bags)
        object.__setattr__(self, "bags", bags)
        if self.feature_dim < 1:
            raise DatasetFormatError("feature_dim must be positive")
        seen = set()
        for b in bags:
            if b.instances.shape[1] != self.feature_dim:
                raise DatasetFormatError(
                    f"bag {b.bag_id!r} has {b.instances.shape[1]} features, "
                    f"expected {self.feature_dim}")
            if b.bag_id in seen:
                raise DatasetFormatError(f"duplicate bag id {b.bag_id!r}")
            seen.add(b.bag_id)
        labels = {b.label for b in bags}
        if labels != {0, 1}:
            raise DatasetFormatError("dataset needs at least one positive and one negative bag")

    @property
    def labels(self):
        return np.array([b.label for b in self.bags], dtype=np.int64)

    @property
    def n_instances(self):
        return sum(b.size for b in self.bags)

    def subset(self, indices, name=None):
        """Dataset restricted to the bags at ``indices`` (order kept as given)."""
        return MilDataset(name or self.name, tuple(self.bags[i] for i in indices),
                          self.feature_dim)

    def __eq__(self, other):
        if not isinstance(other, MilDataset):
            return NotImplemented
        return (self.name == other.name and self.feature_dim == other.feature_dim
                and self.bags == other.bags)

    def __hash__(self):
        return hash((self.name, self.feature_dim, self.bags))


class MetaVector(NamedTuple):
    n_pos_bags: int
    n_neg_bags: int
    n_features: int
    n_total_instances: int
    min_bag_size: int
    max_bag_size: int


def _format_float(v):
    # repr is the shortest string that round-trips exactly
    return repr(float(v))


def dumps_dataset(dataset: MilDataset) -> str:
    buf = io.StringIO()
    d = dataset.feature_dim
    buf.write(",".join(["bag_id", "label"] + [f"f{k + 1}" for k in range(d)]) + "\n")
    for bag in dataset.bags:
        for row in bag.instances:
            buf.write(f"{bag.bag_id},{bag.label}," + ",".join(map(_format_float, row)) + "\n")
    return buf.getvalue()


def save_dataset(dataset: MilDataset, path) -> None:
    text = dumps_dataset(dataset)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def loads_dataset(text: str, name: str) -> MilDataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetFormatError("empty file", line=1) from None
    if len(header) < 3 or header[0] != "bag_id" or header[1] != "label":
        raise DatasetFormatError("header must be bag_id,label,f1,...,fd", line=1)
    d = len(header) - 2
    if header[2:] != [f"f{k + 1}" for k in range(d)]:
        raise DatasetFormatError("feature columns must be named f1..fd", line=1)

    rows: dict[str, list] = {}
    labels: dict[str, int] = {}
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != d + 2:
            raise DatasetFormatError(
                f"expected {d + 2} columns, found {len(rec)}", line=lineno)
        bag_id, lab = rec[0], rec[1].strip()
        if not bag_id:
            raise DatasetFormatError("empty bag identifier", line=lineno)
        if lab not in ("0", "1"):
            raise DatasetFormatError(f"label must be 0 or 1, got {lab!r}", line=lineno)
        try:
            values = [float(v) for v in rec[2:]]
        except ValueError as exc:
            raise DatasetFormatError(f"malformed feature value ({exc})", line=lineno) from None
        if not all(math.isfinite(v) for v in values):
            raise DatasetFormatError("non-finite feature value", line=lineno)
        if bag_id in labels and labels[bag_id] != int(lab):
            raise DatasetFormatError(f"inconsistent bag label for bag {bag_id!r}", line=lineno)
        labels[bag_id] = int(lab)
        rows.setdefault(bag_id, []).append(values)

    if not rows:
        raise DatasetFormatError("no instances", line=2)
    if set(labels.values()) != {0, 1}:
        raise DatasetFormatError("dataset needs at least one positive and one negative bag",
                                 line=lineno)
    bags = tuple(Bag(b, np.array(r, dtype=np.float64), labels[b]) for b, r in rows.items())
    return MilDataset(name, bags, d)


def load_dataset(path, name: str | None = None) -> MilDataset:
    """Read a dataset CSV. The dataset name defaults to the file stem."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    return loads_dataset(text, name if name is not None else path.stem)


def meta_vector(dataset: MilDataset) -> MetaVector:
    sizes = [b.size for b in dataset.bags]
    n_pos = sum(1 for b in dataset.bags if b.label == 1)
    return MetaVector(n_pos, len(sizes) - n_pos, dataset.feature_dim, sum(sizes),
                      min(sizes), max(sizes))


def normalize_meta(collection: Sequence[MetaVector]) -> np.ndarray:
    """Standardize each metadata column (n-1 denominator); constant columns become 0."""
    m = np.asarray(collection, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 2:
        raise ValueError("normalize_meta needs at least 2 metadata vectors")
    centered = m - m.mean(axis=0)
    std = m.std(axis=0, ddof=1)
    out = np.zeros_like(centered)
    nz = np.ptp(m, axis=0) > 0
    out[:, nz] = centered[:, nz] / std[nz]
    return out
