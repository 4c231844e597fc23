"""Cross-validated ROC evaluation of the classifier catalog over datasets.

EvalMatrix text format (UTF-8, one tab-separated record per line)::

    #milchar-evalmatrix  1
    folds       <int>
    seed        <int>
    dataset     <name>                        (one line each, in order)
    classifier  <display name>                (one line each, in order)
    cell        <dataset> <classifier> <auc> <fpr,tpr;fpr,tpr;...>
    fold        <dataset> <classifier> <fold> <bag:label:score,...>

Floats are written with ``repr`` so a file round-trips exactly.
"""

from __future__ import annotations

import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .classifiers import ClassifierSpec, catalog, catalog_index, score_bags, train
from .data import MilDataset
from .rng import derive_seed, name_key, stream
from .roc import RocCurve, auc, roc_curve

_FOLD_ROLE = 0xF01D
FORMAT_TAG = "#milchar-evalmatrix"
FORMAT_VERSION = "1"


class EvaluationError(RuntimeError):
    def __init__(self, dataset, classifier, cause):
        self.dataset = dataset
        self.classifier = classifier
        self.cause = cause
        super().__init__(f"dataset {dataset!r}, classifier {classifier!r}: {cause}")


@dataclass(frozen=True)
class FoldResult:
    fold: int
    bag_indices: tuple
    labels: tuple
    scores: tuple


@dataclass(frozen=True)
class CVResult:
    roc: RocCurve
    auc: float
    folds: tuple = field(default=(), compare=False)

    def __iter__(self):
        # unpacks as (roc, auc)
        return iter((self.roc, self.auc))


def stratified_folds(labels, folds, rng) -> np.ndarray:
    """Fold id per bag: each class is shuffled and dealt round-robin."""
    labels = np.asarray(labels)
    assignment = np.empty(labels.size, dtype=np.int64)
    for cls in (1, 0):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(idx.size)]
        assignment[idx] = np.arange(idx.size) % folds
    return assignment


def fold_assignment(dataset: MilDataset, folds: int, seed: int) -> np.ndarray:
    labels = dataset.labels
    if folds < 2:
        raise ValueError("need at least 2 folds")
    for cls, what in ((1, "positive"), (0, "negative")):
        if int((labels == cls).sum()) < folds:
            raise ValueError(f"too few {what} bags ({int((labels == cls).sum())}) for {folds} folds")
    return stratified_folds(labels, folds, stream(seed, name_key(dataset.name), _FOLD_ROLE))


def cross_validate(dataset: MilDataset, spec: ClassifierSpec, folds: int = 10,
                   seed: int = 0) -> CVResult:
    """Pooled-score k-fold evaluation over bags."""
    assignment = fold_assignment(dataset, folds, seed)
    clf_index = catalog_index(spec)
    labels = dataset.labels
    pooled = np.empty(labels.size)
    results = []
    for f in range(folds):
        test = np.flatnonzero(assignment == f)
        train_idx = np.flatnonzero(assignment != f)
        task_seed = derive_seed(seed, name_key(dataset.name), clf_index, f)
        model = train(spec, dataset.subset(train_idx), task_seed)
        s = score_bags(model, [dataset.bags[i] for i in test])
        pooled[test] = s
        results.append(FoldResult(f, tuple(test.tolist()), tuple(labels[test].tolist()),
                                  tuple(s.tolist())))
    curve = roc_curve(pooled, labels)
    return CVResult(curve, auc(curve), tuple(results))


@dataclass(frozen=True, eq=False)
class EvalMatrix:
    datasets: tuple
    classifiers: tuple
    folds: int
    seed: int
    cells: dict  # (dataset, classifier) -> CVResult

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        missing = [(d, c) for d in self.datasets for c in self.classifiers
                   if (d, c) not in self.cells]
        if missing:
            raise ValueError(f"incomplete EvalMatrix, missing cells {missing[:3]}")

    def cell(self, dataset, classifier) -> CVResult:
        return self.cells[(dataset, classifier)]

    def auc_matrix(self) -> np.ndarray:
        return np.array([[self.cells[(d, c)].auc for c in self.classifiers]
                         for d in self.datasets])

    def row(self, dataset):
        return [self.cells[(dataset, c)] for c in self.classifiers]

    def __eq__(self, other):
        if not isinstance(other, EvalMatrix):
            return NotImplemented
        return dumps_eval(self) == dumps_eval(other)


def _run_cell(args):
    dataset, spec, folds, seed = args
    with threadpool_limits(1):
        try:
            return cross_validate(dataset, spec, folds, seed)
        except Exception as exc:  # noqa: BLE001 - re-raised with cell identity
            raise EvaluationError(dataset.name, spec.display_name, exc) from exc


def evaluate_all(datasets, folds=10, seed=0, classifiers=None, jobs=1,
                 progress=None) -> EvalMatrix:
    """Fill every (dataset, classifier) cell. Results do not depend on ``jobs``."""
    datasets = list(datasets)
    specs = list(classifiers) if classifiers is not None else catalog()
    names = [d.name for d in datasets]
    if len(set(names)) != len(names):
        raise ValueError("dataset names must be unique")
    for d in datasets:
        fold_assignment(d, folds, seed)  # fail early on undersized datasets
    tasks = [(d, s, folds, seed) for d in datasets for s in specs]
    cells = {}

    def record(task, result):
        cells[(task[0].name, task[1].display_name)] = result
        if progress is not None:
            progress(task[0].name, task[1].display_name, result.auc, len(cells), len(tasks))

    if jobs <= 1:
        for task in tasks:
            record(task, _run_cell(task))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for task, result in zip(tasks, pool.map(_run_cell, tasks)):
                record(task, result)
    return EvalMatrix(names, [s.display_name for s in specs], folds, seed, cells)


def _f(v):
    return repr(float(v))


def dumps_eval(em: EvalMatrix) -> str:
    lines = [f"{FORMAT_TAG}\t{FORMAT_VERSION}", f"folds\t{em.folds}", f"seed\t{em.seed}"]
    lines += [f"dataset\t{d}" for d in em.datasets]
    lines += [f"classifier\t{c}" for c in em.classifiers]
    for d in em.datasets:
        for c in em.classifiers:
            cell = em.cells[(d, c)]
            pts = ";".join(f"{_f(x)},{_f(y)}" for x, y in zip(cell.roc.fpr, cell.roc.tpr))
            lines.append(f"cell\t{d}\t{c}\t{_f(cell.auc)}\t{pts}")
            for fr in cell.folds:
                rec = ",".join(f"{b}:{y}:{_f(s)}"
                               for b, y, s in zip(fr.bag_indices, fr.labels, fr.scores))
                lines.append(f"fold\t{d}\t{c}\t{fr.fold}\t{rec}")
    return "\n".join(lines) + "\n"


class EvalFormatError(ValueError):
    pass


def loads_eval(text: str) -> EvalMatrix:
    datasets, classifiers, cells, fold_recs = [], [], {}, {}
    folds = seed = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line:
            continue
        parts = line.split("\t")
        tag = parts[0]
        try:
            if lineno == 1:
                if tag != FORMAT_TAG or parts[1:] != [FORMAT_VERSION]:
                    raise EvalFormatError("not an EvalMatrix file")
            elif tag == "folds":
                folds = int(parts[1])
            elif tag == "seed":
                seed = int(parts[1])
            elif tag == "dataset":
                datasets.append(parts[1])
            elif tag == "classifier":
                classifiers.append(parts[1])
            elif tag == "cell":
                _, d, c, a, pts = parts
                xy = np.array([[float(v) for v in p.split(",")] for p in pts.split(";")])
                cells[(d, c)] = (RocCurve(xy[:, 0], xy[:, 1]), float(a))
            elif tag == "fold":
                _, d, c, f, rec = parts
                items = [r.split(":") for r in rec.split(",")] if rec else []
                fold_recs.setdefault((d, c), []).append(FoldResult(
                    int(f), tuple(int(i[0]) for i in items), tuple(int(i[1]) for i in items),
                    tuple(float(i[2]) for i in items)))
            else:
                raise EvalFormatError(f"unknown record {tag!r}")
        except (ValueError, IndexError) as exc:
            if isinstance(exc, EvalFormatError):
                exc = exc.args[0]
            raise EvalFormatError(f"line {lineno}: {exc}") from None
    if folds is None or seed is None:
        raise EvalFormatError("missing folds/seed header")
    results = {k: CVResult(roc, a, tuple(fold_recs.get(k, ()))) for k, (roc, a) in cells.items()}
    try:
        return EvalMatrix(datasets, classifiers, folds, seed, results)
    except ValueError as exc:
        raise EvalFormatError(str(exc)) from None


def save_eval(em: EvalMatrix, path) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".evalmatrix-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(dumps_eval(em))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_eval(path) -> EvalMatrix:
    with open(path, encoding="utf-8", newline="") as fh:
        return loads_eval(fh.read())
