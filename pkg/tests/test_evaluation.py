import numpy as np
import pytest

from milchar.classifiers import catalog, find_classifiers
from milchar.evaluation import (
    CVResult,
    EvalFormatError,
    EvalMatrix,
    EvaluationError,
    cross_validate,
    dumps_eval,
    evaluate_all,
    fold_assignment,
    load_eval,
    loads_eval,
    save_eval,
    stratified_folds,
)
from milchar.roc import auc
from milchar.rng import stream
from milchar.synth import default_spec, generate

from conftest import make_dataset

FAST = find_classifiers(["simpleMIL", "bagstats-mean", "citationKNN-R3C5"])


@pytest.fixture(scope="module")
def small_pair():
    return [generate(default_spec("concept", 1)), generate(default_spec("difficult", 1))]


@pytest.fixture(scope="module")
def small_matrix(small_pair):
    return evaluate_all(small_pair, folds=5, seed=3, classifiers=FAST)


def test_stratified_folds_balance():
    labels = np.array([1] * 13 + [0] * 27)
    f = stratified_folds(labels, 5, stream(0))
    for k in range(5):
        assert (labels[f == k] == 1).sum() in (2, 3)
        assert (labels[f == k] == 0).sum() in (5, 6)


def test_fold_assignment_errors():
    ds = make_dataset("one", [("p", 1, [[0.0, 0.0]])] + [(f"n{i}", 0, [[1.0, i]]) for i in range(6)])
    with pytest.raises(ValueError, match="too few positive bags"):
        fold_assignment(ds, 5, 0)
    with pytest.raises(ValueError):
        cross_validate(ds, catalog()[0], folds=5, seed=0)


def test_simple_mil_cv_on_gaussian(gaussian1):
    res = cross_validate(gaussian1, catalog()[0], folds=5, seed=1)
    assert res.auc >= 0.8
    again = cross_validate(gaussian1, catalog()[0], folds=5, seed=1)
    assert again.roc == res.roc and again.auc == res.auc
    roc, a = res
    assert a == auc(roc)
    covered = sorted(i for fr in res.folds for i in fr.bag_indices)
    assert covered == list(range(len(gaussian1.bags)))


def test_matrix_contract(small_matrix, small_pair):
    assert small_matrix.datasets == ("concept", "difficult")
    assert small_matrix.classifiers == tuple(s.display_name for s in FAST)
    a = small_matrix.auc_matrix()
    assert a.shape == (2, 3) and np.all((a >= 0) & (a <= 1))
    for cell in small_matrix.cells.values():
        assert abs(cell.auc - auc(cell.roc)) <= 1e-12


def test_parallel_schedule_is_irrelevant(small_pair, small_matrix):
    par = evaluate_all(small_pair, folds=5, seed=3, classifiers=FAST, jobs=3)
    assert dumps_eval(par) == dumps_eval(small_matrix)


def test_progress_callback(small_pair):
    seen = []
    evaluate_all(small_pair[:1], folds=5, seed=3, classifiers=FAST[:2],
                 progress=lambda *a: seen.append(a))
    assert [(d, c, done, total) for d, c, _, done, total in seen] == [
        ("concept", "simpleMIL", 1, 2), ("concept", "citationKNN-R3C5", 2, 2)]


def test_serialization_roundtrip(tmp_path, small_matrix):
    path = tmp_path / "m.tsv"
    save_eval(small_matrix, path)
    back = load_eval(path)
    assert back == small_matrix
    assert dumps_eval(back) == path.read_text()
    assert back.cell("concept", "simpleMIL").folds == small_matrix.cell("concept", "simpleMIL").folds
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".evalmatrix")]


def test_atomic_save_keeps_old_file(tmp_path, small_matrix, monkeypatch):
    path = tmp_path / "m.tsv"
    path.write_text("old\n")
    import milchar.evaluation as ev

    def boom(em):
        raise RuntimeError("interrupted")

    monkeypatch.setattr(ev, "dumps_eval", boom)
    with pytest.raises(RuntimeError):
        ev.save_eval(small_matrix, path)
    assert path.read_text() == "old\n"
    assert [p.name for p in tmp_path.iterdir()] == ["m.tsv"]


@pytest.mark.parametrize("mutate, msg", [
    (lambda t: t.replace("#milchar-evalmatrix\t1", "#other\t1"), "not an EvalMatrix"),
    (lambda t: "\n".join(l for l in t.splitlines() if not l.startswith("cell\tdifficult")), "incomplete"),
    (lambda t: t.replace("folds\t5\n", ""), "folds"),
    (lambda t: t + "bogus\tx\n", "unknown record"),
])
def test_format_errors(small_matrix, mutate, msg):
    with pytest.raises(EvalFormatError, match=msg):
        loads_eval(mutate(dumps_eval(small_matrix)))


def test_incomplete_matrix_rejected(small_matrix):
    cells = dict(small_matrix.cells)
    cells.pop(("concept", "simpleMIL"))
    with pytest.raises(ValueError, match="incomplete"):
        EvalMatrix(small_matrix.datasets, small_matrix.classifiers, 5, 3, cells)


def test_cell_failure_names_dataset_and_classifier(monkeypatch, small_pair):
    import milchar.evaluation as ev

    def broken(*a, **k):
        raise FloatingPointError("nan scores")

    monkeypatch.setattr(ev, "cross_validate", broken)
    with pytest.raises(EvaluationError, match="concept.*simpleMIL") as info:
        evaluate_all(small_pair[:1], folds=5, seed=0, classifiers=FAST[:1])
    assert isinstance(info.value.cause, FloatingPointError)


def test_duplicate_dataset_names(small_pair):
    with pytest.raises(ValueError, match="unique"):
        evaluate_all([small_pair[0], small_pair[0]], folds=5, classifiers=FAST[:1])


def test_cvresult_unpacks():
    from milchar.roc import RocCurve
    r = CVResult(RocCurve([0, 1], [0, 1]), 0.5)
    roc, a = r
    assert a == 0.5
