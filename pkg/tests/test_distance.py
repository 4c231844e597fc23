import numpy as np
import pytest

from milchar.data import MetaVector
from milchar.distance import (
    DistanceMatrix,
    classifier_correlations,
    d_auc,
    d_meta,
    d_roc,
    diversity_report,
    dumps_square,
    load_distance,
    loads_distance,
    pca_cumulative_variance,
    per_classifier_distances,
    save_distance,
)
from milchar.evaluation import CVResult, EvalMatrix
from milchar.roc import RocCurve, auc, roc_area_between

PERFECT = RocCurve([0, 0, 1], [0, 1, 1])
CHANCE = RocCurve([0, 1], [0, 1])


def matrix(rows, names=None, classifiers=None):
    """EvalMatrix from a nested list of RocCurves (datasets x classifiers)."""
    names = names or [f"d{i}" for i in range(len(rows))]
    classifiers = classifiers or [f"c{k}" for k in range(len(rows[0]))]
    cells = {(d, c): CVResult(r, auc(r)) for d, row in zip(names, rows)
             for c, r in zip(classifiers, row)}
    return EvalMatrix(names, classifiers, 10, 0, cells)


def random_curve(rng, n=12):
    s = rng.normal(size=n)
    y = np.r_[np.ones(n // 2, int), np.zeros(n - n // 2, int)]
    from milchar.roc import roc_curve
    return roc_curve(s + rng.uniform(0, 2) * y, y)


def test_d_auc_example():
    em = matrix([[PERFECT, PERFECT], [CHANCE, CHANCE]])
    assert d_auc(em).values[0, 1] == pytest.approx(np.sqrt(0.5))


def test_d_auc_classifier_permutation():
    rng = np.random.default_rng(0)
    rows = [[random_curve(rng) for _ in range(4)] for _ in range(3)]
    a = d_auc(matrix(rows)).values
    b = d_auc(matrix([r[::-1] for r in rows])).values
    np.testing.assert_allclose(a, b, atol=1e-15)


def test_d_roc_single_and_composed():
    a = RocCurve([0, 0.3, 1], [0, 0.9, 1])
    em = matrix([[a], [CHANCE]])
    assert d_roc(em).values[0, 1] == pytest.approx(roc_area_between(a, CHANCE))
    # areas 0.3 and 0.4 combine to 0.5
    x = RocCurve([0, 0.4, 1], [0, 1, 1])
    y = RocCurve([0, 0.4, 0.4, 1], [0, 0, 1, 1])
    em = matrix([[x, PERFECT], [CHANCE, CHANCE]])
    areas = [roc_area_between(x, CHANCE), roc_area_between(PERFECT, CHANCE)]
    assert d_roc(em).values[0, 1] == pytest.approx(np.hypot(*areas))
    assert np.hypot(0.3, 0.4) == pytest.approx(0.5)
    assert roc_area_between(y, y) == 0


def test_identical_rows_are_zero():
    rng = np.random.default_rng(1)
    row = [random_curve(rng) for _ in range(5)]
    em = matrix([row, list(row), [random_curve(rng) for _ in range(5)]])
    assert d_roc(em).values[0, 1] == 0 and d_auc(em).values[0, 1] == 0
    assert d_roc(em).values[0, 2] > 0


def test_distance_properties_and_domination():
    rng = np.random.default_rng(2)
    rows = [[random_curve(rng) for _ in range(6)] for _ in range(7)]
    em = matrix(rows)
    feats = per_classifier_distances(em)
    assert feats.shape == (21, 6)
    droc, dauc = d_roc(em).values, d_auc(em).values
    iu = np.triu_indices(7, 1)
    np.testing.assert_array_equal(np.linalg.norm(feats, axis=1), droc[iu])
    assert np.all(dauc <= droc + 1e-12)
    for dm in (droc, dauc):
        assert np.all(np.diag(dm) == 0) and np.allclose(dm, dm.T, atol=1e-12, rtol=0)
        for i in range(7):
            assert np.all(dm[i][:, None] <= dm[i][None, :] + dm + 1e-9)


def test_identical_classifiers_give_identical_columns():
    rng = np.random.default_rng(3)
    rows = [[c, c] for c in (random_curve(rng) for _ in range(4))]
    feats = per_classifier_distances(matrix(rows))
    np.testing.assert_array_equal(feats[:, 0], feats[:, 1])


def test_d_meta():
    metas = np.array([[1.0, 2, 3, 4, 5, 6], [1.0, 2, 3, 4, 5, 6], [0, 0, 0, 0, 0, 0]])
    dm = d_meta(metas, ["a", "b", "c"])
    assert dm.values[0, 1] == 0
    assert dm.values[0, 2] == pytest.approx(np.sqrt(91))
    musk1, musk2 = MetaVector(47, 45, 166, 476, 2, 40), MetaVector(39, 63, 166, 6598, 1, 1044)
    raw = d_meta(np.array([musk1, musk2], dtype=float), ["m1", "m2"])
    assert raw.values[0, 1] == pytest.approx(np.linalg.norm([8, -18, 0, -6122, 1, -1004]))
    assert raw.values[0, 1] == pytest.approx(6203.8, abs=0.05)


def test_correlations():
    rng = np.random.default_rng(4)
    a = rng.normal(size=30)
    feats = np.c_[a, a, -a, rng.normal(size=30), np.full(30, 0.2)]
    c = classifier_correlations(feats)
    assert c[0, 1] == pytest.approx(1.0) and c[0, 2] == pytest.approx(-1.0)
    assert np.all(np.diag(c) == 1) and np.all(np.abs(c) <= 1)
    assert c[4, 0] == 0


def test_independent_columns_weakly_correlated():
    # with 100 rows the null sd of r is about 0.1, so |r| >= 0.3 is a 3-sigma event;
    # a fixed seed keeps the check reproducible
    feats = np.random.default_rng(5).normal(size=(100, 22))
    c = classifier_correlations(feats)
    off = c[~np.eye(22, dtype=bool)]
    assert np.mean(np.abs(off) < 0.3) > 0.99


def test_pca_cumulative_variance():
    rng = np.random.default_rng(6)
    base = rng.normal(size=(40, 1))
    rank1 = base * rng.uniform(0.5, 2, size=22)
    assert pca_cumulative_variance(rank1)[0] == pytest.approx(1.0)
    iso = rng.normal(size=(5000, 22))
    frac = pca_cumulative_variance(iso)
    assert abs(frac[0] - 1 / 22) < 0.05
    assert np.all(np.diff(frac) >= 0) and frac[-1] == pytest.approx(1.0, abs=1e-9)
    assert np.all(pca_cumulative_variance(np.ones((5, 3))) == 1.0)


def test_diversity_report():
    rng = np.random.default_rng(7)
    em = matrix([[random_curve(rng) for _ in range(5)] for _ in range(5)])
    rep = diversity_report(em)
    assert rep.features.shape == (10, 5) and rep.correlations.shape == (5, 5)
    assert rep.cumulative_variance.shape == (5,)


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    em = matrix([[random_curve(rng) for _ in range(3)] for _ in range(4)], names=list("wxyz"))
    dm = d_roc(em)
    save_distance(dm, tmp_path / "d.csv")
    back = load_distance(tmp_path / "d.csv")
    assert back.names == dm.names
    np.testing.assert_array_equal(back.values, dm.values)
    assert dumps_square(dm.names, dm.values).splitlines()[0] == "name,w,x,y,z"


def test_invalid_distance_matrix():
    with pytest.raises(ValueError):
        DistanceMatrix(["a", "b"], [[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        DistanceMatrix(["a", "b"], [[1, 1], [1, 0]])
    with pytest.raises(ValueError):
        loads_distance("name,a,b\nb,0,1\na,1,0\n")
