import os

import numpy as np
import pytest

from milchar.data import (
    Bag,
    DatasetFormatError,
    MetaVector,
    MilDataset,
    dumps_dataset,
    load_dataset,
    loads_dataset,
    meta_vector,
    normalize_meta,
    save_dataset,
)

from conftest import make_dataset

TWO_BAGS = "bag_id,label,f1,f2\na,1,0.5,1.5\na,1,2.0,-1.0\nb,0,3.0,4.0\n"


def test_load_two_bags(tmp_path):
    p = tmp_path / "two.csv"
    p.write_text(TWO_BAGS)
    ds = load_dataset(p)
    assert ds.name == "two"
    assert ds.feature_dim == 2
    assert [b.bag_id for b in ds.bags] == ["a", "b"]
    assert ds.bags[0].instances.shape == (2, 2)
    assert ds.labels.tolist() == [1, 0]


def test_inconsistent_bag_label():
    text = "bag_id,label,f1\na,1,0.0\na,0,1.0\nb,0,2.0\n"
    with pytest.raises(DatasetFormatError, match="inconsistent bag label"):
        loads_dataset(text, "x")


@pytest.mark.parametrize("text, msg", [
    ("", "empty"),
    ("bag_id,label,f1\na,2,0.0\nb,0,1.0\n", "label"),
    ("bag_id,label,f1\na,1,nan\nb,0,1.0\n", "finite"),
    ("bag_id,label,f1\na,1,0.0,1.0\nb,0,1.0\n", "line 2"),
    ("bag_id,label,f1\na,1,0.0\nb,1,1.0\n", "negative"),
])
def test_format_errors(text, msg):
    with pytest.raises(DatasetFormatError, match=msg):
        loads_dataset(text, "x")


def test_roundtrip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    groups = [(f"g{i}", i % 2, rng.normal(size=(i + 1, 3)) * 10 ** rng.uniform(-8, 8))
              for i in range(5)]
    ds = make_dataset("rt", groups, feature_dim=3)
    save_dataset(ds, tmp_path / "rt.csv")
    back = load_dataset(tmp_path / "rt.csv")
    assert back == ds
    for a, b in zip(ds.bags, back.bags):
        assert a.instances.tobytes() == b.instances.tobytes()


def test_file_rows_equal_instances_plus_header(gaussian1):
    text = dumps_dataset(gaussian1)
    assert len(text.splitlines()) == gaussian1.n_instances + 1


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores file permissions")
def test_save_to_readonly_path(tmp_path, tiny):
    d = tmp_path / "ro"
    d.mkdir()
    d.chmod(0o500)
    with pytest.raises(OSError):
        save_dataset(tiny, d / "x.csv")


def test_save_to_missing_directory(tmp_path, tiny):
    with pytest.raises(OSError):
        save_dataset(tiny, tmp_path / "nope" / "x.csv")


def test_bag_invariants():
    with pytest.raises(ValueError):
        Bag("a", np.empty((0, 2)), 1)
    with pytest.raises(ValueError):
        Bag("a", np.array([[np.inf, 0.0]]), 1)
    with pytest.raises(ValueError):
        Bag("a,b", np.zeros((1, 2)), 1)
    b = Bag("a", np.zeros((1, 2)), 1)
    with pytest.raises(ValueError):
        b.instances[0, 0] = 1.0


def test_dataset_invariants():
    a = Bag("a", np.zeros((1, 2)), 1)
    with pytest.raises(ValueError):
        MilDataset("x", (a, Bag("a", np.zeros((1, 2)), 0)), 2)
    with pytest.raises(ValueError):
        MilDataset("x", (a, Bag("b", np.zeros((1, 2)), 1)), 2)
    with pytest.raises(ValueError):
        MilDataset("x", (a, Bag("b", np.zeros((1, 3)), 0)), 2)


def test_meta_vector_counts():
    ds = make_dataset("m", [("p", 1, [[1, 2, 3]]), ("n", 0, [[4, 5, 6]])], feature_dim=3)
    assert meta_vector(ds) == MetaVector(1, 1, 3, 2, 1, 1)


def test_meta_vector_generated(gaussian1):
    m = meta_vector(gaussian1)
    assert (m.n_pos_bags, m.n_neg_bags, m.n_features) == (50, 50, 2)
    assert m.n_total_instances == gaussian1.n_instances
    assert 5 <= m.min_bag_size <= m.max_bag_size <= 9


def test_normalize_two_points():
    # sample std (n - 1): deviations of +-1 from the mean 2 give std sqrt(2)
    z = normalize_meta([MetaVector(*[1] * 6), MetaVector(*[3] * 6)])
    np.testing.assert_allclose(z, [[-np.sqrt(0.5)] * 6, [np.sqrt(0.5)] * 6], rtol=1e-15)
    np.testing.assert_allclose(z.std(axis=0, ddof=1), 1.0)


def test_normalize_constant_column_and_centering():
    rng = np.random.default_rng(5)
    metas = [MetaVector(int(a), int(b), 7, int(c), 1, int(d))
             for a, b, c, d in rng.integers(1, 1000, size=(9, 4))]
    z = normalize_meta(metas)
    np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
    assert np.all(z[:, 2] == 0) and np.all(z[:, 4] == 0)
    np.testing.assert_allclose(z[:, [0, 1, 3, 5]].std(axis=0, ddof=1), 1.0)


def test_normalize_needs_two():
    with pytest.raises(ValueError):
        normalize_meta([MetaVector(1, 1, 1, 2, 1, 1)])
