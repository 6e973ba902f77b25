import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ghostsmell.dataset import (
    DataError,
    Dataset,
    imbalance_ratio,
    leakage_zero_fraction,
    load_csv,
    minmax_fit_transform,
    save_csv,
    split,
)


def test_load_csv_three_rows(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("f1,f2,label\n1,2,0\n3,4,1\n5,6.5,0\n")
    d = load_csv(path)
    assert d.features.shape == (3, 2)
    assert d.labels.tolist() == [0, 1, 0]
    assert d.feature_names == ("f1", "f2")
    assert d.features[2, 1] == 6.5


def test_load_csv_bad_label_names_row(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("f1,f2,label\n1,2,0\n3,4,2\n")
    with pytest.raises(DataError, match="row 2"):
        load_csv(path)


def test_load_csv_non_numeric_names_row_and_column(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("f1,f2,label\n1,2,0\nabc,4,1\n")
    with pytest.raises(DataError, match=r"row 2, column 'f1'"):
        load_csv(path)


def test_load_csv_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "missing.csv")
    one = tmp_path / "one.csv"
    one.write_text("f1,label\n1,0\n")
    with pytest.raises(DataError, match="at least 2"):
        load_csv(one)
    nolabel = tmp_path / "nolabel.csv"
    nolabel.write_text("f1,y\n1,0\n2,1\n")
    with pytest.raises(DataError, match="label"):
        load_csv(nolabel)


def test_csv_roundtrip(tmp_path, ten_rows):
    path = tmp_path / "rt.csv"
    save_csv(ten_rows, path)
    back = load_csv(path)
    assert np.array_equal(back.features, ten_rows.features)
    assert np.array_equal(back.labels, ten_rows.labels)
    assert back.feature_names == ten_rows.feature_names


def test_dataset_invariants():
    with pytest.raises(DataError):
        Dataset(np.array([[np.nan], [1.0]]), [0, 1])
    with pytest.raises(DataError):
        Dataset(np.ones((3, 2)), [0, 1])
    with pytest.raises(DataError):
        Dataset(np.ones((1, 2)), [0])
    d = Dataset(np.ones((2, 2)), [0, 1])
    with pytest.raises(ValueError):
        d.features[0, 0] = 5.0


def test_split_stratified_counts(ten_rows):
    pair = split(ten_rows, 0.3, 42)
    # class 0: round(0.3 * 8) = 2, class 1: round(0.3 * 2) = 1
    assert len(pair.test) == 3
    assert int(pair.test.labels.sum()) == 1
    assert len(pair.train) == 7


def test_split_deterministic(ten_rows):
    a, b = split(ten_rows, 0.3, 42), split(ten_rows, 0.3, 42)
    assert np.array_equal(a.test_index, b.test_index)
    assert np.array_equal(a.train_index, b.train_index)


@pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1])
def test_split_rejects_bad_fraction(ten_rows, fraction):
    with pytest.raises(DataError):
        split(ten_rows, fraction, 0)


def test_split_rejects_single_class():
    d = Dataset(np.arange(10.0).reshape(5, 2), [0] * 5)
    with pytest.raises(DataError, match="absent"):
        split(d, 0.3, 0)


@settings(max_examples=50, deadline=None)
@given(
    n0=st.integers(2, 60),
    n1=st.integers(2, 60),
    fraction=st.floats(0.2, 0.8),
    seed=st.integers(0, 2**31),
)
def test_split_is_stratified_partition(n0, n1, fraction, seed):
    X = np.arange((n0 + n1) * 2, dtype=float).reshape(-1, 2)
    d = Dataset(X, [0] * n0 + [1] * n1)
    n_test = sum(int(np.floor(fraction * c + 0.5)) for c in (n0, n1))
    if n_test < 2 or n0 + n1 - n_test < 2:
        with pytest.raises(DataError):
            split(d, fraction, seed)
        return
    pair = split(d, fraction, seed)
    both = np.concatenate([pair.train_index, pair.test_index])
    assert sorted(both.tolist()) == list(range(n0 + n1))
    for cls, count in ((0, n0), (1, n1)):
        in_test = int((pair.test.labels == cls).sum())
        assert abs(in_test - fraction * count) <= 0.5 + 1e-9


def test_imbalance_ratio():
    assert imbalance_ratio(Dataset(np.zeros((10, 1)), [1] * 2 + [0] * 8)) == 0.2
    assert imbalance_ratio(Dataset(np.zeros((10, 1)), [1] * 5 + [0] * 5)) == 0.5
    with pytest.raises(DataError):
        imbalance_ratio(Dataset(np.zeros((4, 1)), [0] * 4))


def test_minmax_examples():
    d = Dataset(np.array([[0.0, 7.0], [5.0, 7.0], [10.0, 7.0]]), [0, 1, 0])
    scaled, params = minmax_fit_transform(d)
    assert scaled.features[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert scaled.features[:, 1].tolist() == [0.0, 0.0, 0.0]
    assert params.transform(np.array([[5.0, 7.0]]))[0, 0] == 0.5


def test_minmax_test_data_not_clipped():
    d = Dataset(np.array([[0.0], [10.0]]), [0, 1])
    _, params = minmax_fit_transform(d)
    assert params.transform(np.array([[20.0], [-10.0]])).ravel().tolist() == [2.0, -1.0]


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 20), st.integers(1, 5)),
              elements=st.floats(-1e6, 1e6)))
def test_minmax_properties(X):
    y = np.arange(X.shape[0]) % 2
    scaled, params = minmax_fit_transform(Dataset(X, y))
    assert np.all(scaled.features >= 0.0) and np.all(scaled.features <= 1.0)
    assert np.allclose(params.transform(X), scaled.features, atol=1e-9)


def test_leakage_examples():
    a = Dataset(np.array([[0.0, 0.0], [1.0, 1.0]]), [0, 1])
    b = Dataset(np.array([[5.0, 5.0], [6.0, 6.0]]), [0, 1])
    assert leakage_zero_fraction(a, b) == 0.0
    c = Dataset(np.array([[1.0, 1.0], [7.0, 7.0]]), [0, 1])
    # one shared row: 1 zero among 4 distances
    assert leakage_zero_fraction(a, c) == 25.0


def test_leakage_self_duplicate_free():
    rng = np.random.default_rng(0)
    d = Dataset(rng.normal(size=(40, 3)), np.arange(40) % 2)
    assert leakage_zero_fraction(d, d) == pytest.approx(100.0 / 40)


def test_leakage_dimension_mismatch():
    a = Dataset(np.zeros((2, 2)), [0, 1])
    b = Dataset(np.zeros((2, 3)), [0, 1])
    with pytest.raises(DataError, match="mismatch"):
        leakage_zero_fraction(a, b)
