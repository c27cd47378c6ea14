import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gakflann.data import (
    PRESETS,
    ClusterDef,
    DataError,
    Dataset,
    SyntheticSpec,
    distance_matrix,
    feature_bounds,
    generate_synthetic,
    load_builtin,
    load_csv,
    write_csv,
)


@pytest.fixture
def iris_csv(tmp_path):
    ds = load_builtin("iris")
    path = tmp_path / "iris.csv"
    names = np.array(["Iris-setosa", "Iris-versicolor", "Iris-virginica"])
    with open(path, "w") as fh:
        fh.write("sepal_length,sepal_width,petal_length,petal_width,class\n")
        for x, y in zip(ds.patterns, ds.labels):
            fh.write(",".join(f"{v:g}" for v in x) + f",{names[y]}\n")
    return path


def brute_bounds(col):
    diffs = [abs(a - b) for a, b in itertools.combinations(col, 2)]
    nz = [d for d in diffs if d > 0]
    return (min(nz) if nz else 0.0), (max(diffs) if diffs else 0.0)


# load_csv


def test_load_iris_csv(iris_csv):
    ds = load_csv(iris_csv, has_labels=True)
    assert ds.n_patterns == 150
    assert ds.n_features == 4
    assert ds.n_classes == 3
    # string classes map to dense ints by first appearance
    assert ds.labels[0] == 0 and ds.labels[-1] == 2


def test_load_single_unlabeled_row(tmp_path):
    p = tmp_path / "one.csv"
    p.write_text("1.0,2.0\n")
    ds = load_csv(p, has_labels=False)
    assert ds.patterns.tolist() == [[1.0, 2.0]]
    assert ds.labels is None


def test_ragged_rows_name_the_row(tmp_path):
    p = tmp_path / "ragged.csv"
    p.write_text("1,2,3,4\n1,2,3,4,5\n")
    with pytest.raises(DataError, match="row 2"):
        load_csv(p, has_labels=False)


def test_non_numeric_cell_location(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2,0\n3,x,1\n")
    with pytest.raises(DataError, match="row 2, column 2"):
        load_csv(p)


@pytest.mark.parametrize("content", ["", "\n\n"])
def test_empty_file(tmp_path, content):
    p = tmp_path / "empty.csv"
    p.write_text(content)
    with pytest.raises(DataError, match="empty"):
        load_csv(p)


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="no such file"):
        load_csv(tmp_path / "nope.csv")


def test_integer_labels_kept(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("0.5,3\n0.7,1\n")
    assert load_csv(p).labels.tolist() == [3, 1]


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 4)),
           elements=st.floats(-1e6, 1e6, allow_nan=False, width=64)),
    st.booleans(),
)
def test_csv_round_trip(tmp_path_factory, X, labeled):
    y = np.arange(X.shape[0]) % 3 if labeled else None
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_csv(Dataset(X, y), path)
    back = load_csv(path, has_labels=labeled)
    np.testing.assert_allclose(back.patterns, X, rtol=0, atol=1e-12)
    if labeled:
        assert back.labels.tolist() == y.tolist()


def test_dataset_invariants():
    with pytest.raises(DataError):
        Dataset(np.array([[1.0, np.nan]]))
    with pytest.raises(DataError):
        Dataset(np.ones((3, 2)), labels=[0, 1])


# generate_synthetic


def test_syndata1_shape():
    ds = generate_synthetic(PRESETS["syndata1"])
    assert ds.patterns.shape == (1000, 2)
    assert np.bincount(ds.labels).tolist() == [500, 500]


def test_zero_variance_cluster():
    spec = SyntheticSpec((ClusterDef((1.0, 1.0), (0.0, 0.0), 3),), seed=5)
    ds = generate_synthetic(spec)
    assert ds.patterns.tolist() == [[1.0, 1.0]] * 3


def test_generator_deterministic():
    a = generate_synthetic(PRESETS["syndata5"])
    b = generate_synthetic(PRESETS["syndata5"])
    assert np.array_equal(a.patterns, b.patterns)
    assert np.array_equal(a.labels, b.labels)


def test_generator_errors():
    with pytest.raises(DataError):
        generate_synthetic(SyntheticSpec(()))
    with pytest.raises(DataError):
        generate_synthetic(SyntheticSpec((ClusterDef((), (), 3),)))
    with pytest.raises(DataError):
        generate_synthetic(SyntheticSpec((ClusterDef((0.0,), (1.0,), 0),)))


@pytest.mark.parametrize(
    "name, n, d, sizes",
    [
        ("syndata1", 1000, 2, [500, 500]),
        ("syndata2", 1000, 2, [500, 500]),
        ("syndata3", 1000, 2, [500, 500]),
        ("syndata4", 500, 8, [250, 150, 100]),
        ("syndata5", 400, 8, [150, 150, 100]),
        ("syndata6", 350, 8, [100, 150, 100]),
    ],
)
def test_preset_shapes(name, n, d, sizes):
    ds = generate_synthetic(PRESETS[name])
    assert ds.patterns.shape == (n, d)
    assert np.bincount(ds.labels).tolist() == sizes


# feature_bounds


@pytest.mark.parametrize(
    "values, lo, hi",
    [([1, 4, 9], 3, 8), ([5, 5, 5], 0, 0), ([0, 0, 10], 10, 10)],
)
def test_feature_bounds_examples(values, lo, hi):
    b = feature_bounds(Dataset(np.array(values, float).reshape(-1, 1)))
    assert b.mindist[0] == lo
    assert b.maxdist[0] == hi


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 15), st.integers(1, 3)),
              elements=st.integers(-20, 20).map(float)))
def test_feature_bounds_brute_force(X):
    b = feature_bounds(Dataset(X))
    for j in range(X.shape[1]):
        lo, hi = brute_bounds(X[:, j].tolist())
        assert b.mindist[j] == lo
        assert b.maxdist[j] == hi
        assert 0 <= b.mindist[j] <= b.maxdist[j]


def test_feature_bounds_empty():
    with pytest.raises(DataError):
        feature_bounds(Dataset(np.empty((0, 2))))


# distance_matrix


def test_distance_3_4_5():
    m = distance_matrix(Dataset(np.array([[0.0, 0.0], [3.0, 4.0]])))
    assert m.tolist() == [[0.0, 5.0], [5.0, 0.0]]


def test_distance_single_pattern():
    assert distance_matrix(Dataset(np.array([[2.0, 7.0]]))).tolist() == [[0.0]]


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 20), st.integers(1, 4)),
              elements=st.floats(-100, 100, allow_nan=False)))
def test_distance_metric_properties(X):
    m = distance_matrix(Dataset(X))
    assert np.all(np.diag(m) == 0)
    np.testing.assert_array_equal(m, m.T)
    n = len(X)
    for i, j, k in itertools.product(range(n), repeat=3):
        assert m[i, j] <= m[i, k] + m[k, j] + 1e-9
