import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from css_skyline import fixtures as F
from css_skyline.causal_graph import graph_from_edges
from css_skyline.tabular import (
    DataError, Dataset, GaussianStats, augment_gaussian, correlation_matrix, generate_sem,
    load_csv, normalize_zscore, write_csv,
)


def test_load_csv_basic(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x,y\n1,2\n3,4\n5,6\n")
    ds = load_csv(p)
    assert ds.row_count == 3
    assert ds.attribute_names == ("x", "y")
    np.testing.assert_array_equal(ds.column("y"), [2, 4, 6])


@pytest.mark.parametrize("body,needle", [
    ("x,y\n1,2\n3,NaN\n", ":3:"),
    ("x,y\n1,2\n3\n", "expected 2 fields"),
    ("x,y\n1,abc\n", "non-numeric"),
    ("x,x\n1,2\n", "duplicate header"),
    ("x,y\n1,inf\n", "non-finite"),
])
def test_load_csv_errors(tmp_path, body, needle):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(DataError, match=needle):
        load_csv(p)


def test_load_csv_nan_names_cell(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y\n1,2\n3,NaN\n")
    with pytest.raises(DataError) as exc:
        load_csv(p)
    assert "'y'" in str(exc.value) and ":3:" in str(exc.value)


def test_load_csv_missing(tmp_path):
    with pytest.raises(DataError, match="no such file"):
        load_csv(tmp_path / "nope.csv")


def test_csv_round_trip(tmp_path, rng):
    ds = Dataset.from_array(["a", "b"], rng.standard_normal((50, 2)))
    write_csv(ds, tmp_path / "o.csv")
    back = load_csv(tmp_path / "o.csv")
    np.testing.assert_array_equal(back.matrix(), ds.matrix())


def test_dataset_invariants():
    with pytest.raises(DataError):
        Dataset(("a", "a"), {"a": [1.0]})
    with pytest.raises(DataError):
        Dataset(("a", "b"), {"a": [1.0], "b": [1.0, 2.0]})
    with pytest.raises(DataError):
        Dataset(("a",), {"a": [np.nan]})
    ds = Dataset(("a",), {"a": [1.0, 2.0]})
    with pytest.raises(ValueError):
        ds.column("a")[0] = 5.0


def test_zscore_small_and_constant():
    ds = Dataset(("a", "c", "k"), {"a": [1.0, 2.0, 3.0], "c": [5.0, 5.0, 5.0], "k": [7.0, 8.0, 9.0]})
    out = normalize_zscore(ds, ["a", "c"])
    assert abs(out.column("a").mean()) < 1e-15
    assert out.column("a").var(ddof=1) == pytest.approx(1.0)
    np.testing.assert_array_equal(out.column("c"), [0, 0, 0])
    assert out.metadata["zero_variance"] == ("c",)
    np.testing.assert_array_equal(out.column("k"), [7, 8, 9])
    with pytest.raises(DataError):
        normalize_zscore(ds, ["missing"])


def test_zscore_sem_column_mean():
    ds = generate_sem(F.negative_fork(), 10_000, 3)
    out = normalize_zscore(ds, ["X"])
    x = out.column("X")
    assert abs(x.mean()) < 1e-9
    assert abs(x.var(ddof=1) - 1.0) < 1e-9


@given(arrays(np.float64, st.integers(3, 40), elements=st.floats(-1e3, 1e3)))
def test_zscore_idempotent(col):
    if np.ptp(col) < 1e-6:
        return
    ds = Dataset(("a",), {"a": col})
    once = normalize_zscore(ds, ["a"])
    twice = normalize_zscore(once, ["a"])
    np.testing.assert_allclose(twice.column("a"), once.column("a"), atol=1e-12)


@pytest.mark.parametrize("w", [1.0, -1.0, 0.5, -0.5])
def test_sem_single_edge_correlation(w):
    g = graph_from_edges([("A", "X", w)])
    n = 100_000
    ds = generate_sem(g, n, 11)
    r = np.corrcoef(ds.column("A"), ds.column("X"))[0, 1]
    assert abs(r - w / math.sqrt(w * w + 1)) < 3 / math.sqrt(n)


def test_sem_fork_correlation():
    ds = generate_sem(F.negative_fork(), 100_000, 5)
    r = correlation_matrix(ds, ["X", "Y"])["X", "Y"]
    assert r == pytest.approx(-0.5, abs=0.02)


def test_sem_weaker_edge_weaker_correlation():
    strong = generate_sem(graph_from_edges([("A", "X", 1.0)]), 50_000, 1)
    weak = generate_sem(graph_from_edges([("A", "X", 0.5)]), 50_000, 1)
    cs = np.corrcoef(strong.column("A"), strong.column("X"))[0, 1]
    cw = np.corrcoef(weak.column("A"), weak.column("X"))[0, 1]
    assert cw < cs


def test_sem_deterministic_and_noise_override():
    g = F.misaligned()
    a = generate_sem(g, 1000, 9)
    b = generate_sem(g, 1000, 9)
    np.testing.assert_array_equal(a.matrix(), b.matrix())
    big = generate_sem(g, 200_000, 2)
    # X = C + e with var(e) = 0.1
    assert np.var(big.column("X") - big.column("C")) == pytest.approx(0.1, rel=0.02)


def test_augment():
    base = generate_sem(F.negative_fork(), 500, 0)
    assert augment_gaussian(base, 500, 0.1, 1) is base
    dup = augment_gaussian(base, 1000, 0.0, 1)
    m = base.matrix()
    rows = {tuple(r) for r in m}
    assert all(tuple(r) in rows for r in dup.matrix()[500:])
    np.testing.assert_array_equal(dup.matrix()[:500], m)
    noisy = augment_gaussian(base, 5000, 0.05, 2)
    drift = np.abs(noisy.matrix().mean(axis=0) - m.mean(axis=0)) / m.std(axis=0, ddof=1)
    assert np.all(drift < 0.1)
    with pytest.raises(DataError):
        augment_gaussian(base, 10, 0.1, 0)
    with pytest.raises(DataError):
        augment_gaussian(Dataset(("a",), {"a": []}), 10, 0.1, 0)


def test_augment_mean_drift_small_at_scale():
    base = generate_sem(F.housing(), 4177, 0)
    out = augment_gaussian(base, 40_000, 0.05, 3)
    m0 = base.matrix()
    drift = np.abs(out.matrix().mean(axis=0) - m0.mean(axis=0)) / m0.std(axis=0, ddof=1)
    assert np.all(drift < 0.03)


def test_correlation_matrix():
    ds = Dataset(("x", "y", "c"), {"x": [1.0, 2.0, 3.0], "y": [3.0, 2.0, 1.0], "c": [4.0, 4.0, 4.0]})
    cm = correlation_matrix(ds, ["x", "y", "c"])
    assert cm["x", "x"] == 1.0
    assert cm["x", "y"] == pytest.approx(-1.0)
    assert "c" in cm.undefined and math.isnan(cm["x", "c"])
    with pytest.raises(DataError):
        correlation_matrix(ds, ["zz"])


@given(arrays(np.float64, (30, 4), elements=st.floats(-100, 100)))
def test_correlation_matrix_symmetric_unit_diagonal(m):
    ds = Dataset.from_array(list("abcd"), m)
    cm = correlation_matrix(ds, list("abcd"))
    v = cm.values
    ok = ~np.isnan(v)
    assert np.array_equal(ok, ok.T)
    np.testing.assert_array_equal(v[ok], v.T[ok])
    for i, a in enumerate("abcd"):
        if a not in cm.undefined:
            assert v[i, i] == 1.0
    assert np.all(np.abs(v[ok]) <= 1.0)


def test_gaussian_stats():
    ds = generate_sem(F.negative_fork(), 20_000, 0)
    gs = GaussianStats.from_dataset(ds, ["A", "X", "Y"])
    assert np.all(gs.variances >= 0)
    np.testing.assert_allclose(gs.covariance, gs.covariance.T)
    assert gs.cov("X", "Y") == pytest.approx(-1.0, abs=0.05)
