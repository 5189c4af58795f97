"""The compiled kernels against the numpy reference implementation."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmt_lab import _kernels_py, kernels

compiled = pytest.importorskip("rmt_lab._kernels", reason="compiled extension not built")

IMPLS = [_kernels_py, compiled]


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def test_dispatcher_reports_backend():
    assert kernels.BACKEND in ("cython", "python")


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rows=st.integers(1, 6), n=st.integers(1, 9), cells=st.integers(1, 7))
def test_interval_counts_agree(seed, rows, n, cells):
    rng = np.random.default_rng(seed)
    eigs = np.round(rng.uniform(-2, 2, (rows, n)), 1)  # rounding puts many values on edges
    eigs[0, 0] = np.nan
    edges = np.round(np.sort(rng.uniform(-2, 2, cells + 1)), 1)
    a, b = (impl.interval_counts(_f64(eigs), _f64(edges)) for impl in IMPLS)
    np.testing.assert_array_equal(a, b)
    direct = np.array([[np.sum((r >= lo) & ((r < hi) | ((j == cells - 1) & (r == hi))))
                        for j, (lo, hi) in enumerate(zip(edges[:-1], edges[1:]))] for r in eigs])
    np.testing.assert_array_equal(a, direct)


def test_interval_counts_last_cell_closed():
    for impl in IMPLS:
        out = impl.interval_counts(_f64([[0.0, 1.0, 2.0]]), _f64([0.0, 1.0, 2.0]))
        np.testing.assert_array_equal(out, [[1, 2]])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rows=st.integers(1, 6), n=st.integers(1, 9), weighted=st.booleans())
def test_resolvent_stats_agree(seed, rows, n, weighted):
    rng = np.random.default_rng(seed)
    eigs = rng.standard_normal((rows, n))
    eigs[0, 0] = 0.0  # one singular row
    w = rng.uniform(0, 1, (rows, n)) if weighted else None
    ref = _kernels_py.resolvent_stats(_f64(eigs), None if w is None else _f64(w), 1e-13)
    got = compiled.resolvent_stats(_f64(eigs), None if w is None else _f64(w), 1e-13)
    for x, y in zip(ref, got):
        np.testing.assert_allclose(np.asarray(x, dtype=float), np.asarray(y, dtype=float), rtol=1e-13)
    assert ref[3][0] and np.isinf(ref[1][0])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), size=st.integers(0, 50), upper=st.booleans())
def test_tail_counts_agree(seed, size, upper):
    rng = np.random.default_rng(seed)
    v = np.round(rng.exponential(1.0, size), 1)
    if size:
        v[0] = np.nan
        v[-1] = np.inf
    t = np.array([0.0, 0.5, 1.0, 2.0])
    a, b = (impl.tail_counts(_f64(v), _f64(t), upper) for impl in IMPLS)
    np.testing.assert_array_equal(a, b)
    finite = v[~np.isnan(v)]
    direct = [np.sum(finite >= x) if upper else np.sum(finite <= x) for x in t]
    np.testing.assert_array_equal(a, direct)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 5), a=st.floats(-3, 3))
def test_quadratic_ratio_agree(seed, m, a):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(m)
    b = rng.standard_normal(m)
    g = rng.standard_normal((30, m))
    x, y = (impl.quadratic_ratio(_f64(e), _f64(b), float(a), _f64(g)) for impl in IMPLS)
    np.testing.assert_allclose(x, y, rtol=1e-12)
    direct = np.linalg.norm(e * (g + b), axis=1) / np.abs(((g + b) ** 2) @ e - a)
    np.testing.assert_allclose(x, direct, rtol=1e-12)


def test_quadratic_ratio_zero_denominator():
    for impl in IMPLS:
        out = impl.quadratic_ratio(_f64([1.0]), _f64([0.0]), 1.0, _f64([[1.0]]))
        assert np.isinf(out[0])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), size=st.integers(1, 200), xi=st.floats(-5, 5), eta=st.floats(-5, 5))
def test_phase_mean_agree(seed, size, xi, eta):
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal(size), rng.standard_normal(size)
    a, b = (impl.phase_mean(_f64(x), _f64(y), xi, eta) for impl in IMPLS)
    assert abs(a - b) <= 1e-12
    assert abs(a - np.mean(np.exp(1j * (xi * x + eta * y)))) <= 1e-12
