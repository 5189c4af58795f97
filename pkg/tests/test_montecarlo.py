import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import e1
from rmt_lab.ensembles import EnsembleSpec, ScalarIdentity, Zero
from rmt_lab.errors import InvalidInput
from rmt_lab.montecarlo import (
    THREADS_ENV,
    MonteCarloConfig,
    TailCurve,
    clopper_pearson,
    count_samples,
    factorial_products,
    fit_power_law,
    mc_counting_tail,
    mc_dos,
    mc_factorial_moment,
    mc_tail_fixed_vector,
    mc_tail_norms,
    partition_edges,
    wegner_constant,
)


# -- config ----------------------------------------------------------------------------------

def test_config_validation(monkeypatch):
    with pytest.raises(InvalidInput):
        MonteCarloConfig(0)
    with pytest.raises(InvalidInput):
        MonteCarloConfig(10, seed=-1)
    with pytest.raises(InvalidInput):
        MonteCarloConfig(10, max_workers=0)
    with pytest.raises(InvalidInput):
        MonteCarloConfig(10, ci_level=1.0)
    monkeypatch.setenv(THREADS_ENV, "3")
    assert MonteCarloConfig(10).max_workers == 3
    monkeypatch.setenv(THREADS_ENV, "garbage")
    assert MonteCarloConfig(10).max_workers == 1
    c = MonteCarloConfig(10, 1, 2)
    assert c.with_seed(5).seed == 5 and c.with_samples(20).n_samples == 20 and c.with_seed(5).max_workers == 2


# -- Clopper-Pearson -------------------------------------------------------------------------

def test_clopper_pearson_boundaries():
    assert clopper_pearson(0, 100)[0] == 0.0
    assert clopper_pearson(100, 100)[1] == 1.0


def test_clopper_pearson_oracle(oracles):
    np.testing.assert_allclose(clopper_pearson(5, 50, 0.95), oracles["clopper_pearson_5_50"], atol=1e-8)
    np.testing.assert_allclose(clopper_pearson(17, 1000, 0.99), oracles["clopper_pearson_17_1000_99"], atol=1e-8)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 500), frac=st.floats(0, 1), level=st.floats(0.5, 0.999))
def test_clopper_pearson_contains_estimate(n, frac, level):
    k = int(round(frac * n))
    lo, hi = clopper_pearson(k, n, level)
    assert 0.0 <= lo <= k / n <= hi <= 1.0
    lo2, hi2 = clopper_pearson(k, n, min(level + 0.0005, 0.9999))
    assert lo2 <= lo + 1e-12 and hi2 >= hi - 1e-12


def test_clopper_pearson_rejects_bad_counts():
    with pytest.raises(InvalidInput):
        clopper_pearson(5, 4)


# -- power-law fit ---------------------------------------------------------------------------

def test_fit_exact_inverse():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert fit_power_law(x, 1 / x).exponent == pytest.approx(-1.0, abs=1e-12)


def test_fit_constant():
    assert fit_power_law([1.0, 3.0, 9.0], [2.0, 2.0, 2.0]).exponent == pytest.approx(0.0, abs=1e-12)


def test_fit_noisy_square_root():
    rng = np.random.default_rng(1)
    x = np.geomspace(1, 1000, 12)
    y = x**-0.5 * (1 + 0.01 * rng.standard_normal(x.size))
    assert -0.55 <= fit_power_law(x, y).exponent <= -0.45


@pytest.mark.parametrize("x, y", [([1, 2], [1, 2]), ([1, 2, 3], [1, 0, 2]), ([1, 1, 1], [1, 2, 3])])
def test_fit_rejects_degenerate(x, y):
    with pytest.raises(InvalidInput):
        fit_power_law(x, y)


# -- tail curves -----------------------------------------------------------------------------

def test_tail_curve_fields():
    c = TailCurve("x", [1.0, 2.0], [10, 0], 100, 3)
    np.testing.assert_allclose(c.p_hat, [0.1, 0.0])
    assert c.ci_lo[1] == 0.0 and c.max_scaled("p_hat") == pytest.approx(0.1)
    assert c.max_ratio("p_hat") == pytest.approx(0.1)
    rows = list(c.csv_rows())
    assert rows[0][0] == "x" and rows[0][1] == "1.0" and rows[0][5:] == (100, 3)
    assert c.decay_fit() is None


def test_fixed_vector_scale_invariance(cfg):
    spec = EnsembleSpec("goe", 8)
    a = mc_tail_fixed_vector(np.zeros((8, 8)), spec, e1(8), [1, 2, 4], cfg(500))
    b = mc_tail_fixed_vector(np.zeros((8, 8)), spec, 2 * e1(8), [1, 2, 4], cfg(500))
    np.testing.assert_array_equal(a.counts, b.counts)


def test_fixed_vector_far_spectrum(cfg):
    curve = mc_tail_fixed_vector(1e6 * np.eye(16), EnsembleSpec("goe", 16), e1(16), [1.0], cfg(300))
    assert curve.p_hat[0] == 0.0


def test_fixed_vector_rejects_bad_thresholds(cfg):
    with pytest.raises(InvalidInput):
        mc_tail_fixed_vector(np.zeros((4, 4)), EnsembleSpec("goe", 4), e1(4), [0.5], cfg(10))
    with pytest.raises(InvalidInput):
        mc_tail_fixed_vector(np.zeros((4, 4)), EnsembleSpec("goe", 4), e1(3), [1.0], cfg(10))


def test_fixed_vector_bound_gue_64(cfg):
    curve = mc_tail_fixed_vector(np.zeros((64, 64)), EnsembleSpec("gue", 64), e1(64), [2, 4, 8, 16], cfg(20_000))
    assert curve.max_scaled("ci_hi") <= 5.0


def test_norm_tails(cfg):
    t = [1, 2, 4, 8, 16]
    frob, op = mc_tail_norms(np.zeros((64, 64)), EnsembleSpec("goe", 64), t, cfg(4000))
    assert np.all(op.p_hat <= frob.p_hat)
    assert np.all(np.diff(frob.p_hat) <= 0) and np.all(np.diff(op.p_hat) <= 0)
    assert max(frob.max_scaled(), op.max_scaled()) <= 5.0


@pytest.mark.parametrize("workers", [2, 5])
def test_results_do_not_depend_on_workers(cfg, workers):
    spec = EnsembleSpec("gue", 12)
    base = ScalarIdentity(0.3).build(12)
    a = mc_tail_norms(base, spec, [1, 2], cfg(700, workers=1))
    b = mc_tail_norms(base, spec, [1, 2], cfg(700, workers=workers))
    for x, y in zip(a, b):
        assert x.to_dict() == y.to_dict()


# -- density of states -----------------------------------------------------------------------

def test_dos_far_interval(cfg):
    dos = mc_dos(np.zeros((32, 32)), EnsembleSpec("goe", 32), [100.0, 101.0], cfg(200))
    assert dos.density[0] == 0.0


def test_dos_mass(cfg):
    dos = mc_dos(np.zeros((64, 64)), EnsembleSpec("goe", 64), partition_edges(-3, 3, 60), cfg(500))
    assert 0.99 * 64 <= dos.mean_count.sum() <= 64
    assert np.all(dos.mean_count >= 0)
    assert wegner_constant(dos) == dos.sup_density()
    # semicircle: density near 0 is about 1/pi
    centre = dos.density[29:31].mean()
    assert abs(centre * math.pi - 1) < 0.1


def test_partition_edges():
    np.testing.assert_allclose(partition_edges(-1, 1, 4), [-1, -0.5, 0, 0.5, 1])
    with pytest.raises(InvalidInput):
        partition_edges(1, -1, 4)
    with pytest.raises(InvalidInput):
        partition_edges(0, 1, 0)


def test_counting_tail_trivial_cases(cfg):
    spec = EnsembleSpec("goe", 8)
    assert mc_counting_tail(np.zeros((8, 8)), spec, [-5, 5], 9, cfg(100)).p_hat[0] == 0.0
    assert mc_counting_tail(np.zeros((8, 8)), spec, [0.3, 0.3], 1, cfg(100)).p_hat[0] == 0.0
    assert mc_counting_tail(np.zeros((8, 8)), spec, [-5, 5], 8, cfg(100)).p_hat[0] == 1.0


def test_counting_tail_quadratic_shape(cfg):
    n = 64
    spec = EnsembleSpec("gue", n)
    base = np.zeros((n, n))
    c = cfg(4000)
    widths = [2 / n, 4 / n, 8 / n]
    c_emp = max(mc_factorial_moment(base, spec, [[-w / 2, w / 2]], c).estimate / (w * n) for w in widths)
    for w in widths:
        curve = mc_counting_tail(base, spec, [-w / 2, w / 2], 2, c)
        assert curve.p_hat[0] <= (c_emp * w * n) ** 2 / 2


def test_factorial_moment_first_order_matches_dos(cfg):
    spec = EnsembleSpec("goe", 16)
    base = Zero().build(16)
    fm = mc_factorial_moment(base, spec, [[-0.3, 0.4]], cfg(300))
    dos = mc_dos(base, spec, [-0.3, 0.4], cfg(300))
    assert fm.estimate == pytest.approx(dos.mean_count[0], rel=1e-14)
    assert fm.k == 1


def test_factorial_moment_clamp(cfg):
    spec = EnsembleSpec("goe", 16)
    fm = mc_factorial_moment(np.zeros((16, 16)), spec, [[-1, 1], [0.2, 0.2]], cfg(300))
    assert fm.estimate == 0.0


def test_factorial_products():
    counts = np.array([[3, 2], [1, 1], [0, 5], [2, 3]])
    np.testing.assert_array_equal(factorial_products(counts), [3, 0, 0, 4])


def test_factorial_moment_disjoint_bound(cfg):
    n = 64
    spec = EnsembleSpec("goe", n)
    base = np.zeros((n, n))
    w = 4 / n
    c = cfg(4000)
    c_emp = mc_factorial_moment(base, spec, [[-w / 2, w / 2]], c).estimate / (w * n)
    fm = mc_factorial_moment(base, spec, [[-w - 0.5 / n, -0.5 / n], [0.5 / n, w + 0.5 / n]], c)
    assert fm.estimate <= (10 * c_emp * w * n) ** 2
    lo, hi = fm.ci
    assert lo <= fm.estimate <= hi


def test_count_samples_shape(cfg):
    counts = count_samples(np.zeros((6, 6)), EnsembleSpec("goe", 6), partition_edges(-3, 3, 3), cfg(25))
    assert counts.shape == (25, 3) and counts.dtype == np.int64
