import math

import numpy as np
import pytest

from rmt_lab.ensembles import (
    CounterexampleDiag,
    Ensemble,
    EnsembleSpec,
    FromFile,
    ProjComplement,
    RandomDiagonal,
    ScalarIdentity,
    Zero,
    build_base,
    parse_base,
    sample_deformed,
    sample_ensemble,
    sample_perturbations,
    sample_wigner_bernoulli,
    uniform_sphere,
)
from rmt_lab.errors import InvalidInput
from rmt_lab.linalg import write_hmat
from rmt_lab.rng import MAX_U64, RngStream, as_generator, derive_seed

DRAWS = 100_000


def _var_within(samples, target, sd_factor):
    """Sample variance within 3 sd of ``target`` where sd = target * sd_factor / sqrt(m)."""
    m = samples.size
    var = samples.var(ddof=1) if np.isrealobj(samples) else np.mean(np.abs(samples - samples.mean()) ** 2) * m / (m - 1)
    return abs(var - target) <= 3 * target * sd_factor / math.sqrt(m - 1), var


# -- rng -------------------------------------------------------------------------------------

def test_stream_is_reproducible():
    a = RngStream(7, 3).generator().standard_normal(5)
    b = RngStream(7, 3).generator().standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, RngStream(7, 4).generator().standard_normal(5))
    assert not np.array_equal(a, RngStream(8, 3).generator().standard_normal(5))


@pytest.mark.parametrize("seed", [-1, MAX_U64 + 1])
def test_stream_rejects_out_of_range(seed):
    with pytest.raises(ValueError):
        RngStream(seed)


def test_stream_rejects_non_integers():
    with pytest.raises(TypeError):
        RngStream(1.5)
    with pytest.raises(TypeError):
        as_generator("seed")


def test_extreme_keys():
    RngStream(MAX_U64, MAX_U64).generator().standard_normal(2)
    assert RngStream(5).substream(9) == RngStream(5, 9)


def test_derive_seed():
    assert derive_seed(7, "a", 1) == derive_seed(7, "a", 1)
    assert derive_seed(7, "a", 1) != derive_seed(7, "a", 2)
    assert derive_seed(7, "a") != derive_seed(8, "a")
    assert 0 <= derive_seed(MAX_U64, "x") <= MAX_U64


# -- samplers --------------------------------------------------------------------------------

def test_goe_n1_variance():
    v = sample_perturbations("goe", 1, 3, 0, DRAWS)[:, 0, 0]
    ok, var = _var_within(v, 2.0, math.sqrt(2))
    assert ok, var


def test_goe_n4_moments():
    v = sample_perturbations("goe", 4, 4, 0, DRAWS)
    assert _var_within(v[:, 0, 1], 0.25, math.sqrt(2))[0]
    assert _var_within(np.diagonal(v, axis1=1, axis2=2).ravel(), 0.5, math.sqrt(2))[0]


def test_gue_n4_moments():
    v = sample_perturbations("gue", 4, 5, 0, DRAWS)
    diag = np.diagonal(v, axis1=1, axis2=2)
    assert np.all(diag.imag == 0)
    assert _var_within(diag.real.ravel(), 0.25, math.sqrt(2))[0]
    # |V_12|^2 is exponential with mean 1/n, so its sample mean has sd (1/n)/sqrt(m)
    off = np.abs(v[:, 0, 1]) ** 2
    assert abs(off.mean() - 0.25) <= 3 * 0.25 / math.sqrt(off.size)


def test_bernoulli_entries():
    v = sample_perturbations("bernoulli", 6, 6, 0, DRAWS // 10)
    np.testing.assert_array_equal(np.abs(v), np.full_like(v, 1 / math.sqrt(6)))
    np.testing.assert_array_equal(v, np.swapaxes(v, 1, 2))
    vals = v[:, np.triu_indices(6)[0], np.triu_indices(6)[1]].ravel() * math.sqrt(6)
    assert abs(vals.mean()) <= 3 / math.sqrt(vals.size)
    h = sample_wigner_bernoulli(3, RngStream(1))
    assert h.field == "real"


@pytest.mark.parametrize("kind", ["goe", "gue", "bernoulli"])
def test_exact_symmetry(kind):
    h = sample_ensemble(kind, 9, RngStream(2))
    np.testing.assert_array_equal(h.data, h.data.conj().T)


@pytest.mark.parametrize("kind", ["goe", "gue", "bernoulli"])
def test_perturbation_slices_agree(kind):
    full = sample_perturbations(kind, 5, 12, 0, 10)
    parts = np.concatenate([sample_perturbations(kind, 5, 12, 0, 4), sample_perturbations(kind, 5, 12, 4, 10)])
    np.testing.assert_array_equal(full, parts)
    single = sample_ensemble(kind, 5, RngStream(12, 6))
    np.testing.assert_array_equal(full[6], single.data)


def test_semicircle_edge():
    lam = np.linalg.eigvalsh(sample_ensemble("goe", 400, RngStream(1)).data)
    assert -2.2 < lam.min() < -1.8 and 1.8 < lam.max() < 2.2


def test_ensemble_spec_validation():
    with pytest.raises(InvalidInput):
        EnsembleSpec("poisson", 4)
    with pytest.raises(InvalidInput):
        EnsembleSpec("goe", 0)
    with pytest.raises(InvalidInput):
        EnsembleSpec("goe", 4, -1.0)
    assert EnsembleSpec("gue", 3).field == "complex"
    assert EnsembleSpec(Ensemble.GOE, 3).kind is Ensemble.GOE


# -- deformation -----------------------------------------------------------------------------

def test_lambda_zero_gives_base():
    base = np.diag([1.0, 2.0, 3.0])
    h = sample_deformed(base, EnsembleSpec("goe", 3, 0.0), RngStream(1))
    np.testing.assert_array_equal(h.data, base)


def test_zero_base_is_pure_draw():
    h = sample_deformed(np.zeros((4, 4)), EnsembleSpec("gue", 4), RngStream(2))
    np.testing.assert_array_equal(h.data, sample_ensemble("gue", 4, RngStream(2)).data)


def test_linearity_in_lambda():
    base = RandomDiagonal(0, 1, 3).build(6).data
    h1 = sample_deformed(base, EnsembleSpec("goe", 6, 1.0), RngStream(4))
    h2 = sample_deformed(base, EnsembleSpec("goe", 6, 2.0), RngStream(4))
    np.testing.assert_allclose(h2.data, base + 2 * (h1.data - base), atol=1e-15)


def test_deformed_field_rules():
    h = sample_deformed(np.eye(3), EnsembleSpec("gue", 3), RngStream(1))
    assert h.field == "complex"
    with pytest.raises(InvalidInput):
        sample_deformed(np.eye(3) * (1 + 0j) + np.array([[0, 1j, 0], [-1j, 0, 0], [0, 0, 0]]),
                        EnsembleSpec("goe", 3), RngStream(1))
    with pytest.raises(InvalidInput):
        sample_deformed(np.eye(2), EnsembleSpec("goe", 3), RngStream(1))


# -- sphere ----------------------------------------------------------------------------------

def test_sphere_norm_and_second_moment():
    gen = RngStream(9).generator()
    n = 4
    first = np.empty(DRAWS)
    for i in range(DRAWS):
        phi = uniform_sphere(n, "real", gen)
        first[i] = phi[0] ** 2
        if i < 100:
            assert np.linalg.norm(phi) == pytest.approx(1.0, abs=1e-15)
    # phi_1^2 ~ Beta(1/2, 3/2): mean 1/4, variance 3/80
    assert abs(first.mean() - 1 / n) <= 3 * math.sqrt(3 / 80) / math.sqrt(DRAWS)


def test_sphere_edge_cases():
    gen = RngStream(1).generator()
    assert all(uniform_sphere(1, "real", gen)[0] in (-1.0, 1.0) for _ in range(20))
    z = uniform_sphere(5, "complex", gen)
    assert np.iscomplexobj(z) and np.linalg.norm(z) == pytest.approx(1.0)
    with pytest.raises(InvalidInput):
        uniform_sphere(3, "octonion", gen)


# -- base matrices ---------------------------------------------------------------------------

def test_zero_base():
    np.testing.assert_array_equal(Zero().build(5).data, np.zeros((5, 5)))


def test_proj_complement():
    d = np.diag(ProjComplement(0.1).build(100).data)
    assert d[0] == 0.0
    np.testing.assert_allclose(d[1:], 100**0.6, rtol=1e-15)


def test_counterexample_diag():
    np.testing.assert_allclose(CounterexampleDiag(1e3).build(4).data, np.diag([1, 1e3, 1e3, 1e3]) / 2)


def test_scalar_and_random_diagonal():
    np.testing.assert_array_equal(ScalarIdentity(0.5).build(3).data, 0.5 * np.eye(3))
    d = np.diag(RandomDiagonal(0.0, 1.0, 5).build(50).data)
    assert np.all((d >= 0) & (d < 1))
    np.testing.assert_array_equal(d, np.diag(RandomDiagonal(0.0, 1.0, 5).build(50).data))


@pytest.mark.parametrize(
    "text, expected",
    [("zero", Zero()), ("scalar:0.5", ScalarIdentity(0.5)), ("proj:0.2", ProjComplement(0.2)),
     ("proj", ProjComplement(0.1)), ("counterexample:1e6", CounterexampleDiag(1e6)),
     ("randdiag:0,2,3", RandomDiagonal(0.0, 2.0, 3)), ("randdiag", RandomDiagonal())],
)
def test_parse_base(text, expected):
    spec = parse_base(text)
    assert spec == expected
    assert parse_base(spec.label()) == spec


@pytest.mark.parametrize("text", ["", "zero:1", "scalar:x", "file:", "unknown"])
def test_parse_base_errors(text):
    with pytest.raises(InvalidInput):
        parse_base(text)


def test_from_file(tmp_path):
    path = tmp_path / "a.hmat"
    write_hmat(path, np.diag([1.0, -1.0, 2.0]))
    spec = parse_base(f"file:{path}")
    assert isinstance(spec, FromFile)
    np.testing.assert_array_equal(build_base(spec, 3).data, np.diag([1.0, -1.0, 2.0]))
    with pytest.raises(InvalidInput):
        build_base(spec, 4)
