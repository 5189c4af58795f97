import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import e1, random_hermitian
from rmt_lab.ensembles import sample_goe
from rmt_lab.errors import ConvergenceError, InvalidInput, NearSingular
from rmt_lab.linalg import (
    HermitianMatrix,
    apply_inverse,
    complex_to_real_embed,
    eigh,
    format_hmat,
    householder_vector,
    inverse_norms,
    read_hmat,
    real_to_complex_vector,
    restrict_orthogonal,
    write_hmat,
)
from rmt_lab.rng import RngStream


def test_eigh_identity():
    np.testing.assert_array_equal(eigh(np.eye(2)).eigenvalues, [1.0, 1.0])


def test_eigh_swap():
    np.testing.assert_allclose(eigh([[0.0, 1.0], [1.0, 0.0]]).eigenvalues, [-1.0, 1.0], atol=1e-15)


def test_eigh_reconstruction_goe():
    h = sample_goe(8, RngStream(3))
    spec = eigh(h)
    assert np.linalg.norm(spec.reconstruct() - h.data) <= 1e-12 * h.frobenius_norm()


def test_eigh_values_only():
    assert eigh(np.diag([3.0, 1.0]), want_vectors=False).eigenvectors is None


def test_eigh_convergence_failure(monkeypatch):
    def broken(a):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigh", broken)
    with pytest.raises(ConvergenceError):
        eigh(np.eye(3))


def test_hermitian_matrix_validation():
    with pytest.raises(InvalidInput):
        HermitianMatrix(np.zeros((2, 3)))
    with pytest.raises(InvalidInput):
        HermitianMatrix(np.array([[np.nan]]))
    h = HermitianMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
    np.testing.assert_array_equal(h.data, [[1.0, 1.0], [1.0, 1.0]])
    assert not h.data.flags.writeable
    assert h.field == "real" and h.to_complex().field == "complex"


def test_apply_inverse_diagonal():
    np.testing.assert_allclose(apply_inverse(eigh(np.diag([2.0, 4.0])), np.array([1.0, 1.0])), [0.5, 0.25])


def test_apply_inverse_identity():
    phi = np.array([0.3, -1.2, 2.0])
    np.testing.assert_allclose(apply_inverse(eigh(np.eye(3)), phi), phi, atol=1e-15)


@pytest.mark.parametrize("field", ["real", "complex"])
def test_apply_inverse_residual(field):
    rng = np.random.default_rng(11)
    h = random_hermitian(rng, 16, field)
    phi = rng.standard_normal(16)
    x = apply_inverse(eigh(h), phi)
    assert np.linalg.norm(h @ x - phi) <= 1e-10 * np.linalg.norm(phi) * np.linalg.cond(h)


def test_apply_inverse_singular():
    with pytest.raises(NearSingular):
        apply_inverse(eigh(np.diag([1.0, 0.0])), np.array([1.0, 1.0]))


def test_inverse_norms_diagonal():
    f, o = inverse_norms(eigh(np.diag([1.0, 2.0])))
    assert f == pytest.approx(math.sqrt(1.25), rel=1e-15) and o == pytest.approx(1.0)
    assert inverse_norms(eigh(np.array([[0.5]]))) == pytest.approx((2.0, 2.0))


def test_inverse_norms_explicit_inverse():
    rng = np.random.default_rng(5)
    h = random_hermitian(rng, 8)
    inv = np.linalg.inv(h)
    f, o = inverse_norms(eigh(h))
    assert f == pytest.approx(np.linalg.norm(inv), rel=1e-10)
    assert o == pytest.approx(np.linalg.norm(inv, 2), rel=1e-10)


def test_inverse_norms_frozen(oracles):
    case = oracles["inverse_4x4"]
    spec = eigh(np.array(case["matrix"]))
    f, o = inverse_norms(spec)
    assert f == pytest.approx(case["frobenius"], rel=1e-12)
    assert o == pytest.approx(case["operator"], rel=1e-12)
    assert np.linalg.norm(apply_inverse(spec, e1(4))) == pytest.approx(case["column_1_norm"], rel=1e-12)


def test_householder_maps_to_e1():
    rng = np.random.default_rng(2)
    phi = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    w, alpha = householder_vector(phi)
    p = np.eye(5) - 2 * np.outer(w, w.conj()) / np.vdot(w, w).real
    np.testing.assert_allclose(p @ (phi / np.linalg.norm(phi)), alpha * e1(5), atol=1e-14)
    assert abs(abs(alpha) - 1) < 1e-15
    with pytest.raises(InvalidInput):
        householder_vector(np.zeros(3))


def test_restrict_e1_is_principal_block():
    rng = np.random.default_rng(4)
    h = random_hermitian(rng, 6)
    np.testing.assert_allclose(restrict_orthogonal(h, e1(6)).data, h[1:, 1:], atol=1e-14)


def test_restrict_two_by_two():
    a, b, c = 1.5, -0.4, 0.7
    m = restrict_orthogonal(np.array([[a, b], [b, c]]), np.array([1.0, 1.0]) / math.sqrt(2))
    assert m.data[0, 0] == pytest.approx((a + c) / 2 - b, abs=1e-14)


@pytest.mark.parametrize("field", ["real", "complex"])
def test_restrict_interlaces(field):
    rng = np.random.default_rng(9)
    h = random_hermitian(rng, 10, field)
    phi = rng.standard_normal(10) + (1j * rng.standard_normal(10) if field == "complex" else 0)
    lam = np.linalg.eigvalsh(h)
    mu = np.linalg.eigvalsh(restrict_orthogonal(h, phi).data)
    tol = 1e-12 * np.abs(lam).max()
    assert np.all(lam[:-1] <= mu + tol) and np.all(mu <= lam[1:] + tol)


def test_restrict_rejects_complex_vector_for_real_matrix():
    with pytest.raises(InvalidInput):
        restrict_orthogonal(np.eye(3), np.array([1.0, 1j, 0.0]))


def test_embed_identity():
    q, _ = complex_to_real_embed(np.eye(3))
    np.testing.assert_array_equal(q.data, np.eye(6))


def test_embed_preserves_norms_of_products():
    q = np.array([[0, 1j], [-1j, 0]])
    qt, _ = complex_to_real_embed(q)
    rng = np.random.default_rng(1)
    for _ in range(20):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        _, vt = complex_to_real_embed(q, v)
        assert np.linalg.norm(qt.data @ vt) == pytest.approx(np.linalg.norm(q @ v), rel=1e-14)
        np.testing.assert_allclose(real_to_complex_vector(qt.data @ vt), q @ v, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_embed_frobenius_ratio(n, seed):
    q = random_hermitian(np.random.default_rng(seed), n, "complex")
    qt, _ = complex_to_real_embed(q)
    assert qt.frobenius_norm() / np.linalg.norm(q) == pytest.approx(math.sqrt(2), rel=1e-12)
    # each eigenvalue of Q appears twice in the embedding
    lam = np.linalg.eigvalsh(q)
    np.testing.assert_allclose(np.linalg.eigvalsh(qt.data), np.repeat(lam, 2), atol=1e-12 * max(1, np.abs(lam).max()))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 8), seed=st.integers(0, 2**32 - 1), complex_field=st.booleans())
def test_inverse_property(n, seed, complex_field):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, n, "complex" if complex_field else "real") + 3 * np.eye(n)
    phi = rng.standard_normal(n)
    spec = eigh(h)
    if np.abs(spec.eigenvalues).min() < 1e-3:
        return
    x = apply_inverse(spec, phi)
    np.testing.assert_allclose(h @ x, phi, atol=1e-9 * np.linalg.cond(h))
    f, o = inverse_norms(spec)
    assert o <= f + 1e-12


@pytest.mark.parametrize("field", ["real", "complex"])
def test_hmat_roundtrip(tmp_path, field):
    h = random_hermitian(np.random.default_rng(8), 5, field)
    path = tmp_path / "m.hmat"
    write_hmat(path, h)
    back = read_hmat(path, 5)
    np.testing.assert_array_equal(back.data, HermitianMatrix(h).data)
    assert format_hmat(back) == path.read_text()


@pytest.mark.parametrize(
    "text",
    ["", "matrix real 2\n1 0\n0 1\n", "hmat quaternion 1\n1\n", "hmat real 2\n1 0\n", "hmat real 2\n1 5\n0 1\n",
     "hmat real x\n", "hmat real 1\nfoo\n"],
)
def test_hmat_errors(tmp_path, text):
    path = tmp_path / "bad.hmat"
    path.write_text(text)
    with pytest.raises(InvalidInput):
        read_hmat(path)


def test_hmat_dimension_mismatch_and_missing(tmp_path):
    path = tmp_path / "m.hmat"
    write_hmat(path, np.eye(3))
    with pytest.raises(InvalidInput):
        read_hmat(path, 4)
    with pytest.raises(InvalidInput):
        read_hmat(tmp_path / "missing.hmat")
