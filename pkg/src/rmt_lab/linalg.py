"""Dense Hermitian linear algebra.

Eigendecomposition is delegated to LAPACK through :func:`numpy.linalg.eigh`;
everything else here (inverse application, norms, compressions, the
complex-to-real embedding and the matrix text format) is built on top of the
resulting :class:`Spectrum`.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from rmt_lab.errors import ConvergenceError, InvalidInput, NearSingular

__all__ = [
    "SINGULAR_RTOL",
    "HermitianMatrix",
    "Spectrum",
    "as_hermitian",
    "eigh",
    "is_near_singular",
    "apply_inverse",
    "inverse_norms",
    "householder_vector",
    "restrict_orthogonal",
    "complex_to_real_embed",
    "real_to_complex_vector",
    "read_hmat",
    "write_hmat",
    "format_hmat",
]

#: Relative tolerance below which an eigenvalue is treated as zero.
SINGULAR_RTOL = 1e-13

_RECONSTRUCTION_RTOL = 1e-10


def _readonly(a):
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Dense real-symmetric or complex-Hermitian matrix.

    The input is symmetrized on construction, ``(M + M^*) / 2``, so the
    stored entries satisfy ``data[i, j] == conj(data[j, i])`` exactly. The
    stored array is read-only.
    """

    data: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.data)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidInput(f"expected a non-empty square matrix, got shape {m.shape}")
        if np.iscomplexobj(m):
            m = m.astype(np.complex128)
            sym = 0.5 * (m + m.conj().T)
        else:
            m = m.astype(np.float64)
            sym = 0.5 * (m + m.T)
        if not np.all(np.isfinite(sym)):
            raise InvalidInput("matrix entries must be finite")
        object.__setattr__(self, "data", _readonly(np.ascontiguousarray(sym)))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.data) else "real"

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def to_complex(self) -> "HermitianMatrix":
        if self.field == "complex":
            return self
        return HermitianMatrix(self.data.astype(np.complex128))

    def __add__(self, other):
        return HermitianMatrix(np.asarray(self.data) + np.asarray(as_hermitian(other).data))

    def __mul__(self, scalar):
        return HermitianMatrix(self.data * float(scalar))

    __rmul__ = __mul__


def as_hermitian(h) -> HermitianMatrix:
    """Coerce an array-like to :class:`HermitianMatrix`."""
    return h if isinstance(h, HermitianMatrix) else HermitianMatrix(np.asarray(h))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with optional eigenvectors (column ``i`` pairs with eigenvalue ``i``)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise InvalidInput("spectrum has no eigenvectors")
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def eigh(h, want_vectors: bool = True) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    h : HermitianMatrix or array_like
    want_vectors : bool
        Also return the unitary eigenvector matrix.

    Raises
    ------
    ConvergenceError
        LAPACK failed, or the reconstruction residual
        ``||U diag(lam) U^* - H||_F`` exceeds ``1e-10 * max(1, ||H||_F)``.
    """
    h = as_hermitian(h)
    a = h.data
    try:
        if want_vectors:
            w, u = np.linalg.eigh(a)
        else:
            w, u = np.linalg.eigvalsh(a), None
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(h.n, float("nan"), f"eigensolver did not converge for n={h.n}: {exc}") from exc
    spec = Spectrum(_readonly(w), None if u is None else _readonly(u))
    if u is not None:
        scale = max(1.0, h.frobenius_norm())
        residual = float(np.linalg.norm(spec.reconstruct() - a))
        if not residual <= _RECONSTRUCTION_RTOL * scale:
            raise ConvergenceError(h.n, residual)
    return spec


def is_near_singular(eigenvalues, rtol: float = SINGULAR_RTOL) -> bool:
    a = np.abs(np.asarray(eigenvalues))
    return bool(a.min() <= rtol * max(1.0, float(a.max())))


def _check_invertible(spec: Spectrum):
    if is_near_singular(spec.eigenvalues):
        raise NearSingular(np.abs(spec.eigenvalues).min())


def apply_inverse(spec: Spectrum, phi) -> np.ndarray:
    """``H^{-1} phi`` as ``sum_i (v_i^* phi) / lam_i * v_i``."""
    if spec.eigenvectors is None:
        raise InvalidInput("apply_inverse needs a spectrum with eigenvectors")
    phi = np.asarray(phi)
    if phi.shape != (spec.n,):
        raise InvalidInput(f"vector of length {phi.shape} does not match dimension {spec.n}")
    _check_invertible(spec)
    u = spec.eigenvectors
    return u @ ((u.conj().T @ phi) / spec.eigenvalues)


def inverse_norms(spec: Spectrum) -> tuple[float, float]:
    """Frobenius and operator norms of ``H^{-1}``: ``(sqrt(sum lam^-2), 1 / min |lam|)``."""
    _check_invertible(spec)
    lam = spec.eigenvalues
    return float(np.sqrt(np.sum(1.0 / lam**2))), float(1.0 / np.abs(lam).min())


def householder_vector(phi) -> tuple[np.ndarray, complex]:
    """Reflector data mapping ``phi / ||phi||`` to a unimodular multiple of ``e_1``.

    Returns ``(w, alpha)`` such that ``P = I - 2 w w^* / (w^* w)`` satisfies
    ``P u = alpha e_1`` with ``u = phi / ||phi||``. ``alpha = -u_1 / |u_1|``
    (or ``-1`` when ``u_1 = 0``) avoids cancellation.
    """
    phi = np.asarray(phi)
    norm = np.linalg.norm(phi)
    if phi.ndim != 1 or phi.size == 0 or not np.isfinite(norm) or norm == 0.0:
        raise InvalidInput("phi must be a finite non-zero vector")
    u = phi / norm
    u1 = u[0]
    alpha = -u1 / abs(u1) if u1 != 0 else -1.0
    w = u.astype(np.result_type(u, alpha), copy=True)
    w[0] -= alpha
    return w, alpha


def restrict_orthogonal(h, phi) -> HermitianMatrix:
    """Compression of ``H`` to the orthogonal complement of ``phi``.

    The basis of ``phi^perp`` is columns ``2..n`` of the Householder reflector
    from :func:`householder_vector`, so the result is reproducible; for
    ``phi = e_1`` it is exactly the lower-right principal block.
    """
    h = as_hermitian(h)
    phi = np.asarray(phi)
    if phi.shape != (h.n,):
        raise InvalidInput(f"vector of length {phi.shape} does not match dimension {h.n}")
    if h.n < 2:
        raise InvalidInput("cannot restrict a 1x1 matrix")
    w, _ = householder_vector(phi)
    if h.field == "real" and np.iscomplexobj(w):
        raise InvalidInput("complex vector given for a real matrix")
    dtype = np.result_type(h.data, w)
    p = np.eye(h.n, dtype=dtype) - (2.0 / np.vdot(w, w).real) * np.outer(w, w.conj())
    basis = p[:, 1:]
    return HermitianMatrix(basis.conj().T @ h.data @ basis)


def complex_to_real_embed(q, v=None):
    """Real ``2n x 2n`` representation of a complex Hermitian matrix.

    Uses the real basis ``(e_1, i e_1, e_2, i e_2, ...)``: each entry
    ``x + iy`` becomes the block ``[[x, -y], [y, x]]`` and a vector maps to
    ``(Re v_1, Im v_1, Re v_2, ...)``.

    Returns
    -------
    (HermitianMatrix, ndarray or None)
    """
    q = as_hermitian(q)
    a = q.data.astype(np.complex128)
    n = q.n
    out = np.empty((2 * n, 2 * n))
    out[0::2, 0::2] = a.real
    out[1::2, 1::2] = a.real
    out[0::2, 1::2] = -a.imag
    out[1::2, 0::2] = a.imag
    vt = None
    if v is not None:
        v = np.asarray(v, dtype=np.complex128)
        if v.shape != (n,):
            raise InvalidInput(f"vector of length {v.shape} does not match dimension {n}")
        vt = np.empty(2 * n)
        vt[0::2] = v.real
        vt[1::2] = v.imag
    return HermitianMatrix(out), vt


def real_to_complex_vector(vt) -> np.ndarray:
    vt = np.asarray(vt, dtype=np.float64)
    return vt[0::2] + 1j * vt[1::2]


# -- plain-text matrix format ----------------------------------------------

def _format_scalar(x, field):
    if field == "real":
        return repr(float(x))
    z = complex(x)
    return f"{z.real!r}{'+' if z.imag >= 0 or np.isnan(z.imag) else '-'}{abs(z.imag)!r}j"


def format_hmat(h) -> str:
    """Serialize as ``hmat <field> <n>`` followed by ``n`` rows of scalars."""
    h = as_hermitian(h)
    lines = [f"hmat {h.field} {h.n}"]
    for row in h.data:
        lines.append(" ".join(_format_scalar(x, h.field) for x in row))
    return "\n".join(lines) + "\n"


def write_hmat(path, h) -> None:
    Path(path).write_text(format_hmat(h))


def read_hmat(path, n: int | None = None) -> HermitianMatrix:
    """Parse a matrix file; ``n`` (if given) must match the header.

    Raises
    ------
    InvalidInput
        Missing file, malformed header or rows, dimension mismatch, or a
        matrix that is not Hermitian to within ``1e-12`` relative.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read matrix file {path}: {exc}") from exc
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 3 or rows[0][0] != "hmat":
        raise InvalidInput(f"{path}: header must be 'hmat <real|complex> <n>'")
    field, size = rows[0][1], rows[0][2]
    if field not in ("real", "complex"):
        raise InvalidInput(f"{path}: unknown field {field!r}")
    try:
        dim = int(size)
    except ValueError:
        raise InvalidInput(f"{path}: bad dimension {size!r}") from None
    if dim < 1:
        raise InvalidInput(f"{path}: dimension must be positive")
    if n is not None and dim != n:
        raise InvalidInput(f"{path}: dimension {dim} does not match requested n={n}")
    body = rows[1:]
    if len(body) != dim or any(len(r) != dim for r in body):
        raise InvalidInput(f"{path}: expected {dim} rows of {dim} entries")
    conv = float if field == "real" else complex
    try:
        data = np.array([[conv(x) for x in r] for r in body])
    except ValueError as exc:
        raise InvalidInput(f"{path}: {exc}") from None
    asym = np.linalg.norm(data - data.conj().T)
    if asym > 1e-12 * max(1.0, float(np.linalg.norm(data))):
        raise InvalidInput(f"{path}: matrix is not Hermitian (asymmetry {asym:.3e})")
    return HermitianMatrix(data)
