"""Executable forms of the proof ingredients behind the resolvent bounds.

* the block (Schur complement) formula for ``||H^{-1} e_1||`` and the tail
  conditional on the minor;
* the small-ball bound for ``||Q phi||`` with ``phi`` uniform on the sphere;
* the rank-one and diagonal ratio-of-quadratic-forms tails;
* the reordering / cutoff ``r`` / contour shift ``delta`` used in the Fourier
  argument, and the joint characteristic function of the two quadratic forms;
* interlacing of the compression to ``phi^perp``.

Scalar Monte Carlo routines here draw their Gaussians per chunk of
``SCALAR_CHUNK`` samples from ``RngStream(cfg.seed, chunk_index)``; the chunk
size is a constant, so results do not depend on the number of workers.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from rmt_lab import kernels
from rmt_lab.ensembles import Ensemble, EnsembleSpec, sample_deformed, sample_ensemble, uniform_sphere
from rmt_lab.errors import BlockSingular, InvalidInput, NearSingular
from rmt_lab.linalg import (
    SINGULAR_RTOL,
    HermitianMatrix,
    as_hermitian,
    eigh,
    apply_inverse,
    is_near_singular,
    restrict_orthogonal,
)
from rmt_lab.montecarlo import MonteCarloConfig, TailCurve, _check_thresholds, map_chunks
from rmt_lab.rng import MAX_U64, RngStream, derive_seed

__all__ = [
    "SCALAR_CHUNK",
    "R_THRESHOLD",
    "RANK_ONE_CONSTANT",
    "SMALL_BALL_CONSTANT",
    "schur_inverse_column",
    "conditional_ratio_samples",
    "mc_conditional_tail",
    "small_ball_samples",
    "mc_small_ball",
    "rank_one_ratio_samples",
    "mc_rank_one_ratio",
    "RatioProblem",
    "ratio_quadratic_samples",
    "mc_ratio_quadratic",
    "CharFnParams",
    "compute_reorder_r",
    "gaussian_quad_cf",
    "char_fn",
    "char_fn_mc",
    "InterlacingReport",
    "check_interlacing",
    "SchurCheckResult",
    "schur_consistency",
    "InterlacingScan",
    "interlacing_scan",
    "SMALL_BALL_SHAPES",
    "small_ball_matrix",
]

SCALAR_CHUNK = 1 << 14
#: Cutoff factor in the choice of ``r``.
R_THRESHOLD = 0.1
#: ``sqrt(8 / pi)``, the rank-one tail constant.
RANK_ONE_CONSTANT = math.sqrt(8.0 / math.pi)
SMALL_BALL_CONSTANT = 5.0
#: Stream index reserved for the fixed minor of the conditional tail.
MINOR_STREAM = MAX_U64


def _scalar_map(cfg: MonteCarloConfig, fn):
    """``fn(gen, count)`` per chunk; concatenated per-sample results."""

    def work(start, stop):
        return fn(RngStream(cfg.seed, start // SCALAR_CHUNK).generator(), stop - start)

    return np.concatenate(map_chunks(work, cfg.n_samples, SCALAR_CHUNK, cfg.max_workers))


def _curve(statistic, values, t, cfg, upper=True, n_singular=0):
    counts = kernels.tail_counts(values, t, upper)
    return TailCurve(statistic, t, counts, cfg.n_samples, cfg.seed, cfg.ci_level, upper, n_singular)


# -- block inversion -------------------------------------------------------------

def _solve_block(b: np.ndarray):
    spec = eigh(b, want_vectors=True)
    if is_near_singular(spec.eigenvalues):
        raise BlockSingular(np.abs(spec.eigenvalues).min(), "lower-right block is numerically singular")
    u = spec.eigenvectors
    return u, spec.eigenvalues


def schur_inverse_column(h) -> float:
    """``||H^{-1} e_1||`` through the block inversion formula.

    With ``sqrt(n) H = [[h11, w^*], [w, B]]`` and ``Q = B^{-1}``::

        ||H^{-1} e_1|| = sqrt(n) * sqrt(1 + ||Q w||^2) / |h11 - w^* Q w|

    Raises
    ------
    BlockSingular
        ``B`` fails the singularity tolerance.
    NearSingular
        The Schur complement ``h11 - w^* Q w`` vanishes.
    """
    h = as_hermitian(h)
    n = h.n
    if n == 1:
        h11 = float(h.data[0, 0].real)
        if abs(h11) <= SINGULAR_RTOL * max(1.0, abs(h11)):
            raise NearSingular(abs(h11))
        return 1.0 / abs(h11)
    m = math.sqrt(n) * np.asarray(h.data)
    h11 = float(m[0, 0].real)
    w = m[1:, 0]
    u, lam = _solve_block(m[1:, 1:])
    qw = u @ ((u.conj().T @ w) / lam)
    schur = h11 - float(np.vdot(w, qw).real)
    scale = max(1.0, abs(h11), float(np.abs(lam).max()))
    if abs(schur) <= SINGULAR_RTOL * scale:
        raise NearSingular(abs(schur), "Schur complement vanishes")
    return math.sqrt(n) * math.sqrt(1.0 + float(np.vdot(qw, qw).real)) / abs(schur)


def _default_minor(spec: EnsembleSpec, seed: int) -> np.ndarray:
    v = sample_ensemble(spec.kind, spec.n, RngStream(seed, MINOR_STREAM))
    return math.sqrt(spec.n) * np.asarray(v.data)[1:, 1:]


def conditional_ratio_samples(spec: EnsembleSpec, base, cfg: MonteCarloConfig, minor=None):
    """Per-draw ``||H^{-1} e_1|| / sqrt(n)`` with the minor of ``V`` held fixed.

    ``sqrt(n) V = [[c g0, g^*], [g, W]]`` where ``c = sqrt(2)`` (GOE) or 1
    (GUE), ``g`` is a standard real/complex Gaussian vector and ``W`` is
    fixed (``minor``, or a GOE/GUE draw from a reserved stream). Only
    ``(g0, g)`` are resampled. With ``a, b, D`` the blocks of ``sqrt(n) A``::

        ratio = sqrt(1 + ||Q u||^2) / |a + lam c g0 - u^* Q u|,
        u = b + lam g,  Q = (D + lam W)^{-1}.

    Returns
    -------
    ratios : ndarray
    minor : ndarray
        The ``W`` actually used.
    """
    if spec.kind is Ensemble.BERNOULLI:
        raise InvalidInput("conditional tail is defined for GOE/GUE only")
    n = spec.n
    if n < 2:
        raise InvalidInput("conditional tail needs n >= 2")
    a_mat = np.asarray(as_hermitian(base).data)
    if a_mat.shape != (n, n):
        raise InvalidInput(f"base has shape {a_mat.shape}, expected ({n}, {n})")
    if np.iscomplexobj(a_mat) and spec.field == "real":
        raise InvalidInput("complex base matrix cannot be combined with GOE")
    w_fixed = _default_minor(spec, cfg.seed) if minor is None else np.asarray(as_hermitian(minor).data)
    if w_fixed.shape != (n - 1, n - 1):
        raise InvalidInput(f"minor must be ({n - 1}, {n - 1}), got {w_fixed.shape}")
    if np.iscomplexobj(w_fixed) and spec.field == "real":
        raise InvalidInput("complex minor given for GOE")
    sa = math.sqrt(n) * a_mat
    a11 = float(sa[0, 0].real)
    b = sa[1:, 0]
    u_q, lam_q = _solve_block(sa[1:, 1:] + spec.lam * w_fixed)
    c = math.sqrt(2.0) if spec.kind is Ensemble.GOE else 1.0
    complex_field = spec.field == "complex"

    def draw(gen, count):
        g0 = gen.standard_normal(count)
        if complex_field:
            s = math.sqrt(0.5)
            g = (gen.standard_normal((count, n - 1)) + 1j * gen.standard_normal((count, n - 1))) * s
        else:
            g = gen.standard_normal((count, n - 1))
        u = b + spec.lam * g
        coef = (u @ u_q.conj()) / lam_q  # rows: U^* u / lam
        qu = coef @ u_q.T
        quad = np.einsum("sj,sj->s", u.conj(), qu).real
        num = np.sqrt(1.0 + np.einsum("sj,sj->s", qu.conj(), qu).real)
        den = np.abs(a11 + spec.lam * c * g0 - quad)
        with np.errstate(divide="ignore"):
            return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)

    return _scalar_map(cfg, draw), w_fixed


def mc_conditional_tail(spec: EnsembleSpec, base, t_grid, cfg: MonteCarloConfig, minor=None) -> TailCurve:
    """``P{||H^{-1} e_1|| >= t sqrt(n) | minor of V}`` on a grid of ``t >= 1``."""
    t = _check_thresholds(t_grid)
    ratios, _ = conditional_ratio_samples(spec, base, cfg, minor)
    return _curve("conditional_fixed_vector", ratios, t, cfg, n_singular=int(np.isinf(ratios).sum()))


# -- small-ball bound --------------------------------------------------------------

def small_ball_samples(q, field: str, cfg: MonteCarloConfig) -> np.ndarray:
    """Per-draw ``sqrt(n) ||Q phi|| / ||Q||_F`` for ``phi`` uniform on the (complex) sphere."""
    q = np.asarray(as_hermitian(q).data)
    n = q.shape[0]
    fro = float(np.linalg.norm(q))
    if fro == 0.0:
        raise InvalidInput("Q must be non-zero")
    if field not in ("real", "complex"):
        raise InvalidInput(f"unknown field {field!r}")
    if field == "real" and np.iscomplexobj(q):
        raise InvalidInput("complex Q given with field='real'")

    def draw(gen, count):
        g = gen.standard_normal((count, n))
        if field == "complex":
            g = g + 1j * gen.standard_normal((count, n))
        norms = np.linalg.norm(g, axis=1)
        # a zero Gaussian vector has probability zero; guard the division anyway
        norms[norms == 0] = np.inf
        qphi = (g @ q.T) / norms[:, None]
        return math.sqrt(n) * np.linalg.norm(qphi, axis=1) / fro

    return _scalar_map(cfg, draw)


def mc_small_ball(q, eps_grid, field: str, cfg: MonteCarloConfig) -> TailCurve:
    """``P{||Q phi|| <= eps ||Q||_F / sqrt(n)}`` for each ``eps``; the bound is ``5 eps``."""
    eps = _check_thresholds(eps_grid, minimum=None)
    if np.any(eps <= 0):
        raise InvalidInput("eps must be positive")
    values = small_ball_samples(q, field, cfg)
    return _curve("small_ball", values, eps, cfg, upper=False)


# -- ratio of quadratic forms --------------------------------------------------------

def rank_one_ratio_samples(a: float, b: float, cfg: MonteCarloConfig) -> np.ndarray:
    """Per-draw ``|h + b| / |(h + b)^2 - a|`` for standard Gaussian ``h``."""
    return _scalar_map(
        cfg, lambda gen, count: kernels.quadratic_ratio([1.0], [b], a, gen.standard_normal((count, 1)))
    )


def mc_rank_one_ratio(a: float, b: float, t_grid, cfg: MonteCarloConfig) -> TailCurve:
    """Tail of the rank-one ratio; the bound is ``sqrt(8/pi) / t``."""
    t = _check_thresholds(t_grid)
    return _curve("rank_one_ratio", rank_one_ratio_samples(a, b, cfg), t, cfg)


@dataclass(frozen=True, eq=False)
class RatioProblem:
    """Diagonal data ``(E_j, b_j, a)`` of ``||Q(g+b)|| / |(g+b)^T Q (g+b) - a|``."""

    energies: np.ndarray
    offsets: np.ndarray
    shift: float = 0.0

    def __post_init__(self):
        e = np.atleast_1d(np.asarray(self.energies, dtype=float))
        b = np.zeros_like(e) if self.offsets is None else np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if e.ndim != 1 or e.shape != b.shape:
            raise InvalidInput("energies and offsets must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(e)) and np.all(np.isfinite(b)) and math.isfinite(self.shift)):
            raise InvalidInput("ratio problem data must be finite")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "offsets", b)
        object.__setattr__(self, "shift", float(self.shift))

    @classmethod
    def from_matrix(cls, q, b, a: float) -> "RatioProblem":
        """Diagonalize a real symmetric ``Q``; ``b`` is rotated into the eigenbasis."""
        q = as_hermitian(q)
        if q.field != "real":
            raise InvalidInput("ratio problem needs a real symmetric Q")
        spec = eigh(q)
        return cls(spec.eigenvalues.copy(), spec.eigenvectors.T @ np.asarray(b, dtype=float), a)

    @property
    def degenerate(self) -> bool:
        return not np.any(self.energies != 0)


def ratio_quadratic_samples(problem: RatioProblem, cfg: MonteCarloConfig) -> np.ndarray:
    if problem.degenerate:
        raise InvalidInput("all eigenvalues are zero")
    m = problem.energies.size
    return _scalar_map(
        cfg,
        lambda gen, count: kernels.quadratic_ratio(
            problem.energies, problem.offsets, problem.shift, gen.standard_normal((count, m))
        ),
    )


def mc_ratio_quadratic(problem: RatioProblem, t_grid, cfg: MonteCarloConfig) -> TailCurve:
    t = _check_thresholds(t_grid)
    return _curve("ratio_quadratic", ratio_quadratic_samples(problem, cfg), t, cfg)


# -- characteristic function -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CharFnParams:
    """Reordered ``(E_j, b_j)`` with cutoff ``r``, ``nu^2`` and contour shift ``delta``.

    ``order`` maps positions in the reordered arrays back to input indices.
    When ``nu2 == 0`` the second form vanishes identically and ``delta`` is
    infinite.
    """

    energies: np.ndarray
    offsets: np.ndarray
    order: np.ndarray
    r: int
    nu2: float
    delta: float

    @property
    def keys(self) -> np.ndarray:
        return self.energies**2 * (1.0 + self.offsets**2)

    def zeta(self, xi: float, eta: float) -> np.ndarray:
        return xi * self.energies**2 + eta * self.energies

    def analyticity_bound(self) -> float:
        """``1 / (2 max_{j>r} E_j^2)``; the shifted contour must stay below it."""
        tail = self.energies[self.r:] ** 2
        top = float(tail.max()) if tail.size else 0.0
        return math.inf if top == 0.0 else 1.0 / (2.0 * top)

    def forms(self, g: np.ndarray):
        """``X = sum_{j>r} E_j^2 (g_j + b_j)^2`` and ``Y = sum_j E_j (g_j + b_j)^2`` for rows of ``g``."""
        x2 = (g + self.offsets) ** 2
        e = self.energies
        return x2[:, self.r:] @ (e[self.r:] ** 2), x2 @ e


def compute_reorder_r(energies, offsets=None) -> CharFnParams:
    """Sort by ``E_j^2 (1 + b_j^2)`` descending (ties by input index) and pick ``r``.

    ``r = 0`` if ``k_1 <= sum_{j>1} k_j / 10``; else ``r = 1`` if
    ``k_2 <= sum_{j>2} k_j / 10``; else ``r = 2``. Missing entries count as
    zero. Then ``nu^2 = sum_{j>r} k_j`` and ``delta = 1 / (10 nu^2)``.
    """
    problem = RatioProblem(energies, offsets, 0.0)
    e, b = problem.energies, problem.offsets
    if problem.degenerate:
        raise InvalidInput("all eigenvalues are zero")
    keys = e**2 * (1.0 + b**2)
    order = np.argsort(-keys, kind="stable")
    e, b, keys = e[order], b[order], keys[order]

    def key(j):
        return float(keys[j]) if j < keys.size else 0.0

    def rest(j):
        return float(keys[j + 1:].sum()) if j + 1 < keys.size else 0.0

    if key(0) <= R_THRESHOLD * rest(0):
        r = 0
    elif key(1) <= R_THRESHOLD * rest(1):
        r = 1
    else:
        r = 2
    r = min(r, keys.size)
    nu2 = float(keys[r:].sum())
    delta = math.inf if nu2 == 0.0 else 1.0 / (10.0 * nu2)
    params = CharFnParams(e, b, order, r, nu2, delta)
    if nu2 > 0 and not delta < params.analyticity_bound():
        raise AssertionError("contour shift outside the analyticity domain")
    return params


def gaussian_quad_cf(alpha, beta: float) -> complex:
    """``E exp(i alpha (h + beta)^2) = (1 - 2 i alpha)^{-1/2} exp(i alpha beta^2 / (1 - 2 i alpha))``.

    ``alpha`` may be complex with ``Im alpha > -1/2``; the principal square
    root is used (``Re(1 - 2 i alpha) > 0`` there).
    """
    z = 1.0 - 2j * alpha
    return cmath.exp(1j * alpha * beta * beta / z) / cmath.sqrt(z)


def char_fn(params: CharFnParams, xi: float, eta: float, shifted: bool = False, delta: float | None = None) -> complex:
    """Joint characteristic function ``E exp(i (xi X + eta Y))``.

    With ``shifted`` the first argument is moved to ``xi - i delta``
    (``delta`` defaults to ``params.delta``), using the analytic
    continuation: factors ``j > r`` become
    ``((1 - 2 delta E_j^2) - 2 i zeta_j)^{-1/2} exp(b_j^2 (delta E_j^2 + i zeta_j) / (...))``.
    Factors with ``E_j = 0`` are identically 1 and skipped.
    """
    e, b, r = params.energies, params.offsets, params.r
    d = 0.0
    if shifted and params.nu2 > 0:
        d = params.delta if delta is None else float(delta)
        if not d < params.analyticity_bound():
            raise InvalidInput(f"delta={d} is outside the analyticity domain")
    out = 1.0 + 0.0j
    for j in range(e.size):
        if e[j] == 0.0:
            continue
        if j < r:
            out *= gaussian_quad_cf(eta * e[j], b[j])
        else:
            alpha = complex(xi * e[j] ** 2 + eta * e[j], -d * e[j] ** 2)
            out *= gaussian_quad_cf(alpha, b[j])
    return out


def char_fn_mc(params: CharFnParams, points, cfg: MonteCarloConfig) -> np.ndarray:
    """Monte Carlo estimates of ``E exp(i (xi X + eta Y))`` at each ``(xi, eta)`` in ``points``."""
    m = params.energies.size

    def draw(gen, count):
        x, y = params.forms(gen.standard_normal((count, m)))
        return np.stack([x, y], axis=1)

    xy = _scalar_map(cfg, draw)
    return np.array([kernels.phase_mean(xy[:, 0], xy[:, 1], xi, eta) for xi, eta in points])


# -- interlacing ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InterlacingReport:
    ok: bool
    max_violation: float
    eigenvalues: np.ndarray
    minor_eigenvalues: np.ndarray
    rescaled_minor: HermitianMatrix

    def to_dict(self):
        return {
            "ok": self.ok,
            "max_violation": self.max_violation,
            "eigenvalues": self.eigenvalues.tolist(),
            "minor_eigenvalues": self.minor_eigenvalues.tolist(),
        }


def check_interlacing(h, phi, tol: float = 1e-10) -> InterlacingReport:
    """Check ``lam_k(H) <= mu_k(H_phi) <= lam_{k+1}(H)`` for the compression ``H_phi``.

    ``tol`` is relative to ``max(1, max |lam|)``. The report carries the
    rescaled compression ``sqrt(n / (n - 1)) H_phi``.
    """
    h = as_hermitian(h)
    minor = restrict_orthogonal(h, phi)
    lam = eigh(h, want_vectors=False).eigenvalues
    mu = eigh(minor, want_vectors=False).eigenvalues
    scale = max(1.0, float(np.abs(lam).max()))
    viol = max(float(np.max(lam[:-1] - mu)), float(np.max(mu - lam[1:])), 0.0)
    n = h.n
    rescaled = HermitianMatrix(math.sqrt(n / (n - 1)) * np.asarray(minor.data))
    return InterlacingReport(viol <= tol * scale, viol, lam, mu, rescaled)


# -- batch checks --------------------------------------------------------------------------

def _instance(base, spec, seed, i):
    return sample_deformed(base, spec, RngStream(seed, i).generator())


@dataclass(frozen=True, eq=False)
class SchurCheckResult:
    """Relative differences between the block formula and a direct solve."""

    n: int
    ensemble: str
    seed: int
    rel_errors: np.ndarray
    n_skipped: int

    @property
    def max_rel_error(self) -> float:
        return float(self.rel_errors.max()) if self.rel_errors.size else 0.0

    def to_dict(self):
        return {
            "n": self.n,
            "ensemble": self.ensemble,
            "seed": self.seed,
            "instances": int(self.rel_errors.size + self.n_skipped),
            "n_skipped": self.n_skipped,
            "max_rel_error": self.max_rel_error,
            "median_rel_error": float(np.median(self.rel_errors)) if self.rel_errors.size else 0.0,
        }

    def csv_rows(self):
        total = int(self.rel_errors.size + self.n_skipped)
        yield ("schur_max_rel_error", str(self.n), self.max_rel_error, "", "", total, self.seed)


def schur_consistency(base, spec: EnsembleSpec, instances: int, seed: int) -> SchurCheckResult:
    """Compare :func:`schur_inverse_column` with ``||H^{-1} e_1||`` from the eigendecomposition.

    Instance ``i`` is ``A + lam V`` with ``V`` drawn from ``RngStream(seed, i)``.
    Numerically singular instances are counted in ``n_skipped``.
    """
    if instances < 1:
        raise InvalidInput("instances must be >= 1")
    errs, skipped = [], 0
    e1 = np.zeros(spec.n)
    e1[0] = 1.0
    for i in range(instances):
        h = _instance(base, spec, seed, i)
        try:
            direct = float(np.linalg.norm(apply_inverse(eigh(h), e1.astype(h.data.dtype))))
            block = schur_inverse_column(h)
        except NearSingular:
            skipped += 1
            continue
        errs.append(abs(block - direct) / direct)
    return SchurCheckResult(spec.n, spec.kind.value, seed, np.array(errs), skipped)


@dataclass(frozen=True, eq=False)
class InterlacingScan:
    n: int
    ensemble: str
    seed: int
    tol: float
    violations: np.ndarray

    @property
    def n_failed(self) -> int:
        return int(np.sum(self.violations > 0))

    def to_dict(self):
        return {
            "n": self.n,
            "ensemble": self.ensemble,
            "seed": self.seed,
            "tol": self.tol,
            "instances": int(self.violations.size),
            "n_failed": self.n_failed,
            "max_violation": float(self.violations.max()),
        }

    def csv_rows(self):
        yield ("interlacing_failures", str(self.n), float(self.n_failed), "", "", int(self.violations.size),
               self.seed)


def interlacing_scan(base, spec: EnsembleSpec, instances: int, seed: int, tol: float = 1e-10) -> InterlacingScan:
    """Run :func:`check_interlacing` on ``instances`` seeded pairs ``(H, phi)``.

    ``H`` comes from ``RngStream(seed, i)`` and ``phi`` (uniform on the sphere
    of the ensemble's field) from a separate seed derived from ``seed``.
    ``violations`` holds the excess over the tolerance, zero when a pair passes.
    """
    if instances < 1:
        raise InvalidInput("instances must be >= 1")
    if spec.n < 2:
        raise InvalidInput("interlacing needs n >= 2")
    phi_seed = derive_seed(seed, "interlacing_phi")
    out = np.empty(instances)
    for i in range(instances):
        h = _instance(base, spec, seed, i)
        phi = uniform_sphere(spec.n, h.field, RngStream(phi_seed, i).generator())
        rep = check_interlacing(h, phi, tol)
        out[i] = 0.0 if rep.ok else rep.max_violation
    return InterlacingScan(spec.n, spec.kind.value, seed, tol, out)


SMALL_BALL_SHAPES = ("identity", "rank-one", "random")


def small_ball_matrix(shape: str, n: int, field: str, seed: int = 0) -> HermitianMatrix:
    """Test matrices for the small-ball bound: ``I``, ``e_1 e_1^*``, or a GOE/GUE draw."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    if shape == "identity":
        return HermitianMatrix(np.eye(n))
    if shape == "rank-one":
        q = np.zeros((n, n))
        q[0, 0] = 1.0
        return HermitianMatrix(q)
    if shape == "random":
        kind = Ensemble.GOE if field == "real" else Ensemble.GUE
        return sample_ensemble(kind, n, RngStream(derive_seed(seed, "small_ball_q"), 0).generator())
    raise InvalidInput(f"unknown Q shape {shape!r}; expected one of {SMALL_BALL_SHAPES}")
