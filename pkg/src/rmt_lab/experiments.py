"""End-to-end numerical experiments on the sharpness of the fixed-vector bound,
the density of states at the band centre, the Bernoulli counterexample and
the weak-disorder scaling.

"Typical" values are sample medians. Each experiment derives a private seed
per case and per dimension from ``cfg.seed`` via :func:`rmt_lab.rng.derive_seed`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from rmt_lab import kernels
from rmt_lab.ensembles import (
    CounterexampleDiag,
    Ensemble,
    EnsembleSpec,
    ProjComplement,
    Zero,
    sample_perturbations,
)
from rmt_lab.errors import ConvergenceError, InvalidInput
from rmt_lab.linalg import SINGULAR_RTOL, as_hermitian
from rmt_lab.montecarlo import (
    DosEstimate,
    MonteCarloConfig,
    PowerLawFit,
    TailCurve,
    clopper_pearson,
    fit_power_law,
    fixed_vector_ratios,
    map_chunks,
    mc_dos,
    partition_edges,
    spectral_map,
)
from rmt_lab.rng import derive_seed

__all__ = [
    "SharpnessResult",
    "sharpness_scan",
    "DosScalingResult",
    "dos_scaling_contrast",
    "CounterexampleResult",
    "bernoulli_counterexample",
    "WeakDisorderResult",
    "weak_disorder_scan",
    "SHARPNESS_WINDOWS",
    "MIN_PROJ_OVERLAP",
    "MIN_DOS_EXPONENT_GAP",
    "sharpness_verdict",
]

CASES = ("zero_base", "proj_base")

#: Accepted ranges for the fitted exponents of the medians against ``N``.
#: These are calibration choices for ``N`` in the low hundreds.
SHARPNESS_WINDOWS = {
    "zero_base": {"dist": (-1.2, -0.8), "overlap": (-0.65, -0.35)},
    "proj_base": {"dist": (-0.65, -0.35)},
}
#: For ``proj_base`` the median overlap must stay at least this large at every ``N``.
MIN_PROJ_OVERLAP = 0.5
#: Required difference between the DOS-scaling exponents of the two cases.
MIN_DOS_EXPONENT_GAP = 0.25
_DEFAULT_ENSEMBLE = {"zero_base": Ensemble.GUE, "proj_base": Ensemble.GOE}


def _check_grid(grid, name, integer=False):
    g = np.asarray(grid, dtype=float).ravel()
    if g.size < 1 or not np.all(np.isfinite(g)) or np.any(g <= 0) or np.any(np.diff(g) <= 0):
        raise InvalidInput(f"{name} must be positive and strictly ascending")
    if integer:
        if np.any(g != np.round(g)):
            raise InvalidInput(f"{name} must contain integers")
        return [int(x) for x in g]
    return [float(x) for x in g]


def _case_base(case, epsilon):
    if case == "zero_base":
        return Zero()
    if case == "proj_base":
        return ProjComplement(epsilon)
    raise InvalidInput(f"unknown case {case!r}; expected one of {CASES}")


# -- sharpness -----------------------------------------------------------------------

@dataclass(eq=False)
class SharpnessResult:
    """Per-``N`` medians of ``dist(0, spec H)``, ``|(phi, Psi_1)|`` and ``||H^{-1} phi|| / sqrt(N)``."""

    case: str
    ensemble: str
    epsilon: float
    n_grid: list
    median_dist: np.ndarray
    median_overlap: np.ndarray
    median_ratio: np.ndarray
    identity_violations: int
    n_samples: int
    seed: int
    fits: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "case": self.case,
            "ensemble": self.ensemble,
            "epsilon": self.epsilon,
            "n_grid": list(self.n_grid),
            "median_dist": self.median_dist.tolist(),
            "median_overlap": self.median_overlap.tolist(),
            "median_ratio": self.median_ratio.tolist(),
            "identity_violations": self.identity_violations,
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
            "n_samples": self.n_samples,
            "seed": self.seed,
        }

    def csv_rows(self):
        for i, n in enumerate(self.n_grid):
            for name, arr in (("dist", self.median_dist), ("overlap", self.median_overlap), ("ratio", self.median_ratio)):
                yield (f"{self.case}:median_{name}", str(n), float(arr[i]), "", "", self.n_samples, self.seed)
        for name, fit in self.fits.items():
            yield (f"{self.case}:exponent_{name}", "N", fit.exponent, fit.exponent - 2 * fit.stderr,
                   fit.exponent + 2 * fit.stderr, self.n_samples, self.seed)


def sharpness_verdict(result: SharpnessResult) -> tuple[bool, dict]:
    """Compare fitted exponents with :data:`SHARPNESS_WINDOWS`; returns ``(passed, details)``."""
    details = {}
    ok = True
    for name, (lo, hi) in SHARPNESS_WINDOWS[result.case].items():
        e = result.fits[name].exponent
        inside = lo <= e <= hi
        details[f"{name}_exponent"] = (e, (lo, hi), inside)
        ok &= inside
    if result.case == "proj_base":
        m = float(result.median_overlap.min())
        details["min_median_overlap"] = (m, MIN_PROJ_OVERLAP, m >= MIN_PROJ_OVERLAP)
        ok &= m >= MIN_PROJ_OVERLAP
    return bool(ok), details


def nearest_eigen_stats(w: np.ndarray, u: np.ndarray):
    """Per-draw ``dist(0, spec)``, ``|(e_1, Psi_1)|`` and ``||H^{-1} e_1||`` from stacked spectra."""
    idx = np.argmin(np.abs(w), axis=1)
    rows = np.arange(w.shape[0])
    dist = np.abs(w[rows, idx])
    first = u[:, 0, :]
    weights = (first * first.conj()).real
    overlap = np.sqrt(weights[rows, idx])
    vec, _, _, _ = kernels.resolvent_stats(w, weights, SINGULAR_RTOL)
    return dist, overlap, vec


def sharpness_scan(case: str, n_grid, cfg: MonteCarloConfig, epsilon: float = 0.1, ensemble=None) -> SharpnessResult:
    """Medians over ``cfg.n_samples`` draws for each ``N`` with ``phi = e_1``, plus power-law fits.

    ``case`` is ``zero_base`` (``A = 0``) or ``proj_base``
    (``A = N^(1/2+eps)`` times the projection onto ``e_1^perp``). The default
    ensemble is GUE for ``zero_base`` and GOE for ``proj_base``.
    """
    base_spec = _case_base(case, epsilon)
    grid = _check_grid(n_grid, "N grid", integer=True)
    if len(grid) < 3:
        raise InvalidInput("N grid needs at least 3 values")
    kind = Ensemble(ensemble) if ensemble is not None else _DEFAULT_ENSEMBLE[case]
    med = {"dist": [], "overlap": [], "ratio": []}
    violations = 0
    for n in grid:
        spec = EnsembleSpec(kind, n)
        sub = cfg.with_seed(derive_seed(cfg.seed, "sharpness", case, n))
        parts = spectral_map(base_spec.build(n), spec, sub, lambda w, u, a, b: nearest_eigen_stats(w, u), vectors=True)
        dist, overlap, vec = (np.concatenate([p[i] for p in parts]) for i in range(3))
        # ||H^-1 e1||^2 = sum |U_1i|^2 / lam_i^2 >= |U_1,nearest|^2 / dist^2
        with np.errstate(divide="ignore"):
            lower = overlap / dist
        violations += int(np.sum(vec < lower * (1.0 - 1e-10)))
        med["dist"].append(np.median(dist))
        med["overlap"].append(np.median(overlap))
        med["ratio"].append(np.median(vec / math.sqrt(n)))
    arrays = {k: np.array(v) for k, v in med.items()}
    fits = {k: fit_power_law(grid, v) for k, v in arrays.items()} if len(grid) >= 3 else {}
    return SharpnessResult(case, kind.value, float(epsilon), grid, arrays["dist"], arrays["overlap"],
                           arrays["ratio"], violations, cfg.n_samples, cfg.seed, fits)


# -- density of states at the band centre -----------------------------------------------

@dataclass(eq=False)
class DosScalingResult:
    """Expected eigenvalue count per unit length in a ``width_factor / sqrt(N)`` window at 0."""

    epsilon: float
    ensemble: str
    width_factor: float
    n_grid: list
    count_per_length: dict
    fits: dict
    n_samples: int
    seed: int

    @property
    def exponent_gap(self) -> float:
        return self.fits["zero_base"].exponent - self.fits["proj_base"].exponent

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "ensemble": self.ensemble,
            "width_factor": self.width_factor,
            "n_grid": list(self.n_grid),
            "count_per_length": {k: v.tolist() for k, v in self.count_per_length.items()},
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
            "exponent_gap": self.exponent_gap,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }

    def csv_rows(self):
        for case, arr in self.count_per_length.items():
            for n, c in zip(self.n_grid, arr):
                yield (f"{case}:count_per_length", str(n), float(c), "", "", self.n_samples, self.seed)
            fit = self.fits[case]
            yield (f"{case}:exponent", "N", fit.exponent, fit.exponent - 2 * fit.stderr,
                   fit.exponent + 2 * fit.stderr, self.n_samples, self.seed)


def dos_scaling_contrast(epsilon: float, n_grid, cfg: MonteCarloConfig, ensemble="goe",
                         width_factor: float = 1.0) -> DosScalingResult:
    """Fit ``E N(window) / |window|`` against ``N`` for ``zero_base`` and ``proj_base``.

    The un-normalized count density scales like ``N`` for ``A = 0`` and like
    ``sqrt(N)`` for the projection base.
    """
    grid = _check_grid(n_grid, "N grid", integer=True)
    if len(grid) < 3:
        raise InvalidInput("N grid needs at least 3 values")
    if not width_factor > 0:
        raise InvalidInput("width_factor must be positive")
    kind = Ensemble(ensemble)
    per_len, fits = {}, {}
    for case in CASES:
        base_spec = _case_base(case, epsilon)
        vals = []
        for n in grid:
            half = 0.5 * width_factor / math.sqrt(n)
            sub = cfg.with_seed(derive_seed(cfg.seed, "dos_scaling", case, n))
            dos = mc_dos(base_spec.build(n), EnsembleSpec(kind, n), [-half, half], sub)
            vals.append(dos.mean_count[0] / (2 * half))
        per_len[case] = np.array(vals)
        fits[case] = fit_power_law(grid, per_len[case])
    return DosScalingResult(float(epsilon), kind.value, float(width_factor), grid, per_len, fits,
                            cfg.n_samples, cfg.seed)


# -- Bernoulli counterexample ------------------------------------------------------------

@dataclass(eq=False)
class CounterexampleResult:
    """``P{||(A + V)^{-1}||_op >= t}`` per ``M``, unconditionally and on ``{V_11 = -1/sqrt(n)}``."""

    n: int
    t: float
    m_grid: list
    p_hat: np.ndarray
    ci: list
    p_hat_conditional: np.ndarray
    ci_conditional: list
    event_count: np.ndarray
    n_samples: int
    seed: int

    def to_dict(self):
        return {
            "n": self.n,
            "t": self.t,
            "m_grid": list(self.m_grid),
            "p_hat": self.p_hat.tolist(),
            "ci": [list(c) for c in self.ci],
            "p_hat_conditional": self.p_hat_conditional.tolist(),
            "ci_conditional": [list(c) for c in self.ci_conditional],
            "event_count": self.event_count.tolist(),
            "n_samples": self.n_samples,
            "seed": self.seed,
        }

    def csv_rows(self):
        for i, m in enumerate(self.m_grid):
            yield ("op_norm_tail", repr(m), float(self.p_hat[i]), self.ci[i][0], self.ci[i][1],
                   self.n_samples, self.seed)
            yield ("op_norm_tail|V11<0", repr(m), float(self.p_hat_conditional[i]), self.ci_conditional[i][0],
                   self.ci_conditional[i][1], int(self.event_count[i]), self.seed)


def bernoulli_counterexample(n: int, m_grid, t: float, cfg: MonteCarloConfig) -> CounterexampleResult:
    """Operator-norm tail for ``A = diag(1, M, ..., M) / sqrt(n)`` plus a Bernoulli-Wigner ``V``."""
    if n < 2:
        raise InvalidInput("n must be >= 2")
    if not t >= 1:
        raise InvalidInput("t must be >= 1")
    grid = _check_grid(m_grid, "M grid")
    p, ci, pc, cic, events = [], [], [], [], []
    for m in grid:
        a = np.asarray(CounterexampleDiag(m).build(n).data)
        seed = derive_seed(cfg.seed, "counterexample", n, m)

        def work(start, stop, a=a, seed=seed):
            v = sample_perturbations(Ensemble.BERNOULLI, n, seed, start, stop)
            v11 = v[:, 0, 0].copy()
            v += a
            try:
                w = np.linalg.eigvalsh(v)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError(n, float("nan")) from exc
            _, _, op, _ = kernels.resolvent_stats(w, None, SINGULAR_RTOL)
            return op, v11

        parts = map_chunks(work, cfg.n_samples, 256, cfg.max_workers)
        op = np.concatenate([q[0] for q in parts])
        v11 = np.concatenate([q[1] for q in parts])
        hit = op >= t
        event = v11 < 0
        k = int(hit.sum())
        p.append(k / cfg.n_samples)
        ci.append(clopper_pearson(k, cfg.n_samples, cfg.ci_level))
        ne = int(event.sum())
        events.append(ne)
        if ne:
            kc = int((hit & event).sum())
            pc.append(kc / ne)
            cic.append(clopper_pearson(kc, ne, cfg.ci_level))
        else:
            pc.append(float("nan"))
            cic.append((0.0, 1.0))
    return CounterexampleResult(n, float(t), grid, np.array(p), ci, np.array(pc), cic, np.array(events),
                                cfg.n_samples, cfg.seed)


# -- weak disorder -------------------------------------------------------------------------

@dataclass(eq=False)
class WeakDisorderResult:
    """Per-``lam`` sup density and fixed-vector tail constant for ``H = A + lam V``.

    Tail thresholds are ``t / lam`` so that ``tail_constant`` (``max_t t * ci_hi``)
    is comparable across ``lam``.
    """

    lambda_grid: list
    sup_density: np.ndarray
    tail_constant: np.ndarray
    dos: list
    tails: list
    fit: PowerLawFit | None
    n_samples: int
    seed: int

    def to_dict(self):
        return {
            "lambda_grid": list(self.lambda_grid),
            "sup_density": self.sup_density.tolist(),
            "tail_constant": self.tail_constant.tolist(),
            "fit": None if self.fit is None else self.fit.to_dict(),
            "n_samples": self.n_samples,
            "seed": self.seed,
        }

    def csv_rows(self):
        for lam, d, c in zip(self.lambda_grid, self.sup_density, self.tail_constant):
            yield ("sup_density", repr(lam), float(d), "", "", self.n_samples, self.seed)
            yield ("tail_constant", repr(lam), float(c), "", "", self.n_samples, self.seed)
        if self.fit is not None:
            f = self.fit
            yield ("sup_density_exponent", "lambda", f.exponent, f.exponent - 2 * f.stderr,
                   f.exponent + 2 * f.stderr, self.n_samples, self.seed)


def weak_disorder_scan(base, lambda_grid, cfg: MonteCarloConfig, ensemble="goe", partition=None,
                       t_grid=(2.0, 4.0, 8.0, 16.0), phi=None) -> WeakDisorderResult:
    """Run the density and fixed-vector estimators on ``A + lam V`` for each ``lam``.

    ``partition`` defaults to 60 equal cells on ``[-3, 3]``; ``phi`` to ``e_1``.
    """
    base = as_hermitian(base)
    n = base.n
    lams = _check_grid(lambda_grid, "lambda grid")
    edges = partition_edges(-3.0, 3.0, 60) if partition is None else np.asarray(partition, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    if phi is None:
        phi = np.zeros(n)
        phi[0] = 1.0
    kind = Ensemble(ensemble)
    sup, const, doses, tails = [], [], [], []
    for lam in lams:
        spec = EnsembleSpec(kind, n, lam)
        sub = cfg.with_seed(derive_seed(cfg.seed, "weak_disorder", lam))
        dos: DosEstimate = mc_dos(base, spec, edges, sub)
        ratios, singular = fixed_vector_ratios(base, spec, phi, sub)
        counts = kernels.tail_counts(ratios, t / lam, True)
        tail = TailCurve("fixed_vector_rescaled", t, counts, sub.n_samples, sub.seed, sub.ci_level,
                         True, int(singular.sum()))
        doses.append(dos)
        tails.append(tail)
        sup.append(dos.sup_density())
        const.append(tail.max_scaled("ci_hi"))
    sup = np.array(sup)
    fit = fit_power_law(lams, sup) if len(lams) >= 3 and np.all(sup > 0) else None
    return WeakDisorderResult(lams, sup, np.array(const), doses, tails, fit, cfg.n_samples, cfg.seed)
