"""Deterministic Monte Carlo estimators for deformed ensembles ``H = A + lam V``.

Every estimator draws ``V`` for sample ``i`` from ``RngStream(cfg.seed, i)``,
splits the sample range into fixed-size chunks, maps the chunks (optionally
on worker threads) and concatenates per-sample statistics in chunk order.
Tallies and means are taken over the concatenated arrays, so outputs are
bit-identical for any ``max_workers``.

Draws whose spectrum is numerically singular are counted as exceeding every
norm threshold; their number is reported as ``n_singular``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from rmt_lab import kernels
from rmt_lab.ensembles import EnsembleSpec, sample_perturbations
from rmt_lab.errors import ConvergenceError, InvalidInput
from rmt_lab.linalg import SINGULAR_RTOL, as_hermitian

__all__ = [
    "MonteCarloConfig",
    "TailCurve",
    "DosEstimate",
    "FactorialMomentResult",
    "PowerLawFit",
    "clopper_pearson",
    "fit_power_law",
    "map_chunks",
    "spectral_map",
    "mc_tail_fixed_vector",
    "mc_tail_norms",
    "mc_dos",
    "mc_counting_tail",
    "mc_factorial_moment",
    "partition_edges",
    "wegner_constant",
]

THREADS_ENV = "RMT_LAB_THREADS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class MonteCarloConfig:
    """Sample count, seed and execution settings.

    ``max_workers`` defaults to ``$RMT_LAB_THREADS`` (or 1); it never affects
    results.
    """

    n_samples: int
    seed: int = 0
    max_workers: int | None = None
    ci_level: float = 0.95

    def __post_init__(self):
        if not isinstance(self.n_samples, (int, np.integer)) or self.n_samples < 1:
            raise InvalidInput(f"n_samples must be a positive integer, got {self.n_samples!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise InvalidInput(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.max_workers is None:
            object.__setattr__(self, "max_workers", default_workers())
        elif self.max_workers < 1:
            raise InvalidInput("max_workers must be >= 1")
        if not 0.0 < self.ci_level < 1.0:
            raise InvalidInput("ci_level must lie in (0, 1)")

    def with_seed(self, seed: int) -> "MonteCarloConfig":
        return MonteCarloConfig(self.n_samples, seed, self.max_workers, self.ci_level)

    def with_samples(self, n_samples: int) -> "MonteCarloConfig":
        return MonteCarloConfig(n_samples, self.seed, self.max_workers, self.ci_level)


# -- statistics helpers --------------------------------------------------------

def clopper_pearson(successes: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval by Beta-quantile inversion."""
    if n < 1 or not 0 <= successes <= n:
        raise InvalidInput(f"need 0 <= successes <= n, n >= 1 (got {successes}, {n})")
    alpha = 1.0 - level
    lo = 0.0 if successes == 0 else float(stats.beta.ppf(alpha / 2, successes, n - successes + 1))
    hi = 1.0 if successes == n else float(stats.beta.ppf(1 - alpha / 2, successes + 1, n - successes))
    return lo, hi


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float
    stderr: float

    def predict(self, x):
        return np.exp(self.intercept) * np.asarray(x, dtype=float) ** self.exponent

    def to_dict(self):
        return {"exponent": self.exponent, "intercept": self.intercept, "stderr": self.stderr}


def fit_power_law(x, y) -> PowerLawFit:
    """Least-squares line through ``(log x, log y)``; returns slope, intercept and slope stderr."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise InvalidInput("need at least 3 (x, y) pairs")
    if not (np.all(x > 0) and np.all(y > 0) and np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInput("power-law fit needs finite positive x and y")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise InvalidInput("x values must not all coincide")
    res = stats.linregress(lx, ly)
    return PowerLawFit(float(res.slope), float(res.intercept), float(res.stderr))


def _fmt_interval(iv):
    return f"[{float(iv[0])!r},{float(iv[1])!r}]"


@dataclass(eq=False)
class TailCurve:
    """Exceedance probabilities ``P{stat >= t}`` (or ``P{stat <= t}`` if ``upper`` is False)."""

    statistic: str
    thresholds: np.ndarray
    counts: np.ndarray
    n_samples: int
    seed: int
    ci_level: float = 0.95
    upper: bool = True
    n_singular: int = 0
    p_hat: np.ndarray = field(init=False)
    ci_lo: np.ndarray = field(init=False)
    ci_hi: np.ndarray = field(init=False)

    def __post_init__(self):
        self.thresholds = np.asarray(self.thresholds, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.p_hat = self.counts / self.n_samples
        ci = [clopper_pearson(int(c), self.n_samples, self.ci_level) for c in self.counts]
        self.ci_lo = np.array([c[0] for c in ci])
        self.ci_hi = np.array([c[1] for c in ci])

    def max_scaled(self, which="ci_hi") -> float:
        """``max_t t * value(t)``; the empirical constant in a ``C / t`` bound."""
        return float(np.max(self.thresholds * getattr(self, which)))

    def max_ratio(self, which="ci_lo") -> float:
        """``max_t value(t) / t``; the empirical constant in a ``C t`` bound."""
        return float(np.max(getattr(self, which) / self.thresholds))

    def decay_fit(self) -> PowerLawFit | None:
        """Power-law fit of ``p_hat`` against the threshold over cells with ``p_hat > 0``."""
        keep = self.p_hat > 0
        if keep.sum() < 3:
            return None
        return fit_power_law(self.thresholds[keep], self.p_hat[keep])

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "direction": ">=" if self.upper else "<=",
            "thresholds": self.thresholds.tolist(),
            "counts": self.counts.tolist(),
            "p_hat": self.p_hat.tolist(),
            "ci_lo": self.ci_lo.tolist(),
            "ci_hi": self.ci_hi.tolist(),
            "n_samples": self.n_samples,
            "n_singular": self.n_singular,
            "ci_level": self.ci_level,
            "seed": self.seed,
        }

    def csv_rows(self):
        for t, p, lo, hi in zip(self.thresholds, self.p_hat, self.ci_lo, self.ci_hi):
            yield (self.statistic, repr(float(t)), float(p), float(lo), float(hi), self.n_samples, self.seed)


@dataclass(eq=False)
class DosEstimate:
    """Mean eigenvalue counts over a partition and the implied density ``E N(I) / (n |I|)``.

    Confidence bounds on the density use the normal approximation
    ``mean +- z * stderr`` (clipped at 0) with ``z`` from ``ci_level``.
    ``occupied`` is the fraction of draws with at least one eigenvalue in
    each cell.
    """

    edges: np.ndarray
    mean_count: np.ndarray
    count_stderr: np.ndarray
    occupied: np.ndarray
    n: int
    n_samples: int
    seed: int
    ci_level: float = 0.95
    density: np.ndarray = field(init=False)
    density_stderr: np.ndarray = field(init=False)
    ci_lo: np.ndarray = field(init=False)
    ci_hi: np.ndarray = field(init=False)

    def __post_init__(self):
        widths = np.diff(self.edges)
        scale = np.where(widths > 0, self.n * widths, np.nan)
        z = float(stats.norm.ppf(0.5 + self.ci_level / 2))
        with np.errstate(invalid="ignore", divide="ignore"):
            self.density = np.where(widths > 0, self.mean_count / scale, 0.0)
            self.density_stderr = np.where(widths > 0, self.count_stderr / scale, 0.0)
        self.ci_lo = np.maximum(self.density - z * self.density_stderr, 0.0)
        self.ci_hi = self.density + z * self.density_stderr

    @property
    def widths(self):
        return np.diff(self.edges)

    def sup_density(self) -> float:
        return float(np.max(self.density))

    def to_dict(self):
        return {
            "edges": self.edges.tolist(),
            "mean_count": self.mean_count.tolist(),
            "count_stderr": self.count_stderr.tolist(),
            "occupied": self.occupied.tolist(),
            "density": self.density.tolist(),
            "density_stderr": self.density_stderr.tolist(),
            "ci_lo": self.ci_lo.tolist(),
            "ci_hi": self.ci_hi.tolist(),
            "n": self.n,
            "n_samples": self.n_samples,
            "ci_level": self.ci_level,
            "seed": self.seed,
        }

    def csv_rows(self):
        for a, b, d, lo, hi in zip(self.edges[:-1], self.edges[1:], self.density, self.ci_lo, self.ci_hi):
            yield ("density", _fmt_interval((a, b)), float(d), float(lo), float(hi), self.n_samples, self.seed)


@dataclass(eq=False)
class FactorialMomentResult:
    """``E[N(I_1) (N(I_2) - 1)_+ ... (N(I_k) - k + 1)_+]`` with its standard error."""

    intervals: list
    estimate: float
    stderr: float
    n_samples: int
    seed: int
    ci_level: float = 0.95

    @property
    def k(self) -> int:
        return len(self.intervals)

    @property
    def ci(self):
        z = float(stats.norm.ppf(0.5 + self.ci_level / 2))
        return max(0.0, self.estimate - z * self.stderr), self.estimate + z * self.stderr

    def to_dict(self):
        lo, hi = self.ci
        return {
            "intervals": [list(map(float, iv)) for iv in self.intervals],
            "k": self.k,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "ci_lo": lo,
            "ci_hi": hi,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }

    def csv_rows(self):
        lo, hi = self.ci
        label = ";".join(_fmt_interval(iv) for iv in self.intervals)
        yield ("factorial_moment", label, self.estimate, lo, hi, self.n_samples, self.seed)


# -- parallel driver -----------------------------------------------------------

def map_chunks(fn, total: int, chunk: int, max_workers: int = 1) -> list:
    """Apply ``fn(start, stop)`` to consecutive ranges; results come back in range order."""
    ranges = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    if max_workers <= 1 or len(ranges) <= 1:
        return [fn(a, b) for a, b in ranges]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


def _chunk_size(n: int, field: str) -> int:
    per = n * n * (16 if field == "complex" else 8)
    return int(max(1, min(256, (16 << 20) // per)))


def _base_array(base, spec: EnsembleSpec) -> np.ndarray:
    base = as_hermitian(base)
    if base.n != spec.n:
        raise InvalidInput(f"base has dimension {base.n}, ensemble has {spec.n}")
    if base.field == "complex" and spec.field == "real":
        raise InvalidInput(f"complex base matrix cannot be combined with {spec.kind.value}")
    a = np.asarray(base.data)
    return a.astype(np.complex128) if spec.field == "complex" else a


def spectral_map(base, spec: EnsembleSpec, cfg: MonteCarloConfig, reducer, vectors: bool = False) -> list:
    """Sample ``H_i = A + lam V_i`` for ``i < cfg.n_samples`` and reduce each chunk.

    ``reducer(eigenvalues, eigenvectors, start, stop)`` receives stacked
    spectra (``eigenvectors`` is None unless ``vectors``) and returns any
    per-chunk object; the list of results is in chunk order.
    """
    a = _base_array(base, spec)
    n = spec.n

    def work(start, stop):
        h = sample_perturbations(spec.kind, n, cfg.seed, start, stop)
        if spec.lam != 1.0:
            h *= spec.lam
        h += a
        try:
            if vectors:
                w, u = np.linalg.eigh(h)
            else:
                w, u = np.linalg.eigvalsh(h), None
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(n, float("nan"), f"eigensolver failed for n={n} in samples {start}..{stop}") from exc
        return reducer(w, u, start, stop)

    return map_chunks(work, cfg.n_samples, _chunk_size(n, spec.field), cfg.max_workers)


def _check_thresholds(t_grid, minimum=1.0):
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size == 0 or not np.all(np.isfinite(t)):
        raise InvalidInput("threshold grid must be a non-empty list of finite numbers")
    if np.any(np.diff(t) < 0):
        raise InvalidInput("thresholds must be ascending")
    if minimum is not None and np.any(t < minimum):
        raise InvalidInput(f"thresholds must be >= {minimum}")
    return t


# -- resolvent tail estimators ------------------------------------------------

def fixed_vector_ratios(base, spec, phi, cfg):
    """Per-draw ``||H^{-1} phi|| / (sqrt(n) ||phi||)`` (inf for singular draws) and singular flags."""
    phi = np.asarray(phi)
    if phi.shape != (spec.n,):
        raise InvalidInput(f"phi has shape {phi.shape}, expected ({spec.n},)")
    if np.iscomplexobj(phi) and spec.field == "real":
        raise InvalidInput("complex phi given for a real ensemble")
    norm = float(np.linalg.norm(phi))
    if norm == 0.0 or not math.isfinite(norm):
        raise InvalidInput("phi must be a finite non-zero vector")
    scale = math.sqrt(spec.n) * norm

    def reduce(w, u, start, stop):
        proj = np.einsum("sij,i->sj", u.conj(), phi)
        weights = (proj * proj.conj()).real
        vec, _, _, sing = kernels.resolvent_stats(w, weights, SINGULAR_RTOL)
        return vec / scale, sing

    parts = spectral_map(base, spec, cfg, reduce, vectors=True)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _tail(statistic, values, singular, t, cfg, upper=True):
    counts = kernels.tail_counts(values, t, upper)
    return TailCurve(statistic, t, counts, cfg.n_samples, cfg.seed, cfg.ci_level, upper, int(np.sum(singular)))


def mc_tail_fixed_vector(base, spec: EnsembleSpec, phi, t_grid, cfg: MonteCarloConfig) -> TailCurve:
    """Estimate ``P{||H^{-1} phi|| >= t sqrt(n) ||phi||}`` on a grid of ``t >= 1``."""
    t = _check_thresholds(t_grid)
    ratios, singular = fixed_vector_ratios(base, spec, phi, cfg)
    return _tail("fixed_vector", ratios, singular, t, cfg)


def inverse_norm_samples(base, spec, cfg):
    """Per-draw ``(||H^{-1}||_F / n, ||H^{-1}||_op / n, singular)``."""

    def reduce(w, u, start, stop):
        _, frob, op, sing = kernels.resolvent_stats(w, None, SINGULAR_RTOL)
        return frob / spec.n, op / spec.n, sing

    parts = spectral_map(base, spec, cfg, reduce)
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))


def mc_tail_norms(base, spec: EnsembleSpec, t_grid, cfg: MonteCarloConfig) -> tuple[TailCurve, TailCurve]:
    """Tails of ``||H^{-1}||_F`` and ``||H^{-1}||_op`` at thresholds ``t n``, from the same draws."""
    t = _check_thresholds(t_grid)
    frob, op, singular = inverse_norm_samples(base, spec, cfg)
    return _tail("frobenius", frob, singular, t, cfg), _tail("operator", op, singular, t, cfg)


# -- counting statistics -------------------------------------------------------

def partition_edges(lo: float, hi: float, cells: int) -> np.ndarray:
    if cells < 1 or not hi > lo:
        raise InvalidInput("partition needs hi > lo and at least one cell")
    return np.linspace(lo, hi, cells + 1)


def _check_edges(edges):
    e = np.asarray(edges, dtype=float).ravel()
    if e.size < 2 or not np.all(np.isfinite(e)) or np.any(np.diff(e) < 0):
        raise InvalidInput("partition edges must be at least two ascending finite numbers")
    return e


def _check_interval(iv):
    a, b = (float(x) for x in iv)
    if not (math.isfinite(a) and math.isfinite(b)) or b < a:
        raise InvalidInput(f"bad interval {iv!r}")
    return a, b


def count_samples(base, spec, edges, cfg) -> np.ndarray:
    """Per-draw eigenvalue counts, shape ``(n_samples, cells)``."""
    edges = _check_edges(edges)
    parts = spectral_map(base, spec, cfg, lambda w, u, a, b: kernels.interval_counts(w, edges))
    return np.concatenate(parts, axis=0)


def mc_dos(base, spec: EnsembleSpec, partition, cfg: MonteCarloConfig) -> DosEstimate:
    """Mean eigenvalue count per cell of ``partition`` (half-open cells, last one closed)."""
    edges = _check_edges(partition)
    counts = count_samples(base, spec, edges, cfg)
    mean = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(cfg.n_samples) if cfg.n_samples > 1 else np.zeros_like(mean)
    occupied = (counts >= 1).mean(axis=0)
    return DosEstimate(edges, mean, se, occupied, spec.n, cfg.n_samples, cfg.seed, cfg.ci_level)


def mc_counting_tail(base, spec: EnsembleSpec, interval, k: int, cfg: MonteCarloConfig) -> TailCurve:
    """``P{N(I) >= k}`` for the closed interval ``I`` as a one-point curve."""
    if k < 1:
        raise InvalidInput("k must be >= 1")
    a, b = _check_interval(interval)
    counts = count_samples(base, spec, [a, b], cfg)[:, 0]
    return _tail(f"count>=k in {_fmt_interval((a, b))}", counts.astype(float), np.zeros(0), np.array([float(k)]), cfg)


def factorial_products(counts: np.ndarray) -> np.ndarray:
    """Row-wise ``c_1 (c_2 - 1)_+ ... (c_k - k + 1)_+`` for counts of shape ``(S, k)``."""
    shifted = np.clip(counts - np.arange(counts.shape[1]), 0, None)
    return np.prod(shifted.astype(float), axis=1)


def mc_factorial_moment(base, spec: EnsembleSpec, intervals, cfg: MonteCarloConfig) -> FactorialMomentResult:
    """Factorial moment over closed intervals, in the order given."""
    ivs = [_check_interval(iv) for iv in intervals]
    if not ivs:
        raise InvalidInput("need at least one interval")

    def reduce(w, u, start, stop):
        return np.concatenate([kernels.interval_counts(w, [a, b]) for a, b in ivs], axis=1)

    counts = np.concatenate(spectral_map(base, spec, cfg, reduce), axis=0)
    prod = factorial_products(counts)
    se = float(prod.std(ddof=1) / math.sqrt(cfg.n_samples)) if cfg.n_samples > 1 else 0.0
    return FactorialMomentResult(ivs, float(prod.mean()), se, cfg.n_samples, cfg.seed, cfg.ci_level)


def wegner_constant(dos: DosEstimate) -> float:
    """Smallest ``C`` with ``E N(I) <= C n |I|`` on every cell (i.e. the sup density)."""
    return dos.sup_density()
