"""GOE, GUE and Bernoulli-Wigner samplers and the deterministic base matrices.

Entries are drawn from their marginal laws rather than by symmetrizing a
full Gaussian matrix. For ``V = (X + X^*) / sqrt(2n)``:

* GOE: ``V_ii ~ N(0, 2/n)``, ``V_ij ~ N(0, 1/n)`` for ``i < j``;
* GUE: ``V_ii ~ N(0, 1/n)`` real, ``Re V_ij, Im V_ij ~ N(0, 1/(2n))``;
* Bernoulli: every upper-triangle entry is ``+-1/sqrt(n)`` with a fair coin.

Draw order within a stream is fixed: the ``n`` diagonal variates, then the
strict upper triangle in row-major order (for GUE all real parts, then all
imaginary parts).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from rmt_lab.errors import InvalidInput
from rmt_lab.linalg import HermitianMatrix, as_hermitian, read_hmat
from rmt_lab.rng import RngStream, as_generator

__all__ = [
    "Ensemble",
    "EnsembleSpec",
    "BaseMatrixSpec",
    "Zero",
    "ScalarIdentity",
    "ProjComplement",
    "CounterexampleDiag",
    "RandomDiagonal",
    "FromFile",
    "parse_base",
    "build_base",
    "sample_goe",
    "sample_gue",
    "sample_wigner_bernoulli",
    "sample_ensemble",
    "sample_perturbations",
    "sample_deformed",
    "uniform_sphere",
]


class Ensemble(str, Enum):
    GOE = "goe"
    GUE = "gue"
    BERNOULLI = "bernoulli"

    @property
    def field(self) -> str:
        return "complex" if self is Ensemble.GUE else "real"


@dataclass(frozen=True)
class EnsembleSpec:
    """Random perturbation ``lam * V`` with ``V`` from ``kind``."""

    kind: Ensemble
    n: int
    lam: float = 1.0

    def __post_init__(self):
        try:
            kind = Ensemble(self.kind)
        except ValueError:
            raise InvalidInput(f"unknown ensemble {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidInput(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not math.isfinite(self.lam) or self.lam < 0:
            raise InvalidInput(f"lambda must be finite and >= 0, got {self.lam!r}")
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def field(self) -> str:
        return self.kind.field


# -- perturbation samplers ---------------------------------------------------

def _fill(kind: Ensemble, n: int, gen: np.random.Generator, out: np.ndarray, iu) -> None:
    m = iu[0].size
    if kind is Ensemble.GOE:
        d = gen.standard_normal(n) * math.sqrt(2.0 / n)
        o = gen.standard_normal(m) * math.sqrt(1.0 / n)
        out[iu] = o
        out.T[iu] = o
    elif kind is Ensemble.GUE:
        d = gen.standard_normal(n) * math.sqrt(1.0 / n)
        s = math.sqrt(0.5 / n)
        re = gen.standard_normal(m) * s
        im = gen.standard_normal(m) * s
        out[iu] = re + 1j * im
        out.T[iu] = re - 1j * im
    else:
        bits = gen.integers(0, 2, size=n + m)
        vals = (2.0 * bits - 1.0) / math.sqrt(n)
        d = vals[:n]
        out[iu] = vals[n:]
        out.T[iu] = vals[n:]
    out[np.diag_indices(n)] = d


def sample_ensemble(kind, n: int, rng) -> HermitianMatrix:
    kind = Ensemble(kind)
    if n < 1:
        raise InvalidInput("n must be >= 1")
    out = np.zeros((n, n), dtype=np.complex128 if kind is Ensemble.GUE else np.float64)
    _fill(kind, n, as_generator(rng), out, np.triu_indices(n, 1))
    return HermitianMatrix(out)


def sample_goe(n: int, rng) -> HermitianMatrix:
    """GOE matrix of dimension ``n``, normalized so the spectrum fills ``[-2, 2]``."""
    return sample_ensemble(Ensemble.GOE, n, rng)


def sample_gue(n: int, rng) -> HermitianMatrix:
    """GUE matrix of dimension ``n``, normalized so the spectrum fills ``[-2, 2]``."""
    return sample_ensemble(Ensemble.GUE, n, rng)


def sample_wigner_bernoulli(n: int, rng) -> HermitianMatrix:
    """Symmetric matrix with independent ``+-1/sqrt(n)`` upper-triangle entries."""
    return sample_ensemble(Ensemble.BERNOULLI, n, rng)


def sample_perturbations(kind, n: int, seed: int, start: int, stop: int) -> np.ndarray:
    """Stack of ``V`` draws for sample indices ``start..stop-1`` (stream index = sample index).

    Row ``k`` equals ``sample_ensemble(kind, n, RngStream(seed, start + k)).data``.
    """
    kind = Ensemble(kind)
    dtype = np.complex128 if kind is Ensemble.GUE else np.float64
    out = np.zeros((stop - start, n, n), dtype=dtype)
    iu = np.triu_indices(n, 1)
    for k in range(stop - start):
        _fill(kind, n, RngStream(seed, start + k).generator(), out[k], iu)
    return out


def sample_deformed(base, spec: EnsembleSpec, rng) -> HermitianMatrix:
    """``H = base + lam * V`` with a fresh ``V``.

    A real base combined with GUE is promoted to complex.
    """
    base = as_hermitian(base)
    if base.n != spec.n:
        raise InvalidInput(f"base has dimension {base.n}, ensemble has {spec.n}")
    if base.field == "complex" and spec.field == "real":
        raise InvalidInput(f"complex base matrix cannot be combined with {spec.kind.value}")
    v = sample_ensemble(spec.kind, spec.n, rng)
    return HermitianMatrix(base.data + spec.lam * v.data)


def uniform_sphere(n: int, field: str, rng) -> np.ndarray:
    """Uniform unit vector in ``R^n`` or ``C^n`` as ``g / ||g||``."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    gen = as_generator(rng)
    while True:
        if field == "real":
            g = gen.standard_normal(n)
        elif field == "complex":
            g = gen.standard_normal(n) + 1j * gen.standard_normal(n)
        else:
            raise InvalidInput(f"unknown field {field!r}")
        norm = np.linalg.norm(g)
        if norm > 0:
            return g / norm


# -- deterministic base matrices ---------------------------------------------

class BaseMatrixSpec:
    """Declarative description of the deterministic deformation ``A``."""

    def build(self, n: int) -> HermitianMatrix:
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(BaseMatrixSpec):
    def build(self, n):
        return HermitianMatrix(np.zeros((n, n)))

    def label(self):
        return "zero"


@dataclass(frozen=True)
class ScalarIdentity(BaseMatrixSpec):
    energy: float

    def build(self, n):
        return HermitianMatrix(self.energy * np.eye(n))

    def label(self):
        return f"scalar:{self.energy!r}"


@dataclass(frozen=True)
class ProjComplement(BaseMatrixSpec):
    """``n^(1/2 + epsilon)`` times the projection onto ``e_1^perp``."""

    epsilon: float = 0.1

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise InvalidInput("epsilon must be >= 0")

    def build(self, n):
        d = np.full(n, float(n) ** (0.5 + self.epsilon))
        d[0] = 0.0
        return HermitianMatrix(np.diag(d))

    def label(self):
        return f"proj:{self.epsilon!r}"


@dataclass(frozen=True)
class CounterexampleDiag(BaseMatrixSpec):
    """``diag(1, M, ..., M) / sqrt(n)``."""

    M: float

    def build(self, n):
        d = np.full(n, float(self.M))
        d[0] = 1.0
        return HermitianMatrix(np.diag(d / math.sqrt(n)))

    def label(self):
        return f"counterexample:{self.M!r}"


@dataclass(frozen=True)
class RandomDiagonal(BaseMatrixSpec):
    """Diagonal with iid uniform ``[low, high)`` entries drawn from ``RngStream(seed, 0)``."""

    low: float = 0.0
    high: float = 1.0
    seed: int = 0

    def build(self, n):
        d = RngStream(self.seed, 0).generator().uniform(self.low, self.high, n)
        return HermitianMatrix(np.diag(d))

    def label(self):
        return f"randdiag:{self.low!r},{self.high!r},{self.seed}"


@dataclass(frozen=True)
class FromFile(BaseMatrixSpec):
    path: str

    def build(self, n):
        return read_hmat(self.path, n)

    def label(self):
        return f"file:{self.path}"


def build_base(spec: BaseMatrixSpec, n: int) -> HermitianMatrix:
    if n < 1:
        raise InvalidInput("n must be >= 1")
    return spec.build(n)


def parse_base(text: str) -> BaseMatrixSpec:
    """Parse ``zero``, ``scalar:E``, ``proj:eps``, ``counterexample:M``,
    ``randdiag:low,high,seed`` or ``file:PATH``."""
    name, _, arg = str(text).partition(":")
    try:
        if name == "zero" and not arg:
            return Zero()
        if name == "scalar":
            return ScalarIdentity(float(arg))
        if name == "proj":
            return ProjComplement(float(arg) if arg else 0.1)
        if name == "counterexample":
            return CounterexampleDiag(float(arg))
        if name == "randdiag":
            parts = arg.split(",") if arg else []
            low = float(parts[0]) if len(parts) > 0 else 0.0
            high = float(parts[1]) if len(parts) > 1 else 1.0
            seed = int(parts[2]) if len(parts) > 2 else 0
            return RandomDiagonal(low, high, seed)
        if name == "file" and arg:
            return FromFile(arg)
    except ValueError as exc:
        raise InvalidInput(f"bad base matrix spec {text!r}: {exc}") from None
    raise InvalidInput(f"unknown base matrix spec {text!r}")
