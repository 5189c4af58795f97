"""Deformed Gaussian ensembles ``H = A + lam V`` and Monte Carlo checks of
their resolvent, density-of-states and eigenvalue-counting bounds."""

from rmt_lab.kernels import BACKEND
from rmt_lab.errors import (
    BlockSingular,
    ConvergenceError,
    InvalidInput,
    NearSingular,
    NumericalError,
    RmtLabError,
)
from rmt_lab.linalg import (
    HermitianMatrix,
    Spectrum,
    apply_inverse,
    complex_to_real_embed,
    eigh,
    inverse_norms,
    read_hmat,
    restrict_orthogonal,
    write_hmat,
)
from rmt_lab.rng import RngStream
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
    sample_goe,
    sample_gue,
    sample_wigner_bernoulli,
    uniform_sphere,
)
from rmt_lab.montecarlo import (
    DosEstimate,
    FactorialMomentResult,
    MonteCarloConfig,
    TailCurve,
    clopper_pearson,
    fit_power_law,
    mc_counting_tail,
    mc_dos,
    mc_factorial_moment,
    mc_tail_fixed_vector,
    mc_tail_norms,
)

__version__ = "0.1.0"
