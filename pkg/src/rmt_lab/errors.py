"""Exception hierarchy."""


class RmtLabError(Exception):
    """Base class for all errors raised by rmt_lab."""


class InvalidInput(RmtLabError, ValueError):
    """Malformed user input: bad shapes, fields, files or parameters."""


class NumericalError(RmtLabError, ArithmeticError):
    """A numerical routine could not produce a trustworthy answer."""


class NearSingular(NumericalError):
    """The spectrum has an eigenvalue below the singularity tolerance.

    Attributes
    ----------
    min_abs_eigenvalue : float
        Smallest eigenvalue modulus of the offending matrix.
    """

    def __init__(self, min_abs_eigenvalue, message=None):
        self.min_abs_eigenvalue = float(min_abs_eigenvalue)
        super().__init__(
            message or f"matrix is numerically singular: min |eigenvalue| = {self.min_abs_eigenvalue:.3e}"
        )


class BlockSingular(NearSingular):
    """The lower-right block of a Schur decomposition is not invertible."""


class ConvergenceError(NumericalError):
    """The eigensolver did not converge or failed its reconstruction check."""

    def __init__(self, n, residual, message=None):
        self.n = int(n)
        self.residual = float(residual)
        super().__init__(
            message or f"eigensolver failed for n={self.n} (reconstruction residual {self.residual:.3e})"
        )
