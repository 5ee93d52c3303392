"""Exception types shared across the package.

Input problems raise plain ValueError.  Numerical failures (an iteration
that did not converge, a sampling pass that produced nothing usable, a
quadrature over a bad region) raise NumericalError subclasses so callers
can tell the two classes apart.
"""


class NumericalError(RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""


class EigenSolverError(NumericalError):
    """Jacobi sweeps did not reduce the off-diagonal mass below tolerance."""

    def __init__(self, message: str, *, sweeps: int | None = None,
                 offdiag: float | None = None, threshold: float | None = None):
        super().__init__(message)
        self.sweeps = sweeps
        self.offdiag = offdiag
        self.threshold = threshold


class SamplingError(NumericalError):
    """Hessian sampling produced no usable curvature candidates."""

    def __init__(self, message: str, *, per_tier_counts: tuple[int, ...] = ()):
        super().__init__(message)
        self.per_tier_counts = per_tier_counts


class IntegrationError(NumericalError):
    """Quadrature hit a region where the integrand is undefined."""
