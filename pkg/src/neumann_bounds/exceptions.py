"""Exception types shared across the package."""


class NeumannBoundsError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateDomain(NeumannBoundsError, ValueError):
    """Domain parameters describe a collapsed or invalid shape."""


class NotSPD(NeumannBoundsError):
    """A pulled-back coefficient matrix failed the positive-definiteness check."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class NotConstantWidth(NeumannBoundsError, ValueError):
    """A constant-width bound was requested for a strip whose width varies."""


class SolverFailure(NeumannBoundsError, RuntimeError):
    """The eigensolver did not reach the residual tolerance."""


class CoverageGap(NeumannBoundsError, AssertionError):
    """A parameter point is covered by none of the three certificate cases."""
