"""Exception hierarchy.

Precondition failures derive from ``ValueError`` (CLI exit code 2); numerical
failures derive from ``NumericalError`` (CLI exit code 3).
"""


class GapwitError(Exception):
    """Base class for all package errors."""


class PreconditionError(GapwitError, ValueError):
    """An argument violates an operation's precondition."""


class InvalidSizeError(PreconditionError):
    pass


class CapacityError(PreconditionError):
    """Requested realization does not fit the configured storage cap."""


class NonHermitianError(PreconditionError):
    pass


class MappingError(PreconditionError):
    """A Pauli term has no quadratic Jordan-Wigner image."""


class NotACuspError(PreconditionError):
    """State is not (approximately) a simultaneous eigenvector."""


class NumericalError(GapwitError, ArithmeticError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message, best_residual=float("nan")):
        super().__init__(message)
        self.best_residual = best_residual


class InconclusiveError(NumericalError):
    """All computed levels are degenerate with the ground level."""


class ResolutionError(NumericalError):
    """Boundary sampling too coarse for the requested cusp resolution."""


class ParticleHoleError(NumericalError):
    """BdG spectrum violates the particle-hole pairing."""
