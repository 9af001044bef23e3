"""Exception hierarchy shared by all tetrasynth modules."""


class TetraSynthError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(TetraSynthError, ValueError):
    """Input data is malformed (non-finite entries, bad shapes, bad nodes)."""


class PoleError(TetraSynthError, ZeroDivisionError):
    """A rational expression was evaluated at (or too near) a pole."""


class BoundaryPoleError(PoleError):
    """The resolvent of a colligation is singular at the requested point."""


class OutOfDomainError(TetraSynthError, ValueError):
    """An evaluation point lies outside the supported domain."""


class ContractViolationError(TetraSynthError, ValueError):
    """A documented precondition of an operation does not hold."""


class NotIsometricError(TetraSynthError):
    """Two vector families do not have matching Gram matrices.

    Attributes
    ----------
    pair : tuple of int
        Indices ``(i, j)`` of the worst-violating Gram entry.
    mismatch : float
        Absolute size of that violation.
    """

    def __init__(self, message, pair=None, mismatch=None):
        super().__init__(message)
        self.pair = pair
        self.mismatch = mismatch


class InfeasibleError(TetraSynthError):
    """Interpolation data is provably not solvable."""


class NumericalFailureError(TetraSynthError):
    """A construction finished but its verification failed.

    The offending verification report is kept in ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class HypothesisViolationError(ContractViolationError):
    """Data violate a hypothesis required by the reduction (e.g. w12*w21 == 0)."""


class RescalingDegenerateError(NumericalFailureError):
    """A diagonal rescaling cannot be formed because a parameter vanishes."""
