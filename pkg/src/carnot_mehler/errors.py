"""Exception hierarchy shared by the whole package."""


class CarnotError(Exception):
    """Base class for all package errors."""


class AlgebraError(CarnotError):
    """Raised when a structure-constant table fails validation."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class AntisymmetryViolation(AlgebraError):
    pass


class JacobiViolation(AlgebraError):
    pass


class GradingViolation(AlgebraError):
    pass


class NotStratified(AlgebraError):
    pass


class AlgebraMismatch(CarnotError):
    """Operands live on different algebras (or polynomial rings)."""


class NonRealInput(CarnotError):
    pass


class NotOnCircle(CarnotError):
    """A (c, s) pair with c**2 + s**2 != 1."""


class EigenCheckFailed(CarnotError):
    """Internal consistency failure: a constructed eigenvector is not one."""


class IdentityViolated(CarnotError):
    pass


class DegenerateGram(CarnotError):
    pass


class TruncationInsufficient(CarnotError):
    pass


class ZeroRank(CarnotError):
    pass


class EigenToleranceExceeded(CarnotError):
    pass


class UnknownGroup(CarnotError):
    pass
