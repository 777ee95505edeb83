"""Exception hierarchy shared by all modules."""


class ToricQEError(Exception):
    """Base class for every error raised by this package."""


class NonConvergence(ToricQEError):
    pass


class NoSignChange(ToricQEError, ValueError):
    pass


class DegenerateLeadingCoefficient(ToricQEError, ValueError):
    pass


class SingularJacobian(ToricQEError):
    pass


class OutOfRangeClassParameter(ToricQEError, ValueError):
    pass


class OutOfRange(ToricQEError, ValueError):
    pass


class BoundaryEvaluation(ToricQEError, ValueError):
    """A point lies on (or within the guard band of) the polytope boundary."""


class NonPositiveProfile(ToricQEError, ValueError):
    pass


class PositivityViolation(ToricQEError, ValueError):
    """An affine expression that must stay positive (bt+c, dbt+dc+1) does not."""


class PoleEvaluation(ToricQEError, ValueError):
    pass


class NoAdmissibleRoot(ToricQEError):
    pass


class InadmissibleSolution(ToricQEError):
    pass


class InvalidTopology(ToricQEError, ValueError):
    pass


class NonPositiveBeta(ToricQEError, ValueError):
    pass


class ConformalFactorPole(ToricQEError, ValueError):
    pass


class SingularHessian(ToricQEError, ValueError):
    pass
