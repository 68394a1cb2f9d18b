"""Exception hierarchy shared by every layer of the solver."""


class SumPolyError(Exception):
    """Base class for all errors raised by the package."""


class ConfigError(SumPolyError):
    pass


# arithmetic layer

class ReducibleModulus(SumPolyError):
    pass


class DivisionByZero(SumPolyError, ZeroDivisionError):
    pass


class NoSolution(SumPolyError):
    """w^2 + w = c has no root in the base field (trace of c is 1)."""


class NoRationalPoint(SumPolyError):
    pass


class DegenerateGroup(SumPolyError):
    pass


# algebra layer

class UnsupportedCurveForm(SumPolyError):
    pass


class ZeroLeadingForm(SumPolyError):
    pass


class SizeLimit(SumPolyError):
    pass


class BadArity(SumPolyError):
    pass


# solver layer

class ResourceLimit(SumPolyError):
    pass


class TooLarge(SumPolyError):
    pass


class AssumptionViolation(SumPolyError):
    """A descended system needed a step degree above the configured cap."""

    def __init__(self, message: str, system=None, outcome=None):
        super().__init__(message)
        self.system = system
        self.outcome = outcome


class UnsoundSolution(SumPolyError):
    """A reported assignment fails to satisfy the input system."""


# index-calculus layer

class NoDecomposition(SumPolyError):
    def __init__(self, message: str, outcome=None):
        super().__init__(message)
        self.outcome = outcome


class LiftMismatch(SumPolyError):
    """A solver solution could not be lifted to points summing to infinity."""


class BudgetExhausted(SumPolyError):
    pass


class NoKernel(SumPolyError):
    pass


class DegenerateB(SumPolyError):
    pass


class InvariantViolation(SumPolyError):
    """An exact point identity that must hold did not."""
