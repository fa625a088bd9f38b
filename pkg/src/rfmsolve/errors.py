"""Exception types raised across the package."""


class RfmError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(RfmError, ValueError):
    pass


class SketchTooWide(RfmError, ValueError):
    """The requested sketch would not compress the input (m < ceil(gamma * n))."""


class RankDeficient(RfmError, ArithmeticError):
    pass


class LineSearchFailure(RfmError):
    pass


class FactorizationFailure(RfmError, ArithmeticError):
    pass


class EmptyInterval(RfmError, ValueError):
    pass


class EmptyInterior(RfmError, ValueError):
    pass


class OrderTooHigh(RfmError, ValueError):
    pass


class OutsideDomain(RfmError, ValueError):
    pass


class UnknownProblem(RfmError, KeyError):
    pass


class NoExactSolution(RfmError):
    pass


class IntegrationFailure(RfmError):
    pass


class ZeroReference(RfmError, ZeroDivisionError):
    pass


class ConfigError(RfmError, ValueError):
    pass


class ZeroRowWarning(UserWarning):
    """A Jacobian row was identically zero and was left unscaled."""
