"""Exception types shared across the package."""


class CumulantError(Exception):
    """Base class for all errors raised by this package."""


class SizeError(CumulantError, ValueError):
    """An enumeration or sampling budget would be exceeded."""


class DomainError(CumulantError, ValueError):
    """Objects live on incompatible ground sets."""


class ParityError(CumulantError, ValueError):
    """An odd size was given where an even one is required."""


class ShapeError(CumulantError, ValueError):
    """Input has the wrong structure (not a pairing, wrong length, wrong degree)."""


class ContractError(CumulantError, ValueError):
    """A documented precondition does not hold."""


class CompletenessError(CumulantError, ValueError):
    """A table is missing an order that the computation needs."""


class ConfigError(CumulantError, ValueError):
    """An experiment configuration or builder name is invalid."""


class UnboundSymbolError(ConfigError):
    """A word references a matrix symbol with no binding."""


class ModeError(CumulantError, ValueError):
    """The operation does not apply to this kind of data."""


class NumericError(CumulantError, ArithmeticError):
    """An iterative numerical routine failed to converge."""


class VarianceConditionError(CumulantError, ValueError):
    """Condition C2 fails: the variance of the trace is not bounded below."""


class SelfAdjointConditionError(CumulantError, ValueError):
    """Condition C3 fails: the polynomial is not self-adjoint, so its trace is not real."""
