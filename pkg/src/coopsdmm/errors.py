"""Exception hierarchy shared by every coopsdmm module."""


class CoopSdmmError(Exception):
    """Base class for all library errors."""


class FieldMismatch(CoopSdmmError, ValueError):
    pass


class DivisionByZero(CoopSdmmError, ZeroDivisionError):
    pass


class NotPrime(CoopSdmmError, ValueError):
    pass


class DimensionMismatch(CoopSdmmError, ValueError):
    pass


class IndivisibleDimension(CoopSdmmError, ValueError):
    pass


class Singular(CoopSdmmError, ArithmeticError):
    pass


class DuplicatePoints(CoopSdmmError, ValueError):
    pass


class InsufficientShares(CoopSdmmError, ValueError):
    pass


class BudgetExceeded(CoopSdmmError, RuntimeError):
    pass


class ConfigError(CoopSdmmError, ValueError):
    pass


class FieldTooSmall(ConfigError):
    pass


class GaspPointSearchExhausted(CoopSdmmError, RuntimeError):
    pass


class InsufficientResponders(CoopSdmmError, RuntimeError):
    pass


class TopologyViolation(CoopSdmmError, ValueError):
    pass
