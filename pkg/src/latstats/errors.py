"""Exception types raised across the package."""


class LatstatsError(Exception):
    """Base class for all package errors."""


class EmptyInput(LatstatsError):
    pass


class DimensionMismatch(LatstatsError):
    pass


class SingularBasis(LatstatsError):
    pass


class NotInLattice(LatstatsError):
    pass


class NotUnimodular(LatstatsError):
    pass


class ZeroVector(LatstatsError):
    pass


class TupleTooLong(LatstatsError):
    pass


class EnumerationBudgetExceeded(LatstatsError):
    pass


class CombinatorialBudgetExceeded(LatstatsError):
    pass


class BadTupleOrder(LatstatsError):
    pass


class InvalidVolume(LatstatsError):
    pass


class EmptyRegion(LatstatsError):
    pass


class DomainError(LatstatsError):
    pass


class BadOrder(LatstatsError):
    pass


class InvalidTerm(LatstatsError):
    pass


class InsufficientData(LatstatsError):
    pass


class ConfigError(LatstatsError):
    pass
