"""Exception types shared across the package."""


class SpilloverError(Exception):
    """Base class for all package errors."""


class DataError(SpilloverError, ValueError):
    """Input data violates a precondition (shape, parse, missing values...)."""


class NumericalError(SpilloverError, ArithmeticError):
    """A computation lost a required numerical property (e.g. positive-definiteness)."""
