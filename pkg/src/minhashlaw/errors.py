class MinhashLawError(Exception):
    """Base class for errors raised by this package."""


class EmptyInputError(MinhashLawError, ValueError):
    pass


class UndefinedSimilarityError(MinhashLawError, ZeroDivisionError):
    """Similarity is 0/0: neither set has a member."""


class UniverseMismatchError(MinhashLawError, ValueError):
    pass


class DimensionMismatchError(MinhashLawError, ValueError):
    pass


class InvalidLawError(MinhashLawError, ValueError):
    pass


class EnumerationLimitError(MinhashLawError):
    """Exact enumeration refused because n! permutations would be too many."""

    def __init__(self, n, limit):
        super().__init__(f"exact enumeration refused: {n} rows exceed the enumeration limit {limit}")
        self.n = n
        self.limit = limit


class ConditioningError(MinhashLawError):
    """No Monte Carlo draw realized the conditioning event."""
