"""Exception types shared across the package."""


class AntfisError(Exception):
    """Base class for errors raised by this package."""


class DataError(AntfisError):
    """Input data is missing, malformed, or violates an invariant."""


class NumericError(AntfisError):
    """A numerical procedure cannot produce a valid result."""
