"""Exception types shared across the package."""


class NumsarcError(Exception):
    """Base class for all package-specific errors."""


class DataError(NumsarcError):
    """Malformed input data, impossible dataset request, or bad file format."""


class UsageError(NumsarcError):
    """Invalid command-line or API usage."""


class DivergenceError(NumsarcError):
    """Training produced a non-finite loss."""
