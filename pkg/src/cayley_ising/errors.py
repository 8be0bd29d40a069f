"""Exception types shared across the package."""


class CayleyIsingError(Exception):
    """Base class for all errors raised by this package."""


class ResourceLimitError(CayleyIsingError):
    """A requested enumeration exceeds the configured size cap."""


class RegionError(CayleyIsingError):
    """Parameters lie outside the region an operation requires."""


class DomainError(CayleyIsingError, ValueError):
    """An argument is outside the mathematical domain of an operation."""
