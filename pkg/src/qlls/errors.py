"""Exception types shared across the package."""


class QLLSError(Exception):
    """Base class for all package errors."""


class DomainError(QLLSError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ValidationError(QLLSError, ValueError):
    """An input matrix fails a structural check (trace, hermiticity, positivity)."""


class PreconditionError(QLLSError, ValueError):
    """A design is not of high enough order for the requested quantity."""


class ConstructionError(QLLSError, RuntimeError):
    """Group closure produced an unexpected number of elements."""


class UndefinedEstimateError(QLLSError):
    """An estimator has no data to work with (empty sift, no records)."""


class ConfigError(QLLSError, ValueError):
    """Invalid experiment configuration."""
