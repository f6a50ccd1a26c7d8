"""Exception types shared across the package."""


class TriplaqError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(TriplaqError):
    """Invalid geometry, sweep configuration, or config file contents."""


class NormalizationError(TriplaqError):
    """A state vector or amplitude tuple is not normalized."""


class ContractViolationError(TriplaqError):
    """An input violates a documented precondition (e.g. non-Hermitian matrix)."""


class NumericalHealthError(TriplaqError):
    """A numerical routine produced values outside its guaranteed tolerances."""
