"""Exception types shared across the package."""


class RareUnionError(Exception):
    """Base class for all package-specific errors."""


class ModelSpecError(RareUnionError, ValueError):
    """A model description or configuration is invalid."""


class CapabilityError(RareUnionError, RuntimeError):
    """An operation was requested that the model does not support."""


class QuadratureError(RareUnionError, RuntimeError):
    """Numerical integration failed to reach the requested accuracy."""
