"""Exception types shared across the toolkit."""


class ThzError(Exception):
    """Base class for all toolkit errors."""


class FormatError(ThzError):
    """File is not a cube container (bad magic or unsupported version)."""


class CorruptionError(ThzError):
    """Container is structurally valid but the payload is truncated or inconsistent."""


class ValidationError(ThzError):
    """Data violates an invariant (non-finite values, bad dimensions, bad parameters)."""


class ConfigError(ThzError):
    """A configuration is internally inconsistent or unusable (e.g. oversized kernel)."""
