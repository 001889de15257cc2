"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the offending field path."""

    def __init__(self, message, field=None):
        if field is not None and field not in message:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class ConnectivityError(ValueError):
    """Operation requires a connected communication graph."""


class CompatibilityError(ValueError):
    """Mixing scheme incompatible with the given graph."""


class CapabilityError(ValueError):
    """Requested operation is not supported by this problem instance."""


class InfeasibleError(RuntimeError):
    """No feasible comparator point could be certified."""
