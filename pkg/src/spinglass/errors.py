"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A requested size exceeds a configured cap (desk-scale guard)."""


class NumericError(ArithmeticError):
    """A computation produced non-finite or otherwise invalid numbers."""


class ConfigError(ValueError):
    """An experiment configuration file is malformed."""
