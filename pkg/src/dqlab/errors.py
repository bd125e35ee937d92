"""Exception hierarchy shared by every module."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class ConfigurationError(ValidationError):
    """A run configuration is inconsistent (bad step size, bad durations...)."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to converge or lost accuracy."""
