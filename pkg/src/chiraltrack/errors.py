"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class NoCrossingError(DomainError):
    """The optical rotation trajectory never changes sign."""


class SingularInformationError(ArithmeticError):
    """A Fisher information matrix cannot be inverted."""


class CalibrationError(RuntimeError):
    """The water calibration run produced no usable phase estimate."""


class RecordError(ValueError):
    """Measurement records are malformed or out of order."""


class ConfigError(ValueError):
    """A run configuration file is malformed or violates its schema."""


class IncompleteCycleWarning(UserWarning):
    """A measurement cycle was dropped because a setting was missing."""
