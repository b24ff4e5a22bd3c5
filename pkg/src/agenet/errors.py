"""Exception types raised across the package.

The CLI maps each family onto an exit code, so new errors should subclass
one of the three families below rather than ``AgeNetError`` directly.
"""


class AgeNetError(Exception):
    """Base class for every error raised by agenet."""


class ValidationError(AgeNetError, ValueError):
    """Bad input values or configuration (CLI exit code 1)."""


class ConfigError(ValidationError):
    pass


class DimensionError(ValidationError):
    """Operand shapes do not line up."""


class ShapeError(ValidationError):
    """A shape is empty, non-integral or otherwise unusable."""


class NoBinError(ValidationError):
    """An age falls below a bin scheme or into one of its gaps."""


class AgeNetIOError(AgeNetError, OSError):
    """Unreadable or malformed files (CLI exit code 2)."""


class ImageFormatError(AgeNetIOError):
    pass


class WeightFileError(AgeNetIOError):
    pass


class WeightMagicError(WeightFileError):
    pass


class WeightVersionError(WeightFileError):
    pass


class WeightTruncatedError(WeightFileError):
    pass


class WeightConfigMismatch(WeightFileError):
    pass


class NumericalError(AgeNetError, ArithmeticError):
    """NaN or inf appeared during training (CLI exit code 3)."""
