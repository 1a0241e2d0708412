"""Exception hierarchy shared by all modules."""


class CubicEqError(Exception):
    """Base class for every error raised by this package."""


class ArgumentError(CubicEqError, ValueError):
    """Invalid argument: bad site list, shape mismatch, wrong convention."""


class DiagramError(CubicEqError, ValueError):
    """A wiring diagram that does not validate."""


class ResourceError(CubicEqError, RuntimeError):
    """A size guard was exceeded (dimension, term count, polynomial degree)."""


class ModeError(CubicEqError, ValueError):
    """The requested inversion mode does not apply to the given operator."""


class SingularMatrixError(CubicEqError, ArithmeticError):
    """Matrix is not invertible; carries the smallest singular value."""

    def __init__(self, message, smallest_singular_value):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class ConfigError(CubicEqError, ValueError):
    """Invalid CLI configuration; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
