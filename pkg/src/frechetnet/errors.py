"""Exception hierarchy shared by all modules."""


class FrechetNetError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(FrechetNetError, ValueError):
    """Objects living in incompatible ambient spaces were combined."""


class ValidationError(FrechetNetError, ValueError):
    """A parameter violates a construction invariant."""


class ParseError(ValidationError):
    """A model document or data file is malformed.

    ``field`` names the offending entry (a JSON path or a CSV row).
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class DivergenceError(FrechetNetError, ArithmeticError):
    """Training loss blew up or became non-finite."""
