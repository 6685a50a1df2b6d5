"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when input data or configuration violates a documented contract."""


class ParseError(ValidationError):
    """Raised when an input file cannot be decoded at all.

    Subclasses :class:`ValidationError` so callers that only care about
    "bad input" can catch one type.
    """
