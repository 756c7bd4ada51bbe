"""Exception types shared by the library and the command line."""


class DomainError(ValueError):
    """An argument lies outside the region where an operation is defined."""


class InsufficientDepthError(DomainError):
    """An order book has no levels on one side inside the requested window."""


class ParseError(ValueError):
    """Malformed CSV input. ``line`` is 1-based and counts the header."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
