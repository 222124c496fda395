class InvalidArgumentError(ValueError):
    """A precondition on an argument was violated."""


class UnsupportedConfigurationError(ValueError):
    """The request is valid but outside what the closed forms cover."""
