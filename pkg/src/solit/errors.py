"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """An argument violates a documented precondition."""


class ConfigurationError(RuntimeError):
    """A configuration that cannot produce a valid result (e.g. a candidate
    grid that would exceed the hard size cap, or a noise level too small for
    the chosen truncation dimension)."""
