"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed input data or an invalid argument."""


class InfeasibleError(ValueError):
    """A configuration that cannot be satisfied by the available data."""
