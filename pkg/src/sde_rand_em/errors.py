"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A run configuration violates a precondition; the message names the offending field."""


class CouplingError(ValueError):
    """A fine Brownian path does not coarsen to the path that drove a trajectory."""


class UnsupportedFunctionError(TypeError):
    """The integrand is not in the registered corpus of functions with exact antiderivatives."""
