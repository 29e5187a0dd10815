"""Exception types shared across the package."""


class NumericError(RuntimeError):
    """A numerical procedure failed (blow-up, non-convergence, non-finite values).

    ``step`` carries the offending time-step index when the failure happened
    inside a path simulation.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(ValueError):
    """A config file or CLI option is malformed or names an unknown key."""
