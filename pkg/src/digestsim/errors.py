"""Exception types shared across the simulation engine."""


class DigestsimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DigestsimError):
    """Invalid configuration value. Carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DegenerateStateError(DigestsimError):
    """The bolus reached a state the model equations cannot evolve
    (zero total mass, dry bolus under the lubrication friction law,
    water proportion outside (0, 1), velocity at or above wave speed)."""


class NumericalFailureError(DigestsimError):
    """Non-finite derivative or mass undershoot beyond tolerance during
    integration. The message identifies the offending state component."""
