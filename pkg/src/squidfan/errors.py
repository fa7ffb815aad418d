"""Exception types raised by the simulation, design, and tree modules."""


class IntegrationError(RuntimeError):
    """Phase-dynamics integration failed (adaptive step-size underflow)."""


class NoThresholdError(RuntimeError):
    """The SQUID never produces fluxons anywhere in the search bracket."""


class SaturationError(ValueError):
    """A storage-loop current exceeds the loop's saturation current."""


class ConstraintViolationError(ValueError):
    """A circuit design violates the half-quantum flux-budget constraint."""


class UnreachableThresholdError(ValueError):
    """Threshold cannot be reached even with every input saturated."""


class CapacityError(ValueError):
    """Requested problem size is beyond what the operation supports."""
