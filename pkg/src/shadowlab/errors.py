"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateRayError(ArithmeticError):
    """The dart coincides with the light source, so the ray has no direction."""


class ConfigurationError(ValueError):
    """A run was configured in a way that cannot produce a valid result."""


class SimulationError(RuntimeError):
    """A Monte Carlo run hit a failure budget (e.g. too many degenerate rays)."""
