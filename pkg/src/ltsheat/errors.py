"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A run or grid configuration violates a precondition."""


class DimensionError(ValueError):
    """Mismatched shapes or trace resolutions."""


class SolverError(RuntimeError):
    """A direct linear solve failed (singular or inaccurate factorization)."""
