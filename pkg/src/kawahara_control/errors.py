"""Exception types shared across the package."""


class ConditioningError(RuntimeError):
    """Raised when a linear solve is refused because the system matrix is
    too ill-conditioned to return a trustworthy answer."""


class InstabilityError(RuntimeError):
    """Raised when a time integration blows up (coefficient magnitudes grow
    beyond the configured factor of their initial size)."""
