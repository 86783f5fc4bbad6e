"""Exception types shared across the package."""


class CapacityError(RuntimeError):
    """An instance exceeds a documented size guard."""


class NonConvergenceError(RuntimeError):
    """An iterative routine exhausted its iteration budget."""
