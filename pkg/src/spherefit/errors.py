"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Malformed or out-of-domain argument (bad shape, non-finite, bad range)."""


class NotAnEllipseError(ValueError):
    """Conic is not a real, nondegenerate ellipse."""


class DegenerateSampleError(ValueError):
    """Point sample cannot support the fit (collinear, repeated, rank-deficient)."""


class InsufficientDataError(ValueError):
    """Fewer data points than the fit requires."""


class InvalidInitError(ValueError):
    """Refinement initializer is unusable (not an ellipse, or no valid scene)."""


class NoModelError(RuntimeError):
    """Robust estimation exhausted its budget without producing a model."""
