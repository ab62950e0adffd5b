"""Exceptions raised across the package."""


class ImagRadiusExceeded(ValueError):
    """The imaginary offset left the strip where the objective is holomorphic."""


class NonFiniteIterate(ArithmeticError):
    """An iterate picked up a NaN or infinite coordinate.

    The partially built trace is attached as ``trace`` so the divergence can
    be inspected.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NoConvergence(RuntimeError):
    """The reference solver hit its iteration cap before the residual target."""

    def __init__(self, message, baseline=None):
        super().__init__(message)
        self.baseline = baseline
