"""Exception types raised by the library."""


class VlcSecrecyError(Exception):
    """Base class for errors raised by this package."""


class InfeasibleError(VlcSecrecyError, ValueError):
    """A target cannot be met within the amplitude constraint.

    ``max_attainable`` carries the best achievable value of the
    constrained quantity (linear SNR) when known.
    """

    def __init__(self, message, max_attainable=None):
        super().__init__(message)
        self.max_attainable = max_attainable


class SingularGramError(VlcSecrecyError, ValueError):
    """The eavesdropper Gram matrix is numerically singular."""

    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


class ConvergenceError(VlcSecrecyError, RuntimeError):
    """An iterative solver ran out of iterations."""


class ConfigError(VlcSecrecyError, ValueError):
    """Bad experiment configuration."""
