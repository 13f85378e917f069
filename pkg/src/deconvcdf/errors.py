"""Exception types shared across the package."""


class DeconvError(Exception):
    """Base class for deconvcdf errors."""


class VanishingCFError(DeconvError):
    """The noise characteristic function is (numerically) zero at a
    frequency where the inversion integrand must be evaluated."""


class QuadratureError(DeconvError):
    """Adaptive quadrature exhausted its subdivision budget before
    reaching the requested tolerance."""


class MissingParametersError(DeconvError, ValueError):
    """A requested assumption check needs parameters the noise model
    does not carry."""


class InfeasibleClassError(DeconvError, ValueError):
    """A convex class (or the constrained program built on it) has no
    feasible point."""


class SolverError(DeconvError, RuntimeError):
    """The affine-minimax solver stopped before certifying its
    tolerance.  ``report`` holds the best values found."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
