"""Structured errors raised by solvers and verification routines."""


class BilevoptError(Exception):
    """Base class for all library errors."""


class DimensionError(BilevoptError):
    """Inconsistent array shapes when constructing a problem."""


class DivergedError(BilevoptError):
    """A non-finite value appeared in an objective or gradient.

    Carries the outer stage ``k``, inner index ``l`` and step ``t`` where
    the run aborted, when known.
    """

    def __init__(self, message, k=None, l=None, t=None):
        super().__init__(message)
        self.k = k
        self.l = l
        self.t = t


class InfeasibleStartError(BilevoptError):
    """Barrier solve started outside the log domain (f_reg - f(x, y0) <= 0)."""


class BarrierDomainError(BilevoptError):
    """Hypergradient requested at a point outside the log domain."""


class BacktrackingExhaustedError(BilevoptError):
    """No acceptable barrier step found after the maximum number of halvings."""

    def __init__(self, message, k=None, l=None, t=None):
        super().__init__(message)
        self.k = k
        self.l = l
        self.t = t


class MissingOracleError(BilevoptError):
    """A solver requires second-order oracles the problem does not provide."""


class GridResolutionError(BilevoptError):
    """A brute-force grid is too coarse for the requested computation."""


class ConfigError(BilevoptError):
    """Run configuration document is malformed or inconsistent.

    ``location`` is a human-readable "line:column" or section/key path.
    """

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class CurvatureWarning(UserWarning):
    """Conjugate gradient met non-positive curvature on a non-convex problem."""
