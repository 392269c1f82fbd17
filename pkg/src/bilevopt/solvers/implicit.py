"""Implicit hypergradients via approximate Hessian-inverse products.

After T lower-level gradient steps reach y_hat, the stationarity of the
lower problem gives

    G(x) = -(d2f/dydx)^T (d2f/dy2)^{-1} dF/dy

evaluated at (x, y_hat).  The inverse-Hessian product is approximated by J
conjugate-gradient iterations or by a damped Neumann series

    q = sum_{j=0}^{J} (I - eta * d2f/dy2)^j * eta * dF/dy,

with damping eta defaulting to the lower-level step size so the series
contracts whenever plain gradient descent does.

On non-convex lower problems the Hessian may be indefinite; conjugate
gradient then detects non-positive curvature, emits a ``CurvatureWarning``
and returns the best iterate so far instead of aborting, so comparisons on
such problems still run.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..counters import CountedOracles, OracleCounters
from ..exceptions import CurvatureWarning, MissingOracleError


@dataclass(frozen=True)
class ImplicitConfig:
    T: int = 100
    J: int = 20
    method: str = "cg"            # "cg" | "neumann"
    s: float = 0.1
    damping: Optional[float] = None   # Neumann eta; defaults to s

    def __post_init__(self):
        if self.T < 0 or self.J < 1:
            raise ValueError("need T >= 0 and J >= 1")
        if self.s <= 0:
            raise ValueError("step size must be positive")
        if self.method not in ("cg", "neumann"):
            raise ValueError(f"unknown implicit method {self.method!r}")


def _cg_solve(hvp, b, J, rtol=1e-12):
    """J conjugate-gradient iterations for (d2f/dy2) q = b."""
    q = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    if rs == 0.0:
        return q
    for _ in range(J):
        Ap = hvp(p)
        curvature = float(p @ Ap)
        if curvature <= 0.0:
            warnings.warn(
                f"non-positive curvature {curvature:.3e} in conjugate gradient; "
                "lower problem is locally non-convex", CurvatureWarning,
                stacklevel=3)
            return q
        step = rs / curvature
        q = q + step * p
        r = r - step * Ap
        rs_new = float(r @ r)
        if rs_new <= rtol * rs:
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    return q


def implicit_hypergradient(problem, x, y0, cfg: ImplicitConfig,
                           counters: OracleCounters):
    """Implicit-function-theorem hypergradient; returns (g, y_hat)."""
    if not problem.has_second_order:
        raise MissingOracleError(
            "implicit solvers need hvp_f_yy and jvp_f_xy oracles; "
            "wrap the problem with with_fd_second_order() to approximate them")
    oracles = CountedOracles(problem, counters, context=f"implicit-{cfg.method}")
    y = np.array(y0, dtype=float)
    for _ in range(cfg.T):
        y = y - cfg.s * oracles.gfy(x, y)

    b = oracles.gFy(x, y)
    if cfg.method == "cg":
        q = _cg_solve(lambda v: oracles.hvp(x, y, v), b, cfg.J)
    else:
        eta = cfg.s if cfg.damping is None else cfg.damping
        v = eta * b
        q = v.copy()
        for _ in range(cfg.J):
            v = v - eta * oracles.hvp(x, y, v)
            q += v
    g = oracles.gFx(x, y) - oracles.jvp(x, y, q)
    return g, y
