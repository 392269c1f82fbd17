"""Reverse-mode hypergradients through an unrolled lower-level descent.

The lower problem is solved by T gradient steps y_{t+1} = y_t - s * df/dy.
Backpropagating the upper objective through that trajectory needs the
transition Jacobians, i.e. Hessian-vector products (I - s * d2f/dy2)^T p
and mixed products for the x-dependence, so these solvers require the
problem's second-order oracles and refuse to run without them.

Truncation (the TRHG variant) starts the reverse sweep only
``truncate_at`` steps back from the end; ``truncate_at = T`` reproduces the
full reverse pass bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..counters import CountedOracles, OracleCounters
from ..exceptions import DivergedError, MissingOracleError


@dataclass(frozen=True)
class UnrollConfig:
    T: int = 100
    s: float = 0.1
    truncate_at: Optional[int] = None

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("T must be >= 0")
        if self.s <= 0:
            raise ValueError("step size must be positive")
        if self.truncate_at is not None and not (1 <= self.truncate_at <= max(self.T, 1)):
            raise ValueError("need 1 <= truncate_at <= T")


def rhg_hypergradient(problem, x, y0, cfg: UnrollConfig,
                      counters: OracleCounters):
    """Reverse-mode hypergradient; returns (g, y_T).

    Forward: T stored gradient-descent steps from y0.  Reverse: adjoints
    p_{t-1} = (I - s * d2f/dy2) p_t and q accumulation through the mixed
    second-order product, starting ``truncate_at`` steps from the end.
    With T = 0 the result is simply dF/dx(x, y0).
    """
    if not problem.has_second_order:
        raise MissingOracleError(
            "unrolled solvers need hvp_f_yy and jvp_f_xy oracles; "
            "wrap the problem with with_fd_second_order() to approximate them")
    oracles = CountedOracles(problem, counters, context="rhg")
    y = np.array(y0, dtype=float)
    trajectory = [y]
    for t in range(cfg.T):
        y = y - cfg.s * oracles.gfy(x, y)
        if not np.all(np.isfinite(y)):
            raise DivergedError("unrolled lower iterate diverged", t=t)
        trajectory.append(y)
    y_T = trajectory[-1]

    g = oracles.gFx(x, y_T)
    if cfg.T == 0:
        return g, y_T
    p = oracles.gFy(x, y_T)
    q = np.zeros(problem.dim_x)
    depth = cfg.T if cfg.truncate_at is None else cfg.truncate_at
    for t in range(cfg.T, cfg.T - depth, -1):
        y_prev = trajectory[t - 1]
        q = q - cfg.s * oracles.jvp(x, y_prev, p)
        p = p - cfg.s * oracles.hvp(x, y_prev, p)
    return g + q, y_T
