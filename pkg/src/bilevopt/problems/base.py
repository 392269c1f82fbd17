"""Bilevel problem container: a bundle of first-order oracles.

A problem is defined by an upper objective F(x, y), a lower objective
f(x, y), their four partial gradients, and optionally second-order product
oracles (Hessian-vector and mixed Jacobian-vector products of f) that the
unrolled/implicit baseline solvers require.  All oracles are pure functions
of their arguments; instances are immutable after construction and safe to
share between concurrently running solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np

from ..exceptions import DimensionError

Array = np.ndarray


@dataclass(frozen=True)
class Problem:
    dim_x: int
    dim_y: int
    eval_F: Callable[[Array, Array], float]
    eval_f: Callable[[Array, Array], float]
    grad_F_x: Callable[[Array, Array], Array]
    grad_F_y: Callable[[Array, Array], Array]
    grad_f_x: Callable[[Array, Array], Array]
    grad_f_y: Callable[[Array, Array], Array]
    # optional second-order product oracles: (x, y, v) -> vector
    hvp_f_yy: Optional[Callable[[Array, Array, Array], Array]] = None
    jvp_f_xy: Optional[Callable[[Array, Array, Array], Array]] = None
    # optional componentwise box constraint on x
    box_x: Optional[Tuple[Array, Array]] = None
    # optional (x*, y*, F*) for benchmark problems with a known solution
    known_optimum: Optional[Tuple[Array, Array, float]] = None
    # optional closed-form value function phi(x) and its gradient, for tests
    value_fn: Optional[Callable[[Array], float]] = None
    value_grad: Optional[Callable[[Array], Array]] = None
    name: str = "problem"

    def __post_init__(self):
        if self.dim_x < 1 or self.dim_y < 1:
            raise DimensionError("dim_x and dim_y must be positive")
        if self.box_x is not None:
            lo, hi = (np.asarray(b, dtype=float) for b in self.box_x)
            if lo.shape != (self.dim_x,) or hi.shape != (self.dim_x,):
                raise DimensionError("box_x bounds must have shape (dim_x,)")
            if np.any(lo > hi):
                raise DimensionError("box_x lower bound exceeds upper bound")

    @property
    def has_second_order(self) -> bool:
        return self.hvp_f_yy is not None and self.jvp_f_xy is not None

    def without_second_order(self) -> "Problem":
        """Copy of this problem with the second-order oracles removed."""
        return replace(self, hvp_f_yy=None, jvp_f_xy=None,
                       name=self.name + "-first-order")


def with_fd_second_order(problem: Problem, step: float = 1e-6) -> Problem:
    """Attach central-difference second-order product oracles to a problem.

    The returned problem's ``hvp_f_yy`` and ``jvp_f_xy`` are built from two
    calls each to the analytic first-order oracles, so baseline solvers can
    run on problems without hand-derived Hessians.  The tag in ``name``
    marks the substitution; counters still record these as second-order
    calls.
    """
    gfy = problem.grad_f_y
    gfx = problem.grad_f_x

    def hvp(x, y, v, _h=step):
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return np.zeros_like(np.asarray(v, dtype=float))
        h = _h / nv
        return (gfy(x, y + h * v) - gfy(x, y - h * v)) / (2.0 * h)

    def jvp(x, y, v, _h=step):
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return np.zeros(problem.dim_x)
        h = _h / nv
        return (gfx(x, y + h * v) - gfx(x, y - h * v)) / (2.0 * h)

    return replace(problem, hvp_f_yy=hvp, jvp_f_xy=jvp,
                   name=problem.name + "+fd2")
