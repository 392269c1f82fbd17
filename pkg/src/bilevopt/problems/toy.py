"""One-dimensional benchmark with a non-convex lower level.

    F(x, y) = (x - a)^2 + (y - a)^2,    f(x, y) = sin(x + y)

The lower-level solution set is the union of all minimizers of the sine,
y in {-pi/2 - x + 2*pi*j}, so the problem violates both lower-level
convexity and uniqueness while staying cheap enough for brute-force
verification.  For a = 0 the global solution is x* = y* = -pi/4 with
F* = pi^2/8; for a = 2 it is x* = y* = 3*pi/4.
"""

from __future__ import annotations

import numpy as np

from .base import Problem


def make_toy(a: float = 0.0) -> Problem:
    """Build the sin-lower-level toy problem with offset ``a``.

    All four gradients and the second-order products are analytic, so every
    solver in the library (including the unrolled and implicit baselines)
    can run on the returned problem.
    """
    a = float(a)

    def eval_F(x, y):
        return float((x[0] - a) ** 2 + (y[0] - a) ** 2)

    def eval_f(x, y):
        return float(np.sin(x[0] + y[0]))

    def grad_F_x(x, y):
        return np.array([2.0 * (x[0] - a)])

    def grad_F_y(x, y):
        return np.array([2.0 * (y[0] - a)])

    def grad_f_x(x, y):
        return np.array([np.cos(x[0] + y[0])])

    grad_f_y = grad_f_x  # symmetric in x and y

    def hvp_f_yy(x, y, v):
        return np.array([-np.sin(x[0] + y[0]) * v[0]])

    jvp_f_xy = hvp_f_yy  # d2f/dxdy equals d2f/dy2 for f = sin(x + y)

    if a == 0.0:
        known = (np.array([-np.pi / 4]), np.array([-np.pi / 4]), np.pi ** 2 / 8)
    elif a == 2.0:
        xs = 3 * np.pi / 4
        known = (np.array([xs]), np.array([xs]), 2.0 * (xs - 2.0) ** 2)
    else:
        known = None

    return Problem(
        dim_x=1, dim_y=1,
        eval_F=eval_F, eval_f=eval_f,
        grad_F_x=grad_F_x, grad_F_y=grad_F_y,
        grad_f_x=grad_f_x, grad_f_y=grad_f_y,
        hvp_f_yy=hvp_f_yy, jvp_f_xy=jvp_f_xy,
        known_optimum=known,
        name=f"toy(a={a:g})",
    )
