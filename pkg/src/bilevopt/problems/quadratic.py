"""Analytic quadratic benchmark used to validate every solver.

    f(x, y) = 1/2 ||y - A x||^2,    F(x, y) = 1/2 ||x||^2 + 1/2 ||y - b||^2

The lower level has the unique solution y*(x) = A x, so the value function
and its gradient are available in closed form:

    phi(x)      = 1/2 ||x||^2 + 1/2 ||A x - b||^2
    grad phi(x) = x + A^T (A x - b)
    argmin phi  solves (I + A^T A) x = A^T b

The problem is smooth and strongly convex at both levels, which makes it a
fair target for the unrolled and implicit baselines as well.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import DimensionError
from .base import Problem


def make_quadratic(A: np.ndarray, b: np.ndarray) -> Problem:
    """Build the quadratic problem from an n-by-m matrix ``A`` and target ``b``.

    ``A`` should have full column rank for the upper-level minimizer to be
    unique; this is not enforced.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2:
        raise DimensionError("A must be a 2-D matrix")
    n, m = A.shape
    if b.shape != (n,):
        raise DimensionError(f"b must have shape ({n},) to match A, got {b.shape}")

    def eval_F(x, y):
        return 0.5 * float(x @ x) + 0.5 * float((y - b) @ (y - b))

    def eval_f(x, y):
        r = y - A @ x
        return 0.5 * float(r @ r)

    def grad_F_x(x, y):
        return np.array(x, dtype=float)

    def grad_F_y(x, y):
        return y - b

    def grad_f_x(x, y):
        return -A.T @ (y - A @ x)

    def grad_f_y(x, y):
        return y - A @ x

    def hvp_f_yy(x, y, v):
        return np.array(v, dtype=float)   # d2f/dy2 = I

    def jvp_f_xy(x, y, v):
        return -A.T @ v                   # (d2f/dxdy)^T v

    def value_fn(x):
        r = A @ x - b
        return 0.5 * float(x @ x) + 0.5 * float(r @ r)

    def value_grad(x):
        return x + A.T @ (A @ x - b)

    x_star = np.linalg.solve(np.eye(m) + A.T @ A, A.T @ b)

    return Problem(
        dim_x=m, dim_y=n,
        eval_F=eval_F, eval_f=eval_f,
        grad_F_x=grad_F_x, grad_F_y=grad_F_y,
        grad_f_x=grad_f_x, grad_f_y=grad_f_y,
        hvp_f_yy=hvp_f_yy, jvp_f_xy=jvp_f_xy,
        known_optimum=(x_star, A @ x_star, value_fn(x_star)),
        value_fn=value_fn, value_grad=value_grad,
        name=f"quadratic(n={n},m={m})",
    )


def make_random_quadratic(n: int, m: int, seed: int = 0) -> Problem:
    """Random dense instance with entries from a seeded standard normal."""
    rng = np.random.default_rng(seed)
    return make_quadratic(rng.normal(size=(n, m)), rng.normal(size=n))
