"""Tightly converged inner solves for gradient-accuracy checks.

The hypergradient formula is exact only at the actual minimizers of the
two inner problems, so the finite-difference comparison needs them solved
to near machine precision, not to a fixed step budget.  Dimensions here
are tiny (the checks run on 1-D and 2-D problems), so each solve warms up
with guarded gradient descent and then polishes with a safeguarded Newton
iteration whose Hessian comes from central differences of the first-order
oracles; steps that leave the barrier domain or increase the objective are
halved away.

Initial points are deterministic and shared across the +h/-h evaluations
of a finite difference, so the computed value function follows one smooth
branch of minimizers even on non-convex problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..counters import OracleCounters
from ..exceptions import InfeasibleStartError


@dataclass
class BarrierPoint:
    """Converged inner solution bundle for one x."""
    value: float
    y: np.ndarray
    z: np.ndarray
    f_reg: float


def _fd_jacobian(grad_fn, w, h: float = 1e-6) -> np.ndarray:
    d = w.size
    H = np.empty((d, d))
    for i in range(d):
        step = h * max(1.0, abs(w[i]))
        wp, wm = w.copy(), w.copy()
        wp[i] += step
        wm[i] -= step
        H[:, i] = (grad_fn(wp) - grad_fn(wm)) / (2.0 * step)
    return 0.5 * (H + H.T)


def _minimize(value_fn, grad_fn, w0, s, tol, max_gd=3000, max_newton=60):
    """Guarded descent warm-up, then Newton polish to ||grad|| <= tol.

    ``value_fn`` returns +inf outside the admissible domain, which both
    phases treat as a rejected step.
    """
    w = np.array(w0, dtype=float)
    val = value_fn(w)
    if not np.isfinite(val):
        raise InfeasibleStartError("tight solve started outside the domain")
    step = s
    g = grad_fn(w)
    for _ in range(max_gd):
        if np.linalg.norm(g) <= 1e-4:
            break
        cand = w - step * g
        cval = value_fn(cand)
        if cval <= val:
            w, val = cand, cval
            g = grad_fn(w)
            step = min(2.0 * step, s)
        else:
            step *= 0.5
            if step < 1e-18:
                break

    for _ in range(max_newton):
        g = grad_fn(w)
        gnorm = np.linalg.norm(g)
        if gnorm <= tol:
            break
        H = _fd_jacobian(grad_fn, w)
        try:
            direction = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            direction = g
        if float(direction @ g) <= 0.0:   # not a descent direction
            direction = g
        t = 1.0
        for _ in range(60):
            cand = w - t * direction
            cval = value_fn(cand)
            if np.isfinite(cval) and np.linalg.norm(grad_fn(cand)) < gnorm:
                w, val = cand, cval
                break
            t *= 0.5
        else:
            break
    return w


def tight_solve_z(problem, x, mu1, z0=None, s: float = 0.1,
                  tol: float = 1e-10) -> np.ndarray:
    z0 = np.zeros(problem.dim_y) if z0 is None else np.array(z0, dtype=float)

    def value(z):
        return problem.eval_f(x, z) + 0.5 * mu1 * float(z @ z)

    def grad(z):
        return problem.grad_f_y(x, z) + mu1 * z

    return _minimize(value, grad, z0, s, tol)


def tight_solve_y(problem, x, f_reg, theta, tau, y0, s: float = 0.1,
                  tol: float = 1e-10) -> np.ndarray:
    def value(y):
        u = f_reg - problem.eval_f(x, y)
        if u <= 0.0:
            return np.inf
        return (problem.eval_F(x, y) + 0.5 * theta * float(y @ y)
                - tau * np.log(u))

    def grad(y):
        u = f_reg - problem.eval_f(x, y)
        return (problem.grad_F_y(x, y) + theta * y
                + tau * problem.grad_f_y(x, y) / u)

    return _minimize(value, grad, np.array(y0, dtype=float), s, tol)


def barrier_point(problem, x, mu1, mu2, theta, tau, z0=None,
                  tol: float = 1e-10) -> BarrierPoint:
    """Solve both inner problems tightly and evaluate the stage objective."""
    z = tight_solve_z(problem, x, mu1, z0=z0, tol=tol)
    f_reg = (problem.eval_f(x, z) + 0.5 * mu1 * float(z @ z) + mu2)
    y = tight_solve_y(problem, x, f_reg, theta, tau, y0=z, tol=tol)
    u = f_reg - problem.eval_f(x, y)
    value = (problem.eval_F(x, y) + 0.5 * theta * float(y @ y)
             - tau * np.log(u))
    return BarrierPoint(value=float(value), y=y, z=z, f_reg=float(f_reg))


def barrier_value_fn(problem, mu1, mu2, theta, tau, z0=None, tol=1e-10):
    """Scalar x -> phi_{mu,theta,tau}(x) map for finite differencing."""

    def fn(x):
        return barrier_point(problem, x, mu1, mu2, theta, tau,
                             z0=z0, tol=tol).value

    return fn


def exact_hyper_gradient(problem, x, mu1, mu2, theta, tau, z0=None,
                         tol: float = 1e-10) -> np.ndarray:
    """Hypergradient evaluated at tightly converged inner solutions."""
    from ..solvers.bvfim import hyper_gradient

    pt = barrier_point(problem, x, mu1, mu2, theta, tau, z0=z0, tol=tol)
    counters = OracleCounters()
    return hyper_gradient(problem, x, pt.y, pt.z, pt.f_reg, tau, counters)
