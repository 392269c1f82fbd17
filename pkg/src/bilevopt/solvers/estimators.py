"""Scikit-learn style estimator wrappers around the solver loops.

Hyperparameters live in ``__init__`` (stored verbatim, validated at fit
time, introspectable through ``get_params``/``set_params``), and
``fit(problem, x0=None, y0=None)`` runs the solve, exposing the result as
trailing-underscore attributes:

    x_, y_        final upper and lower iterates
    trace_        per-iteration records (see bilevopt.traceio)
    counters_     oracle-call totals for the run

so solver instances compose with ``sklearn.base.clone``, grid search over
solver settings, and similar machinery.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator

from ..schedules import Schedule, geometric_schedule
from .baselines import run_baseline
from .bvfim import SolverConfig, run
from .implicit import ImplicitConfig
from .unrolled import UnrollConfig


class BilevelSolver(BaseEstimator):
    """Base class: common fitted-attribute plumbing."""

    def _finish(self, solution, trace):
        self.x_, self.y_ = solution
        self.trace_ = trace
        self.counters_ = trace.counters
        return self

    def fit(self, problem, x0=None, y0=None):
        raise NotImplementedError


class BVFIM(BilevelSolver):
    """Interior-point solver: log-barrier on the regularized value function."""

    def __init__(self, T_z=50, T_y=25, L=1, K=500, s1=0.01, s2=0.01,
                 alpha=0.01, outer_optimizer="adam", beta1=0.9, beta2=0.999,
                 eps=1e-8, warm_start_y=False, barrier_floor=1e-12,
                 backtrack_max=30, schedule=None, record_every=1, seed=0):
        self.T_z = T_z
        self.T_y = T_y
        self.L = L
        self.K = K
        self.s1 = s1
        self.s2 = s2
        self.alpha = alpha
        self.outer_optimizer = outer_optimizer
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.warm_start_y = warm_start_y
        self.barrier_floor = barrier_floor
        self.backtrack_max = backtrack_max
        self.schedule = schedule
        self.record_every = record_every
        self.seed = seed

    def _config(self) -> SolverConfig:
        return SolverConfig(
            T_z=self.T_z, T_y=self.T_y, L=self.L, K=self.K, s1=self.s1,
            s2=self.s2, alpha=self.alpha, outer_optimizer=self.outer_optimizer,
            beta1=self.beta1, beta2=self.beta2, eps=self.eps,
            warm_start_y=self.warm_start_y, barrier_floor=self.barrier_floor,
            backtrack_max=self.backtrack_max, record_every=self.record_every)

    def fit(self, problem, x0=None, y0=None):
        schedule = self.schedule if isinstance(self.schedule, Schedule) \
            else geometric_schedule()
        solution, trace = run(problem, schedule, self._config(),
                              seed=self.seed, x0=x0, y0=y0)
        return self._finish(solution, trace)


class RHG(BilevelSolver):
    """Unrolled reverse-mode baseline; set ``truncate_at`` for truncation."""

    def __init__(self, T=100, s=0.1, truncate_at=None, K=500, alpha=0.01,
                 outer_optimizer="adam", record_every=1, seed=0):
        self.T = T
        self.s = s
        self.truncate_at = truncate_at
        self.K = K
        self.alpha = alpha
        self.outer_optimizer = outer_optimizer
        self.record_every = record_every
        self.seed = seed

    def fit(self, problem, x0=None, y0=None):
        cfg = UnrollConfig(T=self.T, s=self.s, truncate_at=self.truncate_at)
        method = "rhg" if self.truncate_at is None else "trhg"
        solution, trace = run_baseline(
            problem, method, cfg, K=self.K, alpha=self.alpha, seed=self.seed,
            x0=x0, y0=y0, outer_optimizer=self.outer_optimizer,
            record_every=self.record_every)
        return self._finish(solution, trace)


class ImplicitGradient(BilevelSolver):
    """Implicit baseline with conjugate-gradient or Neumann inverse products."""

    def __init__(self, method="cg", T=100, J=20, s=0.1, damping=None, K=500,
                 alpha=0.01, outer_optimizer="adam", record_every=1, seed=0):
        self.method = method
        self.T = T
        self.J = J
        self.s = s
        self.damping = damping
        self.K = K
        self.alpha = alpha
        self.outer_optimizer = outer_optimizer
        self.record_every = record_every
        self.seed = seed

    def fit(self, problem, x0=None, y0=None):
        cfg = ImplicitConfig(T=self.T, J=self.J, method=self.method,
                             s=self.s, damping=self.damping)
        solution, trace = run_baseline(
            problem, self.method, cfg, K=self.K, alpha=self.alpha,
            seed=self.seed, x0=x0, y0=y0,
            outer_optimizer=self.outer_optimizer,
            record_every=self.record_every)
        return self._finish(solution, trace)
