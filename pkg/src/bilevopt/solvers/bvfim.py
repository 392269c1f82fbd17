"""Value-function interior-point solver for bilevel problems.

Each outer stage k works with vanishing regularization (mu1, mu2, theta,
tau) and performs L iterations of:

1. ``solve_z``    -- T_z gradient steps on the regularized lower objective
                     f(x, z) + mu1/2 ||z||^2, giving the reference level
                     f_reg = f(x, z) + mu1/2 ||z||^2 + mu2;
2. ``solve_y``    -- T_y guarded gradient steps on the log-barrier objective
                     F(x, y) + theta/2 ||y||^2 - tau * ln(f_reg - f(x, y));
3. ``hyper_gradient`` -- the first-order upper gradient
                     g = dF/dx + tau * (df/dx(x,y) - df/dx(x,z)) / (f_reg - f(x,y));
4. an Adam or plain gradient step on x, clamped onto the box when present.

Only value and gradient oracles are touched; the Hessian- and
Jacobian-vector counters stay at exactly zero for every run.

Oracle-call ledger (asserted by tests), per (k, l) with tau > 0:

* solve_z:          T_z x grad_f_y, 1 x eval_f
* start selection:  1 x eval_f in geometric mode (feasibility of the warm y;
                    adaptive-mu2 mode reuses this same evaluation for mu2)
* solve_y:          T_y x grad_F_y, T_y x grad_f_y, plus per trial step
                    1 x eval_f and (if feasible) 1 x eval_F, plus 1 x eval_F
                    for the initial objective; the start value f(x, y0) is
                    handed in, never re-evaluated
* hyper_gradient:   1 x grad_F_x, 2 x grad_f_x (0 x grad_f_x when tau == 0)

Backtracking halves the trial step until the iterate is strictly inside the
barrier domain (margin >= barrier_floor) and the penalized objective has
not increased; the accepted scale seeds the next step (doubled, capped at
s2).  Trial counts are therefore bounded by T_y * (1 + backtrack_max).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..counters import CountedOracles, OracleCounters
from ..exceptions import (BacktrackingExhaustedError, BarrierDomainError,
                          DivergedError, InfeasibleStartError)
from ..schedules import Schedule, geometric_schedule
from ..traceio.trace import Trace, TraceRecord
from .optim import AdamMoments, adam_step, project_box


@dataclass(frozen=True)
class SolverConfig:
    """Iteration counts, step sizes and guards for one solver run."""

    T_z: int = 50
    T_y: int = 25
    L: int = 1
    K: int = 500
    s1: float = 0.01
    s2: float = 0.01
    alpha: float = 0.01
    outer_optimizer: str = "adam"     # "adam" | "gd"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    warm_start_y: bool = False
    barrier_floor: float = 1e-12
    backtrack_max: int = 30
    record_every: int = 1

    def __post_init__(self):
        if min(self.T_z, self.T_y, self.L) < 1 or self.K < 0:
            raise ValueError("iteration counts must be positive (K may be 0)")
        if min(self.s1, self.s2) <= 0 or self.alpha < 0:
            raise ValueError("inner step sizes must be positive and the "
                             "outer step size nonnegative")
        if not (0.0 < self.barrier_floor <= 1e-6):
            raise ValueError("barrier_floor must lie in (0, 1e-6]")
        if self.outer_optimizer not in ("adam", "gd"):
            raise ValueError(f"unknown outer optimizer {self.outer_optimizer!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class StageState:
    """Mutable per-run state carried across outer stages."""

    k: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    f_reg_value: float = np.nan
    moments: Optional[AdamMoments] = None
    t: int = 0                       # total accepted x-updates (Adam time)
    last_backtracks: int = 0
    last_grad_norm: float = np.nan
    last_F: float = np.nan
    last_f: float = np.nan


def solve_z(problem, x, mu1, mu2, y0, T_z, s1, counters,
            k=None, l=None) -> Tuple[np.ndarray, float]:
    """T_z shrinkage-regularized gradient steps on the lower problem.

    Returns (z, f_reg) where f_reg = f(x, z) + mu1/2 ||z||^2 + mu2.  Exactly
    T_z calls to grad_f_y and one call to eval_f are made.
    """
    if T_z < 1:
        raise ValueError("T_z must be >= 1")
    if mu1 <= 0:
        raise ValueError("mu1 must be positive")
    oracles = CountedOracles(problem, counters, context=f"solve_z k={k} l={l}")
    z = np.array(y0, dtype=float)
    for t in range(T_z):
        z = z - s1 * (oracles.gfy(x, z) + mu1 * z)
        if not np.all(np.isfinite(z)):
            raise DivergedError("z iterate diverged", k=k, l=l, t=t)
    f_z = oracles.f(x, z)
    f_reg = f_z + 0.5 * mu1 * float(z @ z) + mu2
    return z, f_reg


def solve_y(problem, x, f_reg, theta, tau, y0, T_y, s2, config, counters,
            f_y0=None, k=None, l=None):
    """T_y accepted barrier-descent steps starting strictly inside the domain.

    Every accepted iterate keeps f_reg - f(x, y) >= barrier_floor and does
    not increase the penalized objective.  Raises ``InfeasibleStartError``
    when y0 itself is outside the domain (the caller then warm starts from
    z) and ``BacktrackingExhaustedError`` when no acceptable step exists
    within ``backtrack_max`` halvings.

    Returns (y, info); info carries the cached f(x,y), F(x,y), penalized
    objective, and trial statistics so callers need no extra oracle calls.
    """
    if T_y < 1:
        raise ValueError("T_y must be >= 1")
    oracles = CountedOracles(problem, counters, context=f"solve_y k={k} l={l}")
    y = np.array(y0, dtype=float)
    f_y = oracles.f(x, y) if f_y0 is None else float(f_y0)
    u = f_reg - f_y
    if u <= 0.0:
        raise InfeasibleStartError(
            f"barrier start infeasible: f_reg - f(x, y0) = {u:.3e} <= 0")
    F_y = oracles.F(x, y)
    obj = F_y + 0.5 * theta * float(y @ y) - tau * np.log(u)
    scale = s2
    backtracks = 0
    trials = 0
    feasible_trials = 0
    for t in range(T_y):
        g = oracles.gFy(x, y) + theta * y + tau * oracles.gfy(x, y) / u
        s = scale
        accepted = False
        for _ in range(config.backtrack_max + 1):
            cand = y - s * g
            trials += 1
            f_c = oracles.f(x, cand)
            u_c = f_reg - f_c
            if u_c >= config.barrier_floor:
                feasible_trials += 1
                F_c = oracles.F(x, cand)
                obj_c = F_c + 0.5 * theta * float(cand @ cand) - tau * np.log(u_c)
                if obj_c <= obj:
                    y, f_y, F_y, u, obj = cand, f_c, F_c, u_c, obj_c
                    accepted = True
                    break
            s *= 0.5
            backtracks += 1
        if not accepted:
            raise BacktrackingExhaustedError(
                f"no acceptable barrier step after {config.backtrack_max} halvings",
                k=k, l=l, t=t)
        # reuse the accepted scale, growing back toward s2
        scale = min(2.0 * s, s2)
    info = {"f_y": f_y, "F_y": F_y, "obj": obj, "backtracks": backtracks,
            "trials": trials, "feasible_trials": feasible_trials}
    return y, info


def hyper_gradient(problem, x, y, z, f_reg, tau, counters, f_y=None):
    """First-order upper gradient at (x, y, z).

    g = dF/dx(x, y) + tau * (df/dx(x, y) - df/dx(x, z)) / (f_reg - f(x, y)).

    For tau == 0 the indirect term is skipped entirely (no division, no
    df/dx calls); otherwise exactly one grad_F_x and two grad_f_x calls are
    made.  ``f_y`` passes a cached f(x, y) to avoid an eval_f call.
    """
    oracles = CountedOracles(problem, counters, context="hyper_gradient")
    g = oracles.gFx(x, y)
    if tau == 0.0:
        return g
    u = f_reg - (oracles.f(x, y) if f_y is None else float(f_y))
    if u <= 0.0:
        raise BarrierDomainError(
            f"hypergradient outside barrier domain: f_reg - f(x, y) = {u:.3e}")
    return g + tau * (oracles.gfx(x, y) - oracles.gfx(x, z)) / u


def outer_stage(problem, state: StageState, schedule: Schedule,
                config: SolverConfig, counters: OracleCounters,
                trace: Optional[Trace] = None,
                clock_origin: Optional[float] = None) -> StageState:
    """Run the L inner x-iterations of stage ``state.k`` and advance k."""
    k = state.k
    x, y, z = state.x, state.y, state.z
    mu1, mu2_sched, theta, tau = schedule.values(k)
    moments = state.moments or AdamMoments.zeros(problem.dim_x)
    t = state.t
    oracles = CountedOracles(problem, counters, context=f"stage k={k}")

    for l in range(config.L):
        try:
            # current lower value: decides barrier feasibility of the warm y
            # and doubles as the adaptive mu2 source
            f_warm = oracles.f(x, y)
            mu2 = f_warm + schedule.mu2_offset if schedule.mu2_from_f else mu2_sched

            z, f_reg = solve_z(problem, x, mu1, mu2, z, config.T_z, config.s1,
                               counters, k=k, l=l)
            f_at_z = f_reg - 0.5 * mu1 * float(z @ z) - mu2

            if config.warm_start_y or f_reg - f_warm <= 0.0:
                y0, f_y0 = z, f_at_z
            else:
                y0, f_y0 = y, f_warm
            y, info = solve_y(problem, x, f_reg, theta, tau, y0, config.T_y,
                              config.s2, config, counters, f_y0=f_y0, k=k, l=l)

            g = hyper_gradient(problem, x, y, z, f_reg, tau, counters,
                               f_y=info["f_y"])
        except (DivergedError, BacktrackingExhaustedError) as exc:
            exc.k, exc.l = k, l
            raise

        t += 1
        if config.outer_optimizer == "adam":
            delta, moments = adam_step(moments, g, config.alpha, config.beta1,
                                       config.beta2, config.eps, t=t)
            x = x + delta
        else:
            x = x - config.alpha * g
        x = project_box(x, problem.box_x)
        if not np.all(np.isfinite(x)):
            raise DivergedError("x iterate diverged", k=k, l=l)

        state.last_backtracks = info["backtracks"]
        state.last_grad_norm = float(np.linalg.norm(g))
        state.last_F = info["F_y"]
        state.last_f = info["f_y"]
        state.f_reg_value = f_reg
        if trace is not None and (t - 1) % config.record_every == 0:
            wall_ms = 0.0 if clock_origin is None else \
                (time.perf_counter() - clock_origin) * 1e3
            trace.append(TraceRecord.capture(
                k=k, l=l, step=t, x=x, F=info["F_y"], f=info["f_y"],
                f_reg=f_reg, grad_norm=state.last_grad_norm,
                dist_x=_dist_to_known(problem, x), wall_ms=wall_ms,
                counters=counters.snapshot(), backtracks=info["backtracks"],
                dist_y=_dist_to_known_y(problem, y)))

    state.k, state.x, state.y, state.z = k + 1, x, y, z
    state.moments, state.t = moments, t
    return state


def _dist_to_known(problem, x) -> float:
    if problem.known_optimum is None:
        return float("nan")
    return float(np.linalg.norm(x - problem.known_optimum[0]))


def _dist_to_known_y(problem, y) -> float:
    if problem.known_optimum is None:
        return float("nan")
    return float(np.linalg.norm(y - problem.known_optimum[1]))


def run(problem, schedule: Optional[Schedule] = None,
        config: Optional[SolverConfig] = None, seed: int = 0,
        x0=None, y0=None):
    """K outer stages from (x0, y0); returns ((x, y), trace).

    Deterministic for fixed inputs; ``seed`` is recorded in the trace
    metadata and seeds nothing unless the initial point is omitted on a
    problem without a natural origin (zeros are used by default).  On
    failure the partial trace is attached to the raised error.
    """
    schedule = schedule or geometric_schedule()
    config = config or SolverConfig()
    x = np.zeros(problem.dim_x) if x0 is None else np.array(x0, dtype=float)
    y = np.zeros(problem.dim_y) if y0 is None else np.array(y0, dtype=float)
    if x.shape != (problem.dim_x,) or y.shape != (problem.dim_y,):
        raise ValueError("x0/y0 shapes do not match the problem dimensions")

    counters = OracleCounters()
    trace = Trace(meta={"problem": problem.name, "solver": "bvfim",
                        "seed": seed, "K": config.K, "L": config.L,
                        "schedule_mode": schedule.mode})
    state = StageState(k=0, x=x, y=y, z=np.zeros(problem.dim_y),
                       moments=AdamMoments.zeros(problem.dim_x))
    origin = time.perf_counter()
    try:
        for _ in range(config.K):
            state = outer_stage(problem, state, schedule, config, counters,
                                trace=trace, clock_origin=origin)
    except Exception as exc:
        exc.partial_trace = trace
        raise
    trace.counters = counters
    return (state.x, state.y), trace
