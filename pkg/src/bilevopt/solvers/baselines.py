"""Outer loop for the unrolled and implicit reference solvers.

Mirrors the interior-point run loop (same trace schema, same outer
optimizers) with the hypergradient supplied by ``rhg_hypergradient`` or
``implicit_hypergradient``.  The lower level restarts from the supplied y0
at every outer iteration, which is what makes these methods sensitive to
initialization on non-convex lower problems.
"""

from __future__ import annotations

import time
import warnings
from typing import Union

import numpy as np

from ..counters import CountedOracles, OracleCounters
from ..exceptions import CurvatureWarning
from ..traceio.trace import Trace, TraceRecord
from .bvfim import _dist_to_known, _dist_to_known_y
from .implicit import ImplicitConfig, implicit_hypergradient
from .optim import AdamMoments, adam_step, project_box
from .unrolled import UnrollConfig, rhg_hypergradient

BASELINE_METHODS = ("rhg", "trhg", "cg", "neumann")


def default_baseline_config(method: str, T: int = 100, J: int = 20,
                            s: float = 0.1) -> Union[UnrollConfig, ImplicitConfig]:
    if method == "rhg":
        return UnrollConfig(T=T, s=s)
    if method == "trhg":
        return UnrollConfig(T=T, s=s, truncate_at=max(T // 2, 1))
    if method in ("cg", "neumann"):
        return ImplicitConfig(T=T, J=J, method=method, s=s)
    raise ValueError(f"unknown baseline method {method!r}")


def run_baseline(problem, method: str,
                 config: Union[UnrollConfig, ImplicitConfig, None] = None,
                 K: int = 500, alpha: float = 0.01, seed: int = 0,
                 x0=None, y0=None, outer_optimizer: str = "adam",
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
                 record_every: int = 1):
    """K outer steps of the chosen baseline; returns ((x, y_T), trace).

    Curvature warnings raised by conjugate gradient are counted into
    ``trace.meta["curvature_warnings"]`` and re-emitted once at the end.
    """
    if method not in BASELINE_METHODS:
        raise ValueError(f"unknown baseline method {method!r}")
    if config is None:
        config = default_baseline_config(method)
    x = np.zeros(problem.dim_x) if x0 is None else np.array(x0, dtype=float)
    y_init = np.zeros(problem.dim_y) if y0 is None else np.array(y0, dtype=float)

    counters = OracleCounters()
    oracles = CountedOracles(problem, counters, context=f"baseline-{method}")
    trace = Trace(meta={"problem": problem.name, "solver": method,
                        "seed": seed, "K": K, "L": 1,
                        "curvature_warnings": 0})
    moments = AdamMoments.zeros(problem.dim_x)
    y = y_init.copy()
    origin = time.perf_counter()

    for t in range(1, K + 1):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", CurvatureWarning)
            if method in ("rhg", "trhg"):
                g, y = rhg_hypergradient(problem, x, y_init, config, counters)
            else:
                g, y = implicit_hypergradient(problem, x, y_init, config, counters)
        trace.meta["curvature_warnings"] += sum(
            1 for w in caught if issubclass(w.category, CurvatureWarning))

        if outer_optimizer == "adam":
            delta, moments = adam_step(moments, g, alpha, beta1, beta2, eps, t=t)
            x = x + delta
        else:
            x = x - alpha * g
        x = project_box(x, problem.box_x)

        if (t - 1) % record_every == 0 or t == K:
            trace.append(TraceRecord.capture(
                k=t - 1, l=0, step=t, x=x,
                F=oracles.F(x, y), f=oracles.f(x, y), f_reg=float("nan"),
                grad_norm=float(np.linalg.norm(g)),
                dist_x=_dist_to_known(problem, x),
                wall_ms=(time.perf_counter() - origin) * 1e3,
                counters=counters.snapshot(),
                dist_y=_dist_to_known_y(problem, y)))

    if trace.meta["curvature_warnings"]:
        warnings.warn(
            f"{method} met non-positive curvature in "
            f"{trace.meta['curvature_warnings']} of {K} iterations",
            CurvatureWarning, stacklevel=2)
    trace.counters = counters
    return (x, y), trace
