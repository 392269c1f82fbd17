"""Bilevel optimization solvers with a value-function interior-point core.

The main entry points:

* ``bilevopt.problems`` -- oracle bundles and builtin benchmarks
* ``bilevopt.solvers``  -- the interior-point solver (``BVFIM``) and the
  unrolled/implicit baselines (``RHG``, ``ImplicitGradient``), both as
  scikit-learn style estimators and as plain functions
* ``bilevopt.verify``   -- brute-force oracles and numeric theory checks
* ``bilevopt.traceio``  -- run configuration files, trace CSVs, reports
* ``bilevopt.cli``      -- the ``bilevopt`` command line front end
"""

from . import problems, schedules, solvers, traceio, verify
from .counters import OracleCounters
from .problems import (HyperCleanProblem, Problem, detection_f1,
                       make_hyperclean, make_problem, make_quadratic,
                       make_random_quadratic, make_toy, with_fd_second_order)
from .schedules import (Schedule, adaptive_mu2_schedule, fixed_schedule,
                        geometric_schedule)
from .solvers import (BVFIM, ImplicitConfig, ImplicitGradient, RHG,
                      SolverConfig, UnrollConfig, run, run_baseline)

__all__ = [
    "BVFIM",
    "HyperCleanProblem",
    "ImplicitConfig",
    "ImplicitGradient",
    "OracleCounters",
    "Problem",
    "RHG",
    "Schedule",
    "SolverConfig",
    "UnrollConfig",
    "adaptive_mu2_schedule",
    "detection_f1",
    "fixed_schedule",
    "geometric_schedule",
    "make_hyperclean",
    "make_problem",
    "make_quadratic",
    "make_random_quadratic",
    "make_toy",
    "problems",
    "run",
    "run_baseline",
    "schedules",
    "solvers",
    "traceio",
    "verify",
    "with_fd_second_order",
]
