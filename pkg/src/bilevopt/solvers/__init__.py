from .baselines import BASELINE_METHODS, default_baseline_config, run_baseline
from .bvfim import SolverConfig, StageState, hyper_gradient, outer_stage, run, solve_y, solve_z
from .estimators import BVFIM, BilevelSolver, ImplicitGradient, RHG
from .implicit import ImplicitConfig, implicit_hypergradient
from .optim import AdamMoments, adam_step, project_box
from .unrolled import UnrollConfig, rhg_hypergradient

__all__ = [
    "BASELINE_METHODS",
    "BVFIM",
    "AdamMoments",
    "BilevelSolver",
    "ImplicitConfig",
    "ImplicitGradient",
    "RHG",
    "SolverConfig",
    "StageState",
    "UnrollConfig",
    "adam_step",
    "default_baseline_config",
    "hyper_gradient",
    "implicit_hypergradient",
    "outer_stage",
    "project_box",
    "rhg_hypergradient",
    "run",
    "run_baseline",
    "solve_y",
    "solve_z",
]
