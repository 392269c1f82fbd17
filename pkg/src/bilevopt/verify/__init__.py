from .brute import (GridSpec, brute_barrier_value, brute_phi, brute_psi,
                    f_star, f_star_mu, refined_basins)
from .checks import (CheckResult, EpiReport, check_epiconvergence,
                     check_fstar_limsup, check_mu_monotonicity,
                     check_gradient_identity, check_psi_ordering,
                     check_sandwich, check_schedule_contract, full_suite,
                     quick_suite)
from .fd import fd_gradient, relative_error
from .tight import (BarrierPoint, barrier_point, barrier_value_fn,
                    exact_hyper_gradient, tight_solve_y, tight_solve_z)

__all__ = [
    "BarrierPoint",
    "CheckResult",
    "EpiReport",
    "GridSpec",
    "barrier_point",
    "barrier_value_fn",
    "brute_barrier_value",
    "brute_phi",
    "brute_psi",
    "check_epiconvergence",
    "check_fstar_limsup",
    "check_mu_monotonicity",
    "check_gradient_identity",
    "check_psi_ordering",
    "check_sandwich",
    "check_schedule_contract",
    "exact_hyper_gradient",
    "f_star",
    "f_star_mu",
    "fd_gradient",
    "full_suite",
    "quick_suite",
    "refined_basins",
    "relative_error",
    "tight_solve_y",
    "tight_solve_z",
]
