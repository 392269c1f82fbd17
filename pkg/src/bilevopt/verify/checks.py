"""Numeric spot checks of the convergence theory, at desk scale.

Each check returns a ``CheckResult`` with the measured quantities, so the
CLI can emit a machine-readable report.  Thresholds for asymptotic
statements (1e-3 tails, the 0.05 final epi-convergence gap) are finite-
prefix engineering surrogates, not theorems; they are recorded alongside
every measurement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import GridResolutionError
from ..problems import make_quadratic, make_toy
from ..schedules import Schedule, geometric_schedule
from .brute import (GridSpec, brute_barrier_value, brute_phi, brute_psi,
                    f_star, f_star_mu, refined_basins)
from .fd import fd_gradient, relative_error
from .tight import barrier_value_fn, exact_hyper_gradient


@dataclass
class CheckResult:
    check_id: str
    passed: bool
    measured: dict
    threshold: dict
    notes: str = ""

    def as_dict(self) -> dict:
        return {"check_id": self.check_id, "passed": bool(self.passed),
                "measured": _plain(self.measured),
                "threshold": _plain(self.threshold), "notes": self.notes}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


@dataclass
class EpiReport:
    stages: List[int]
    xs: np.ndarray
    phi: np.ndarray                      # brute phi per grid x
    phi_k: np.ndarray                    # shape (len(stages), len(xs))
    upper_gap: List[float] = field(default_factory=list)
    lower_gap: List[float] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    excluded: int = 0

    def finalize(self):
        diff = self.phi_k - self.phi[None, :]
        with np.errstate(invalid="ignore"):
            self.upper_gap = [float(np.nanmax(np.maximum(d, 0.0))) for d in diff]
            self.lower_gap = [float(np.nanmax(np.maximum(-d, 0.0))) for d in diff]
        return self


def check_gradient_identity(problem, xs: Sequence[np.ndarray], mu1: float,
                         mu2: float, theta: float, tau: float,
                         tol_rel: float = 1e-4, h: float = 1e-6,
                         inner_tol: float = 1e-10) -> CheckResult:
    """Hypergradient vs finite differences of the barrier value function."""
    value = barrier_value_fn(problem, mu1, mu2, theta, tau, tol=inner_tol)
    errors = []
    for x in xs:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        g = exact_hyper_gradient(problem, x, mu1, mu2, theta, tau, tol=inner_tol)
        g_fd = fd_gradient(value, x, h=h)
        errors.append(relative_error(g, g_fd))
    worst = float(max(errors))
    return CheckResult(
        check_id=f"gradient-identity[{problem.name}]",
        passed=worst <= tol_rel,
        measured={"max_rel_error": worst, "per_point": errors,
                  "regularization": [mu1, mu2, theta, tau]},
        threshold={"max_rel_error": tol_rel})


def check_sandwich(problem, xs: Sequence[np.ndarray],
                   mus: Sequence[Tuple[float, float]], grid: GridSpec,
                   slack: float = 1e-6) -> CheckResult:
    """f* + mu2 <= f*_mu <= f* + mu1/2 ||y*||^2 + mu2 at sampled points.

    The lower-level solution y*(x) is located by refined grid search, so
    the check stays independent of any solver code path.
    """
    worst_low, worst_high = -np.inf, -np.inf
    for x in xs:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        fs, basins = refined_basins(lambda y: problem.eval_f(x, y), grid,
                                    keep_margin=0.0)
        y_star = basins[0][1]
        for mu1, mu2 in mus:
            fsm = f_star_mu(problem, x, mu1, mu2, grid)
            low_violation = (fs + mu2) - fsm
            high_violation = fsm - (fs + 0.5 * mu1 * float(y_star @ y_star) + mu2)
            worst_low = max(worst_low, low_violation)
            worst_high = max(worst_high, high_violation)
    return CheckResult(
        check_id=f"sandwich-bound[{problem.name}]",
        passed=(worst_low <= slack and worst_high <= slack),
        measured={"worst_lower_violation": float(worst_low),
                  "worst_upper_violation": float(worst_high)},
        threshold={"slack": slack})


def check_mu_monotonicity(problem, xs: Sequence[np.ndarray], grid: GridSpec,
                          slack: float = 1e-9) -> CheckResult:
    """f*_mu is nondecreasing in mu1 and in mu2 at fixed x."""
    mu1s = [1e-3, 1e-2, 1e-1, 1.0]
    mu2s = [1e-3, 1e-2, 1e-1, 1.0]
    worst = -np.inf
    for x in xs:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        for mu2 in (1e-2,):
            vals = [f_star_mu(problem, x, m1, mu2, grid) for m1 in mu1s]
            worst = max(worst, float(np.max(-np.diff(vals))))
        for mu1 in (1e-2,):
            vals = [f_star_mu(problem, x, mu1, m2, grid) for m2 in mu2s]
            worst = max(worst, float(np.max(-np.diff(vals))))
    return CheckResult(
        check_id=f"fstar-mu-monotone[{problem.name}]",
        passed=worst <= slack,
        measured={"worst_decrease": worst},
        threshold={"slack": slack})


def check_fstar_limsup(problem, x_seq: Sequence, mu_seq: Sequence[Tuple[float, float]],
                      x_bar, grid: GridSpec, eps: float = 1e-3) -> CheckResult:
    """Tail check of limsup f*_{mu_k}(x_k) <= f*(x_bar).

    Evaluates the finite prefix, then asserts the running max over the
    final quarter stays within ``eps`` above f*(x_bar).
    """
    if len(x_seq) != len(mu_seq) or len(x_seq) < 8:
        raise ValueError("need matched sequences with at least 8 entries")
    x_bar = np.atleast_1d(np.asarray(x_bar, dtype=float))
    f_limit = f_star(problem, x_bar, grid)
    vals = []
    for x, (mu1, mu2) in zip(x_seq, mu_seq):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        vals.append(f_star_mu(problem, x, mu1, mu2, grid))
    tail = vals[3 * len(vals) // 4:]
    tail_max = float(np.max(tail))
    return CheckResult(
        check_id=f"fstar-limsup[{problem.name}]",
        passed=tail_max <= f_limit + eps,
        measured={"tail_max": tail_max, "f_star_limit": float(f_limit),
                  "prefix": len(vals)},
        threshold={"eps": eps})


def check_psi_ordering(problem, xs: Sequence, schedule: Schedule,
                       stages: Sequence[int], grid: GridSpec,
                       slack: float = 1e-6) -> CheckResult:
    """Relaxation ordering psi_{mu_k}(x) <= phi_k(x) on all samples."""
    worst = -np.inf
    for k in stages:
        mu1, mu2, theta, tau = schedule.values(k)
        for x in xs:
            x = np.atleast_1d(np.asarray(x, dtype=float))
            psi = brute_psi(problem, x, (mu1, mu2), grid)
            phi_k = brute_barrier_value(problem, x, mu1, mu2, theta, tau, grid)
            worst = max(worst, psi - phi_k)
    return CheckResult(
        check_id=f"psi-ordering[{problem.name}]",
        passed=worst <= slack,
        measured={"worst_violation": float(worst), "stages": list(stages)},
        threshold={"slack": slack})


def check_epiconvergence(problem, schedule: Schedule, xs: Sequence[float],
                         stages: Sequence[int], grid_y: GridSpec,
                         gap_slack: float = 1e-3, final_gap: float = 0.05,
                         max_excluded_frac: float = 0.01
                         ) -> Tuple[CheckResult, EpiReport]:
    """Stagewise gap between the barrier approximation and brute phi.

    Asserts the upper gap max_x(phi_k - phi) is nonincreasing across the
    reported stages (within ``gap_slack``) and at most ``final_gap`` at the
    last stage.  Points where a brute evaluation fails are excluded and
    counted; more than ``max_excluded_frac`` exclusions fails the check.
    """
    xs_arr = np.array([np.atleast_1d(np.asarray(x, dtype=float)) for x in xs])
    phi = np.full(len(xs_arr), np.nan)
    excluded = 0
    for i, x in enumerate(xs_arr):
        try:
            phi[i] = brute_phi(problem, x, grid_y)
        except GridResolutionError:
            excluded += 1
    phi_k = np.full((len(stages), len(xs_arr)), np.nan)
    residuals = []
    for si, k in enumerate(stages):
        mu1, mu2, theta, tau = schedule.values(k)
        residuals.append(schedule.decay_residual(k))
        for i, x in enumerate(xs_arr):
            if np.isnan(phi[i]):
                continue
            try:
                phi_k[si, i] = brute_barrier_value(problem, x, mu1, mu2,
                                                   theta, tau, grid_y)
            except GridResolutionError:
                excluded += 1
    report = EpiReport(stages=list(stages), xs=xs_arr, phi=phi,
                       phi_k=phi_k, residuals=residuals,
                       excluded=excluded).finalize()

    total = len(xs_arr) * (1 + len(stages))
    frac = excluded / total
    gaps = report.upper_gap
    monotone = all(gaps[i + 1] <= gaps[i] + gap_slack
                   for i in range(len(gaps) - 1))
    passed = (monotone and gaps[-1] <= final_gap and frac <= max_excluded_frac)
    return CheckResult(
        check_id=f"epiconvergence[{problem.name}]",
        passed=passed,
        measured={"upper_gap": gaps, "lower_gap": report.lower_gap,
                  "residuals": residuals, "excluded_fraction": frac,
                  "stages": list(stages)},
        threshold={"gap_slack": gap_slack, "final_gap": final_gap,
                   "max_excluded_frac": max_excluded_frac},
        notes="upper gap must be nonincreasing and small at the final stage"
    ), report


def check_schedule_contract(schedule: Schedule, k_min: int = 2000,
                            ks: Optional[Sequence[int]] = None,
                            eps: float = 1e-3) -> CheckResult:
    """|tau_k ln mu_{k,2}| <= eps for all sampled k >= k_min, and decaying."""
    ks = list(ks) if ks is not None else [2000, 2500, 3000, 4000, 6000, 10000]
    ks = [k for k in ks if k >= k_min]
    residuals = [schedule.decay_residual(k) for k in ks]
    decreasing = all(residuals[i + 1] <= residuals[i]
                     for i in range(len(residuals) - 1))
    worst = float(np.max(residuals))
    return CheckResult(
        check_id="schedule-decay-contract",
        passed=(worst <= eps and decreasing),
        measured={"max_residual": worst, "ks": ks, "residuals": residuals},
        threshold={"eps": eps, "k_min": k_min})


# ---------------------------------------------------------------------------
# canned suites

def _sample_points(dim, lo, hi, count, seed):
    rng = np.random.default_rng(seed)
    return [rng.uniform(lo, hi, size=dim) for _ in range(count)]


def quick_suite(seed: int = 0) -> List[CheckResult]:
    """Gradient-identity, sandwich and schedule checks; aims for < 60 s."""
    toy = make_toy(0.0)
    quad = make_quadratic(np.array([[1.0, 0.3], [-0.2, 0.8]]),
                          np.array([0.5, -0.4]))
    grid2 = GridSpec(lo=np.array([-4.0, -4.0]), hi=np.array([4.0, 4.0]),
                     points_per_dim=41)
    results = [
        check_gradient_identity(toy, _sample_points(1, -2.0, 2.0, 20, seed),
                             mu1=1.5, mu2=0.5, theta=0.5, tau=0.8),
        check_gradient_identity(quad, _sample_points(2, -1.5, 1.5, 20, seed + 1),
                             mu1=0.2, mu2=0.1, theta=0.3, tau=0.4),
        check_sandwich(quad, _sample_points(2, -1.0, 1.0, 10, seed + 2),
                       mus=[(1e-3, 1e-3), (0.05, 0.02), (0.5, 0.2)],
                       grid=grid2),
        check_mu_monotonicity(quad, _sample_points(2, -1.0, 1.0, 4, seed + 3),
                              grid=grid2),
        check_schedule_contract(geometric_schedule()),
    ]
    return results


def full_suite(seed: int = 0) -> List[CheckResult]:
    """Quick suite plus limsup tails, relaxation ordering and epi-convergence."""
    results = quick_suite(seed)
    toy = make_toy(0.0)
    quad = make_quadratic(np.array([[1.0, 0.3], [-0.2, 0.8]]),
                          np.array([0.5, -0.4]))
    grid1 = GridSpec(lo=np.array([-8.0]), hi=np.array([8.0]),
                     points_per_dim=1201)
    grid2 = GridSpec(lo=np.array([-4.0, -4.0]), hi=np.array([4.0, 4.0]),
                     points_per_dim=41)
    sched = geometric_schedule()

    ks = list(range(0, 1201, 25))
    mu_seq = [(sched.mu1(k), sched.mu2(k)) for k in ks]
    results.append(check_fstar_limsup(
        quad, [np.array([0.4, -0.3])] * len(ks), mu_seq,
        np.array([0.4, -0.3]), grid2))
    results.append(check_fstar_limsup(
        toy, [np.array([-np.pi / 4 + 1.0 / (k + 1)]) for k in ks], mu_seq,
        np.array([-np.pi / 4]), grid1))

    # stages late enough that the barrier margin f*_mu - f stays below 1,
    # keeping every barrier minimizer inside the relaxed strip
    results.append(check_psi_ordering(
        toy, [np.array([v]) for v in (-1.0, 0.0, 1.5, 3.0)],
        sched, stages=[250, 600, 1200], grid=grid1))
    results.append(check_psi_ordering(
        quad, _sample_points(2, -1.0, 1.0, 3, seed + 4),
        sched, stages=[100, 400, 800], grid=grid2))

    epi_result, _ = check_epiconvergence(
        toy, sched, xs=list(np.linspace(-2.0, 4.0, 13)),
        stages=[0, 500, 1000, 2000], grid_y=grid1)
    results.append(epi_result)
    return results
