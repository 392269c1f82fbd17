"""Complexity benchmark: hypergradient wall time across dimensions and budgets.

Times one full hypergradient computation per cell (inner solves included)
with a monotonic clock, discarding warmup repetitions and reporting the
median, then fits wall time against the total inner step count to expose
the linear scaling of the interior-point path, and compares per-iteration
cost against implicit conjugate gradient with finite-difference
Hessian-vector products across lower-level dimensions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .counters import OracleCounters
from .problems import Problem, with_fd_second_order
from .solvers import (ImplicitConfig, SolverConfig, implicit_hypergradient,
                      hyper_gradient, solve_y, solve_z)

WARMUP = 3
REPEATS = 7


def _bench_problem(n: int, m: int, seed: int) -> Problem:
    """Anisotropic quadratic lower level, so conjugate gradient cannot
    terminate in one iteration: f = 1/2 y' D y - y' A x with D spread over
    [0.5, 2]."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, m)) / np.sqrt(m)
    b = rng.normal(size=n)
    D = np.linspace(0.5, 2.0, n)

    return Problem(
        dim_x=m, dim_y=n,
        eval_F=lambda x, y: 0.5 * float(x @ x) + 0.5 * float((y - b) @ (y - b)),
        eval_f=lambda x, y: 0.5 * float(y @ (D * y)) - float(y @ (A @ x)),
        grad_F_x=lambda x, y: np.array(x, dtype=float),
        grad_F_y=lambda x, y: y - b,
        grad_f_x=lambda x, y: -A.T @ y,
        grad_f_y=lambda x, y: D * y - A @ x,
        name=f"bench-quadratic(n={n})")


@dataclass
class BenchRow:
    method: str
    n: int
    T: int
    J: int
    wall_us: float
    iterations: int
    first_order_calls: int
    second_order_calls: int

    def as_dict(self):
        return {"method": self.method, "n": self.n, "T": self.T, "J": self.J,
                "wall_us": self.wall_us, "iterations": self.iterations,
                "first_order_calls": self.first_order_calls,
                "second_order_calls": self.second_order_calls}


def _median_wall(fn, repeats: int = REPEATS, warmup: int = WARMUP) -> float:
    for _ in range(warmup):
        fn()
    walls = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        walls.append((time.perf_counter() - t0) * 1e6)
    return float(np.median(walls))


def _paired_walls(fn_a, fn_b, repeats: int = REPEATS, warmup: int = WARMUP):
    """Alternate the two timed calls within each repetition.

    Pairing makes their ratio robust against slow drifts in machine load
    that would otherwise dominate cells of similar cost.
    """
    for _ in range(warmup):
        fn_a()
        fn_b()
    walls_a, walls_b, ratios = [], [], []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn_a()
        t1 = time.perf_counter()
        fn_b()
        t2 = time.perf_counter()
        walls_a.append((t1 - t0) * 1e6)
        walls_b.append((t2 - t1) * 1e6)
        ratios.append((t1 - t0) / (t2 - t1))
    return (float(np.median(walls_a)), float(np.median(walls_b)),
            float(np.median(ratios)))


def _bvfim_once(problem, T_total: int):
    """One interior-point hypergradient computation as a timed closure.

    Early-stage regularization and a tiny step keep the iterates deep
    inside the wide barrier: every trial accepts, and the cell measures the
    method's intrinsic per-iteration oracle profile (one lower gradient per
    z-step; two gradients plus two evaluations per y-step) rather than
    problem-dependent backtracking overhead.
    """
    T_z = max(T_total // 2, 1)
    T_y = max(T_total - T_z, 1)
    config = SolverConfig(T_z=T_z, T_y=T_y, K=1, s1=1e-4, s2=1e-4)
    mu1 = mu2 = theta = tau = 1.0
    x = np.zeros(problem.dim_x)
    counters_box = {}

    def once():
        counters = OracleCounters()
        z, f_reg = solve_z(problem, x, mu1, mu2, np.zeros(problem.dim_y),
                           T_z, config.s1, counters)
        f_at_z = f_reg - 0.5 * mu1 * float(z @ z) - mu2
        y, info = solve_y(problem, x, f_reg, theta, tau, z, T_y, config.s2,
                          config, counters, f_y0=f_at_z)
        hyper_gradient(problem, x, y, z, f_reg, tau, counters, f_y=info["f_y"])
        counters_box["last"] = counters

    return once, T_z + T_y, counters_box


def _cg_once(problem, T: int, J: int):
    cfg = ImplicitConfig(T=T, J=J, method="cg", s=0.1)
    x = np.zeros(problem.dim_x)
    y0 = np.zeros(problem.dim_y)
    counters_box = {}

    def once():
        counters = OracleCounters()
        implicit_hypergradient(problem, x, y0, cfg, counters)
        counters_box["last"] = counters

    return once, T + J, counters_box


def _bvfim_cell(problem, T_total: int) -> BenchRow:
    once, iterations, box = _bvfim_once(problem, T_total)
    wall = _median_wall(once)
    counters = box["last"]
    return BenchRow(method="bvfim", n=problem.dim_y, T=T_total, J=0,
                    wall_us=wall, iterations=iterations,
                    first_order_calls=counters.total_first_order(),
                    second_order_calls=counters.total_second_order())


def linear_fit_r2(xs: Sequence[float], ys: Sequence[float]) -> float:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def run_bench(dims: Sequence[int] = (100, 1000, 10000),
              T_grid: Sequence[int] = (20, 50, 100, 200, 400),
              fit_n: int = 1000, m: int = 10, J: int = 20, seed: int = 0):
    """Full benchmark; returns (rows, summary dict)."""
    rows: List[BenchRow] = []
    ratios = {}
    for n in dims:
        base = _bench_problem(n, m, seed=seed)
        fd_problem = with_fd_second_order(base)
        bv_once, bv_iters, bv_box = _bvfim_once(base, T_total=120)
        cg_once, cg_iters, cg_box = _cg_once(fd_problem, T=100, J=J)
        bv_wall, cg_wall, wall_ratio = _paired_walls(bv_once, cg_once)
        ratios[n] = wall_ratio * cg_iters / bv_iters
        bc, cc = bv_box["last"], cg_box["last"]
        rows += [
            BenchRow(method="bvfim", n=n, T=120, J=0, wall_us=bv_wall,
                     iterations=bv_iters,
                     first_order_calls=bc.total_first_order(),
                     second_order_calls=bc.total_second_order()),
            BenchRow(method="cg-fdhvp", n=n, T=100, J=J, wall_us=cg_wall,
                     iterations=cg_iters,
                     first_order_calls=cc.total_first_order(),
                     second_order_calls=cc.total_second_order()),
        ]

    fit_problem = _bench_problem(fit_n, m, seed=seed)
    fit_rows = [_bvfim_cell(fit_problem, T_total=T) for T in T_grid]
    rows += fit_rows
    r2 = linear_fit_r2([r.iterations for r in fit_rows],
                       [r.wall_us for r in fit_rows])
    ordered = [ratios[n] for n in sorted(dims)]
    summary = {
        "wall_vs_steps_r2": r2,
        "fit_n": fit_n,
        "per_iteration_ratio_bvfim_over_cg": {str(n): ratios[n] for n in dims},
        "ratio_monotone_decreasing": all(
            ordered[i + 1] < ordered[i] for i in range(len(ordered) - 1)),
        "bvfim_second_order_calls": max(
            r.second_order_calls for r in rows if r.method == "bvfim"),
    }
    return rows, summary


def write_bench_csv(rows: List[BenchRow], path) -> None:
    import csv
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "n", "T", "J", "wall_us", "iterations",
                         "first_order_calls", "second_order_calls"])
        for r in rows:
            writer.writerow([r.method, r.n, r.T, r.J, f"{r.wall_us:.3f}",
                             r.iterations, r.first_order_calls,
                             r.second_order_calls])
