"""Interior-point solver: inner solves, hypergradient, outer loop."""

import numpy as np
import pytest

from bilevopt import (BVFIM, OracleCounters, Problem, SolverConfig,
                      geometric_schedule, fixed_schedule, make_quadratic,
                      make_toy, run)
from bilevopt.exceptions import (BacktrackingExhaustedError,
                                 BarrierDomainError, InfeasibleStartError)
from bilevopt.solvers import hyper_gradient, outer_stage, solve_y, solve_z
from bilevopt.solvers.bvfim import StageState
from bilevopt.solvers.optim import AdamMoments


def bisect(fn, lo, hi, tol=1e-14):
    """Sign-change bisection; the independent root oracle for 1-D tests."""
    flo = fn(lo)
    assert flo * fn(hi) < 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fn(lo) * fm <= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def scalar_problem(F, f, gFx, gFy, gfx, gfy):
    wrap = lambda fn: (lambda x, y: np.array([fn(x[0], y[0])]))
    return Problem(
        dim_x=1, dim_y=1,
        eval_F=lambda x, y: float(F(x[0], y[0])),
        eval_f=lambda x, y: float(f(x[0], y[0])),
        grad_F_x=wrap(gFx), grad_F_y=wrap(gFy),
        grad_f_x=wrap(gfx), grad_f_y=wrap(gfy),
        name="scalar")


class TestSolveZ:
    def test_quadratic_fixed_point(self):
        # update fixed point solves z = x / (1 + mu1) for A = I
        p = make_quadratic(np.eye(2), np.zeros(2))
        counters = OracleCounters()
        z, f_reg = solve_z(p, np.array([1.0, 0.0]), mu1=0.1, mu2=0.0,
                           y0=np.zeros(2), T_z=500, s1=0.1, counters=counters)
        assert z == pytest.approx([1.0 / 1.1, 0.0], abs=1e-6)

    def test_pure_shrinkage_with_zero_lower_objective(self):
        p = scalar_problem(F=lambda x, y: 0.0, f=lambda x, y: 0.0,
                           gFx=lambda x, y: 0.0, gFy=lambda x, y: 0.0,
                           gfx=lambda x, y: 0.0, gfy=lambda x, y: 0.0)
        counters = OracleCounters()
        z, _ = solve_z(p, np.zeros(1), mu1=0.5, mu2=0.0, y0=np.array([2.0]),
                       T_z=7, s1=0.1, counters=counters)
        assert z[0] == pytest.approx(2.0 * (1 - 0.1 * 0.5) ** 7)

    def test_toy_converges_to_regularized_stationary_point(self):
        # stationary point of sin(z) + z^2/2: cos(z) + z = 0, unique root
        root = bisect(lambda z: np.cos(z) + z, -1.0, 0.0)
        p = make_toy(0.0)
        counters = OracleCounters()
        z, f_reg = solve_z(p, np.zeros(1), mu1=1.0, mu2=0.0, y0=np.zeros(1),
                           T_z=5000, s1=0.01, counters=counters)
        assert z[0] == pytest.approx(root, abs=1e-6)
        assert f_reg == pytest.approx(np.sin(root) + 0.5 * root ** 2)

    def test_exact_oracle_ledger(self):
        p = make_toy(0.0)
        counters = OracleCounters()
        solve_z(p, np.zeros(1), mu1=1.0, mu2=0.1, y0=np.zeros(1),
                T_z=37, s1=0.01, counters=counters)
        assert counters.grad_f_y == 37
        assert counters.eval_f == 1
        assert counters.total_second_order() == 0

    def test_rejects_bad_arguments(self):
        p = make_toy(0.0)
        with pytest.raises(ValueError):
            solve_z(p, np.zeros(1), mu1=1.0, mu2=0.0, y0=np.zeros(1),
                    T_z=0, s1=0.01, counters=OracleCounters())
        with pytest.raises(ValueError):
            solve_z(p, np.zeros(1), mu1=0.0, mu2=0.0, y0=np.zeros(1),
                    T_z=1, s1=0.01, counters=OracleCounters())


class TestSolveY:
    def test_zero_barrier_reduces_to_descent_on_F(self):
        p = make_quadratic(np.eye(2), np.array([0.3, -0.7]))
        config = SolverConfig(T_y=400, s2=0.2)
        counters = OracleCounters()
        # f_reg far above any visited f keeps the domain irrelevant
        y, info = solve_y(p, np.zeros(2), f_reg=1e9, theta=0.0, tau=0.0,
                          y0=np.zeros(2), T_y=400, s2=0.2, config=config,
                          counters=counters)
        assert y == pytest.approx([0.3, -0.7], abs=1e-8)

    def test_matches_analytic_barrier_minimizer(self):
        # minimize y^2 - ln(1 - y): 2y + 1/(1 - y) = 0
        root = bisect(lambda y: 2 * y + 1.0 / (1.0 - y), -1.0, 0.0)
        assert root == pytest.approx((1 - np.sqrt(3)) / 2)   # analytic form
        p = scalar_problem(F=lambda x, y: y * y, f=lambda x, y: y,
                           gFx=lambda x, y: 0.0, gFy=lambda x, y: 2 * y,
                           gfx=lambda x, y: 0.0, gfy=lambda x, y: 1.0)
        config = SolverConfig(T_y=2000, s2=0.05)
        y, _ = solve_y(p, np.zeros(1), f_reg=1.0, theta=0.0, tau=1.0,
                       y0=np.zeros(1), T_y=2000, s2=0.05, config=config,
                       counters=OracleCounters())
        assert y[0] == pytest.approx(root, abs=1e-8)

    def test_descent_and_feasibility_on_toy(self):
        p = make_toy(0.0)
        x = np.array([-np.pi / 4])
        counters = OracleCounters()
        z, f_reg = solve_z(p, x, mu1=1.0, mu2=1.0, y0=np.zeros(1),
                           T_z=50, s1=0.01, counters=counters)
        config = SolverConfig()
        y0 = z
        def obj(w):
            u = f_reg - p.eval_f(x, w)
            return p.eval_F(x, w) + 0.5 * w @ w - np.log(u)
        y, info = solve_y(p, x, f_reg, theta=1.0, tau=1.0, y0=y0, T_y=25,
                          s2=0.01, config=config, counters=counters)
        assert f_reg - p.eval_f(x, y) > 0
        assert obj(y) <= obj(y0) + 1e-12

    def test_infeasible_start_raises(self):
        p = make_toy(0.0)
        config = SolverConfig()
        with pytest.raises(InfeasibleStartError):
            solve_y(p, np.zeros(1), f_reg=-2.0, theta=1.0, tau=1.0,
                    y0=np.zeros(1), T_y=5, s2=0.01, config=config,
                    counters=OracleCounters())

    def test_backtracking_exhaustion_raises(self):
        # F pulls straight at the barrier wall; every halving stays infeasible
        p = scalar_problem(F=lambda x, y: -y, f=lambda x, y: y,
                           gFx=lambda x, y: 0.0, gFy=lambda x, y: -1.0,
                           gfx=lambda x, y: 0.0, gfy=lambda x, y: 1.0)
        config = SolverConfig(backtrack_max=30)
        with pytest.raises(BacktrackingExhaustedError):
            solve_y(p, np.zeros(1), f_reg=1e-12, theta=0.0, tau=0.0,
                    y0=np.zeros(1), T_y=1, s2=1.0, config=config,
                    counters=OracleCounters())

    def test_oracle_ledger(self):
        p = make_toy(0.0)
        counters = OracleCounters()
        config = SolverConfig()
        y, info = solve_y(p, np.zeros(1), f_reg=2.0, theta=0.5, tau=0.5,
                          y0=np.zeros(1), T_y=13, s2=0.01, config=config,
                          counters=counters)
        assert counters.grad_F_y == 13
        assert counters.grad_f_y == 13
        assert counters.eval_f == 1 + info["trials"]
        assert counters.eval_F == 1 + info["feasible_trials"]

    def test_cached_start_value_skips_one_eval(self):
        p = make_toy(0.0)
        counters = OracleCounters()
        config = SolverConfig()
        f0 = p.eval_f(np.zeros(1), np.zeros(1))
        _, info = solve_y(p, np.zeros(1), f_reg=2.0, theta=0.5, tau=0.5,
                          y0=np.zeros(1), T_y=5, s2=0.01, config=config,
                          counters=counters, f_y0=f0)
        assert counters.eval_f == info["trials"]


class TestHyperGradient:
    def test_tau_zero_returns_direct_gradient_only(self):
        p = make_toy(0.0)
        counters = OracleCounters()
        x, y, z = np.array([0.4]), np.array([0.2]), np.array([0.1])
        g = hyper_gradient(p, x, y, z, f_reg=10.0, tau=0.0, counters=counters)
        assert g == pytest.approx(p.grad_F_x(x, y))
        assert counters.grad_F_x == 1
        assert counters.grad_f_x == 0
        assert counters.eval_f == 0

    def test_y_equals_z_cancels_indirect_term(self):
        p = make_toy(0.0)
        counters = OracleCounters()
        x = np.array([0.4])
        y = np.array([0.2])
        g = hyper_gradient(p, x, y, y, f_reg=5.0, tau=0.7, counters=counters)
        assert g == pytest.approx(p.grad_F_x(x, y))
        assert counters.grad_F_x == 1
        assert counters.grad_f_x == 2

    def test_formula_and_ledger(self):
        p = make_toy(0.0)
        counters = OracleCounters()
        x, y, z = np.array([0.3]), np.array([-0.1]), np.array([-0.8])
        f_reg, tau = 1.5, 0.25
        u = f_reg - p.eval_f(x, y)
        expected = p.grad_F_x(x, y) + tau * (p.grad_f_x(x, y)
                                             - p.grad_f_x(x, z)) / u
        g = hyper_gradient(p, x, y, z, f_reg, tau, counters)
        assert g == pytest.approx(expected)
        assert (counters.grad_F_x, counters.grad_f_x) == (1, 2)
        assert counters.total_second_order() == 0

    def test_outside_domain_raises(self):
        p = make_toy(0.0)
        with pytest.raises(BarrierDomainError):
            hyper_gradient(p, np.zeros(1), np.zeros(1), np.zeros(1),
                           f_reg=-1.0, tau=0.5, counters=OracleCounters())


class TestOuterLoop:
    def test_zero_alpha_keeps_x(self):
        p = make_toy(0.0)
        config = SolverConfig(K=3, alpha=0.0, outer_optimizer="gd")
        (x, y), trace = run(p, geometric_schedule(), config, x0=[1.0], y0=[0.5])
        assert x[0] == 1.0
        assert len(trace) == 3

    def test_box_projection_clamps(self):
        base = make_toy(0.0)
        import dataclasses
        boxed = dataclasses.replace(base, box_x=(np.array([0.0]),
                                                 np.array([1.0])))
        config = SolverConfig(K=50, alpha=0.05, outer_optimizer="gd")
        (x, _), _ = run(boxed, geometric_schedule(), config,
                        x0=[0.2], y0=[0.0])
        assert x[0] >= 0.0   # the unconstrained run goes negative

    def test_unconstrained_goes_negative_from_same_start(self):
        config = SolverConfig(K=50, alpha=0.05, outer_optimizer="gd")
        (x, _), _ = run(make_toy(0.0), geometric_schedule(), config,
                        x0=[0.2], y0=[0.0])
        assert x[0] < 0.0

    def test_quadratic_value_trend(self):
        # F(x, y_returned) decreases over stages, few exceptions allowed
        p = make_quadratic(np.array([[1.0, 0.2], [0.1, 0.7]]),
                           np.array([0.4, -0.6]))
        config = SolverConfig(K=100, T_z=50, T_y=50, s1=0.2, s2=0.2,
                              alpha=0.05, outer_optimizer="gd")
        _, trace = run(p, geometric_schedule(), config)
        values = [r.F for r in trace.records]
        increases = sum(1 for a, b in zip(values, values[1:]) if b > a + 1e-12)
        assert increases <= 0.05 * len(values)

    def test_k_zero_returns_initial_point(self):
        p = make_toy(0.0)
        config = SolverConfig(K=0)
        (x, y), trace = run(p, geometric_schedule(), config,
                            x0=[3.0], y0=[4.0])
        assert (x[0], y[0]) == (3.0, 4.0)
        assert len(trace) == 0

    def test_determinism(self):
        from bilevopt.traceio import csv_projection, rows_equal
        p = make_toy(0.0)
        config = SolverConfig(K=40)
        _, t1 = run(p, geometric_schedule(), config, seed=3, x0=[0.0], y0=[0.0])
        _, t2 = run(p, geometric_schedule(), config, seed=3, x0=[0.0], y0=[0.0])
        assert rows_equal(csv_projection(t1), csv_projection(t2))

    def test_barrier_feasibility_invariant(self):
        p = make_toy(0.0)
        config = SolverConfig(K=200)
        _, trace = run(p, geometric_schedule(), config, x0=[0.0], y0=[0.0])
        floors = [r.f_reg - r.f for r in trace.records]
        assert min(floors) >= config.barrier_floor

    def test_first_order_only_invariant(self):
        p = make_toy(0.0)
        config = SolverConfig(K=25)
        _, trace = run(p, geometric_schedule(), config)
        assert trace.counters.hvp_f_yy == 0
        assert trace.counters.jvp_f_xy == 0

    def test_run_oracle_totals(self):
        p = make_toy(0.0)
        K, T_z, T_y = 30, 50, 25
        config = SolverConfig(K=K, T_z=T_z, T_y=T_y)
        _, trace = run(p, geometric_schedule(), config, x0=[0.0], y0=[0.0])
        c = trace.counters
        assert c.grad_f_y == K * (T_z + T_y)
        assert c.grad_F_y == K * T_y
        assert c.grad_F_x == K
        assert c.grad_f_x == 2 * K
        # eval_f = per stage: 1 warm check + 1 in solve_z + trials
        assert c.eval_f >= K * 3
        assert c.eval_f <= K * (2 + T_y * (1 + config.backtrack_max))

    def test_warm_start_y_mode(self):
        p = make_toy(0.0)
        config = SolverConfig(K=10, warm_start_y=True)
        (x, y), trace = run(p, geometric_schedule(), config, x0=[0.0], y0=[0.0])
        assert np.isfinite(x[0]) and np.isfinite(y[0])

    def test_adaptive_mu2_mode_runs(self):
        from bilevopt import adaptive_mu2_schedule
        p = make_toy(0.0)
        config = SolverConfig(K=50)
        (x, y), trace = run(p, adaptive_mu2_schedule(), config,
                            x0=[0.0], y0=[0.0])
        assert np.isfinite(x[0])
        # adaptive mode keeps the barrier strictly feasible by construction
        assert min(r.f_reg - r.f for r in trace.records) > 0

    def test_outer_stage_advances_k(self):
        p = make_toy(0.0)
        state = StageState(k=4, x=np.zeros(1), y=np.zeros(1), z=np.zeros(1),
                           moments=AdamMoments.zeros(1))
        out = outer_stage(p, state, geometric_schedule(), SolverConfig(),
                          OracleCounters())
        assert out.k == 5 and out.t == 1

    def test_partial_trace_on_failure(self):
        p = scalar_problem(F=lambda x, y: -y, f=lambda x, y: y,
                           gFx=lambda x, y: 0.0, gFy=lambda x, y: -1.0,
                           gfx=lambda x, y: 0.0, gfy=lambda x, y: 1.0)
        config = SolverConfig(K=5, s2=1.0, backtrack_max=5)
        schedule = fixed_schedule(1e-9, 1e-12, 1e-9, 1e-9)
        with pytest.raises(BacktrackingExhaustedError) as err:
            run(p, schedule, config, x0=[0.0], y0=[-1.0])
        assert hasattr(err.value, "partial_trace")


class TestEstimator:
    def test_sklearn_protocol(self):
        from sklearn.base import clone
        solver = BVFIM(K=5, T_z=10, T_y=5)
        params = solver.get_params()
        assert params["K"] == 5 and params["T_z"] == 10
        other = clone(solver)
        assert other.get_params() == params
        solver.set_params(K=7)
        assert solver.K == 7

    def test_fit_exposes_solution(self):
        solver = BVFIM(K=20).fit(make_toy(0.0), x0=[0.0], y0=[0.0])
        assert solver.x_.shape == (1,)
        assert len(solver.trace_) == 20
        assert solver.counters_.hvp_f_yy == 0
