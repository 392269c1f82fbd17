import numpy as np
import pytest

from bilevopt import OracleCounters, make_toy
from bilevopt.counters import CountedOracles
from bilevopt.exceptions import DivergedError, MissingOracleError
from bilevopt.solvers import AdamMoments, adam_step, project_box


class TestAdam:
    def test_zero_gradient_no_motion(self):
        moments = AdamMoments.zeros(3)
        for t in range(1, 10):
            delta, moments = adam_step(moments, np.zeros(3), 0.1, t=t)
            assert np.all(delta == 0.0)

    def test_first_step_is_signlike(self):
        for c in (1e3, -42.0, 1e-3):
            delta, _ = adam_step(AdamMoments.zeros(1), np.array([c]), 0.05, t=1)
            assert delta[0] == pytest.approx(-0.05 * np.sign(c), rel=1e-4)

    def test_constant_gradient_step_tends_to_alpha(self):
        g = np.array([3.7, -0.2])
        moments = AdamMoments.zeros(2)
        for t in range(1, 101):
            delta, moments = adam_step(moments, g, 0.01, t=t)
        assert np.abs(delta) == pytest.approx([0.01, 0.01], rel=1e-2)

    def test_requires_positive_t(self):
        with pytest.raises(ValueError):
            adam_step(AdamMoments.zeros(1), np.ones(1), 0.1, t=0)


def test_project_box():
    box = (np.array([0.0]), np.array([1.0]))
    assert project_box(np.array([-0.5]), box)[0] == 0.0
    assert project_box(np.array([1.5]), box)[0] == 1.0
    assert project_box(np.array([0.25]), box)[0] == 0.25
    v = np.array([-3.0, 7.0])
    assert np.array_equal(project_box(v, None), v)


class TestCounters:
    def test_counts_and_snapshot(self):
        p = make_toy(0.0)
        counters = OracleCounters()
        oracles = CountedOracles(p, counters)
        x, y = np.array([0.1]), np.array([0.2])
        oracles.F(x, y)
        oracles.f(x, y)
        oracles.f(x, y)
        oracles.gfy(x, y)
        assert counters.eval_F == 1
        assert counters.eval_f == 2
        assert counters.grad_f_y == 1
        assert counters.total_first_order() == 4
        assert counters.total_second_order() == 0

    def test_difference(self):
        a = OracleCounters(eval_F=5, grad_f_y=10)
        b = OracleCounters(eval_F=2, grad_f_y=4)
        d = a - b
        assert d.eval_F == 3 and d.grad_f_y == 6

    def test_missing_second_order_raises(self):
        p = make_toy(0.0).without_second_order()
        oracles = CountedOracles(p, OracleCounters())
        with pytest.raises(MissingOracleError):
            oracles.hvp(np.zeros(1), np.zeros(1), np.ones(1))
        with pytest.raises(MissingOracleError):
            oracles.jvp(np.zeros(1), np.zeros(1), np.ones(1))

    def test_nonfinite_detection(self):
        p = make_toy(0.0)
        oracles = CountedOracles(p, OracleCounters())
        with np.errstate(invalid="ignore"), pytest.raises(DivergedError):
            oracles.f(np.array([np.inf]), np.array([0.0]))
