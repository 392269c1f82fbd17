import numpy as np
import pytest

from bilevopt import adaptive_mu2_schedule, fixed_schedule, geometric_schedule


def test_geometric_default_values():
    s = geometric_schedule()
    for k in (0, 1, 100, 2000):
        mu1, mu2, theta, tau = s.values(k)
        expected = 1.0 / 1.01 ** k
        assert mu1 == pytest.approx(expected)
        assert mu2 == pytest.approx(expected)
        assert theta == pytest.approx(expected)
        assert tau == pytest.approx(expected)
        assert min(mu1, mu2, theta, tau) > 0


def test_decay_residual_contract():
    s = geometric_schedule()
    # tau_k * ln(mu_{k,2}) = -k ln(1.01) / 1.01^k
    for k in (2000, 3000, 5000):
        expected = k * np.log(1.01) / 1.01 ** k
        assert s.decay_residual(k) == pytest.approx(expected, rel=1e-12)
        assert s.decay_residual(k) <= 1e-3
    # decreasing beyond the crest at k = 1/ln(1.01)
    residuals = [s.decay_residual(k) for k in range(2000, 2100)]
    assert all(b < a for a, b in zip(residuals, residuals[1:]))


def test_fixed_schedule():
    s = fixed_schedule(1e-6, 1e-6, 1e-6, 1e-6)
    assert s.values(0) == s.values(12345)
    with pytest.raises(ValueError):
        fixed_schedule(0.0, 1.0, 1.0, 1.0)


def test_adaptive_mode_flags():
    s = adaptive_mu2_schedule(mu2_offset=1.0)
    mu1, mu2, theta, tau = s.values(3)
    assert mu2 is None          # solver substitutes f(x, y) + offset
    assert s.mu2_from_f
    assert np.isnan(s.decay_residual(10))


def test_bad_parameters():
    with pytest.raises(ValueError):
        geometric_schedule(base=-1.0)
    with pytest.raises(ValueError):
        geometric_schedule(rate=1.0)
