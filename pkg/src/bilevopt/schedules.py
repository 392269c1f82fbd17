"""Regularization schedules (mu1, mu2, theta, tau) indexed by outer stage.

The convergence theory requires all four sequences to vanish with
tau_k * ln(mu_{k,2}) -> 0.  The geometric default

    mu_{k,1} = theta_k = tau_k = mu_{k,2} = 1 / 1.01**k

satisfies that contract: |tau_k ln mu_{k,2}| = k ln(1.01) / 1.01**k -> 0.

``adaptive-mu2`` instead sets mu_{k,2} = f(x, y) + offset at the current
iterate, which keeps the barrier feasible by construction but does not
vanish, so it trades the convergence guarantee for robustness.  Both modes
are exposed; the geometric mode is the default.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

MODES = ("fixed", "geometric", "adaptive-mu2")


@dataclass(frozen=True)
class Schedule:
    """Stage-indexed positive sequences driving the barrier approximation.

    ``mu2_from_f`` is set in adaptive-mu2 mode only: the solver then computes
    mu_{k,2} = f(x, y) + mu2_offset from the lower objective at the current
    iterate instead of calling ``mu2(k)``.
    """

    mu1: Callable[[int], float]
    mu2: Callable[[int], float]
    theta: Callable[[int], float]
    tau: Callable[[int], float]
    mode: str = "geometric"
    mu2_offset: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown schedule mode {self.mode!r}")

    @property
    def mu2_from_f(self) -> bool:
        return self.mode == "adaptive-mu2"

    def values(self, k: int):
        """(mu1, mu2, theta, tau) at stage k; mu2 is None in adaptive mode."""
        mu2 = None if self.mu2_from_f else float(self.mu2(k))
        return float(self.mu1(k)), mu2, float(self.theta(k)), float(self.tau(k))

    def decay_residual(self, k: int) -> float:
        """|tau_k * ln(mu_{k,2})|, the decay condition the convergence theory imposes."""
        if self.mu2_from_f:
            return float("nan")
        return abs(float(self.tau(k)) * np.log(float(self.mu2(k))))


def geometric_schedule(base: float = 1.0, rate: float = 1.01,
                       mu2_base: Optional[float] = None) -> Schedule:
    """(mu1, theta, tau) = base / rate**k and mu2 = mu2_base / rate**k."""
    if base <= 0 or rate <= 1.0:
        raise ValueError("need base > 0 and rate > 1")
    m2 = base if mu2_base is None else float(mu2_base)

    def seq(k, scale=base):
        return scale / rate ** k

    return Schedule(mu1=seq, mu2=lambda k: m2 / rate ** k,
                    theta=seq, tau=seq, mode="geometric")


def fixed_schedule(mu1: float, mu2: float, theta: float, tau: float) -> Schedule:
    for name, v in (("mu1", mu1), ("mu2", mu2), ("theta", theta), ("tau", tau)):
        if v <= 0:
            raise ValueError(f"{name} must be positive, got {v}")
    return Schedule(mu1=lambda k: mu1, mu2=lambda k: mu2,
                    theta=lambda k: theta, tau=lambda k: tau, mode="fixed")


def adaptive_mu2_schedule(base: float = 1.0, rate: float = 1.01,
                          mu2_offset: float = 1.0) -> Schedule:
    """Geometric (mu1, theta, tau) with mu_{k,2} = f(x, y) + mu2_offset."""
    if base <= 0 or rate <= 1.0:
        raise ValueError("need base > 0 and rate > 1")

    def seq(k):
        return base / rate ** k

    return Schedule(mu1=seq, mu2=seq, theta=seq, tau=seq,
                    mode="adaptive-mu2", mu2_offset=mu2_offset)
