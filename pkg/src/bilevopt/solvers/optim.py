"""Dense-vector outer-step helpers: bias-corrected Adam and box projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class AdamMoments:
    m: np.ndarray
    v: np.ndarray

    @staticmethod
    def zeros(dim: int) -> "AdamMoments":
        return AdamMoments(m=np.zeros(dim), v=np.zeros(dim))


def adam_step(moments: AdamMoments, g: np.ndarray, alpha: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
              t: int = 1):
    """One bias-corrected Adam update for step index t >= 1.

    Returns (delta, moments') where the caller applies ``x + delta``.  The
    moments are not mutated.
    """
    if t < 1:
        raise ValueError("Adam step index t must be >= 1")
    m = beta1 * moments.m + (1.0 - beta1) * g
    v = beta2 * moments.v + (1.0 - beta2) * (g * g)
    mhat = m / (1.0 - beta1 ** t)
    vhat = v / (1.0 - beta2 ** t)
    delta = -alpha * mhat / (np.sqrt(vhat) + eps)
    return delta, AdamMoments(m=m, v=v)


def project_box(x: np.ndarray, box) -> np.ndarray:
    """Componentwise clamp onto [lo, hi]; identity when box is None."""
    if box is None:
        return x
    lo, hi = box
    return np.clip(x, lo, hi)
