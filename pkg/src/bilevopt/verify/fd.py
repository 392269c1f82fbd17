"""Central finite differences, the reference oracle for every gradient."""

from __future__ import annotations

import numpy as np


def fd_gradient(scalar_fn, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient with per-coordinate step h * max(1, |x_i|)."""
    if h <= 0:
        raise ValueError("step h must be positive")
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (scalar_fn(xp) - scalar_fn(xm)) / (2.0 * step)
    return g


def relative_error(approx, exact, floor: float = 1e-12) -> float:
    """||approx - exact|| / max(||exact||, floor)."""
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    return float(np.linalg.norm(approx - exact)
                 / max(np.linalg.norm(exact), floor))
