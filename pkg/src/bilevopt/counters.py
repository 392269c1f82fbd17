"""Per-run oracle call accounting.

Every solver routine threads an ``OracleCounters`` instance through its
oracle calls so tests (and the complexity benchmark) can assert exact call
ledgers.  Counters are per run, never global, and only ever increase.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .exceptions import DivergedError, MissingOracleError

FIRST_ORDER_FIELDS = ("eval_F", "eval_f", "grad_F_x", "grad_F_y", "grad_f_x", "grad_f_y")
SECOND_ORDER_FIELDS = ("hvp_f_yy", "jvp_f_xy")


@dataclass
class OracleCounters:
    eval_F: int = 0
    eval_f: int = 0
    grad_F_x: int = 0
    grad_F_y: int = 0
    grad_f_x: int = 0
    grad_f_y: int = 0
    hvp_f_yy: int = 0
    jvp_f_xy: int = 0

    def snapshot(self) -> dict:
        return asdict(self)

    def total_first_order(self) -> int:
        return sum(getattr(self, f) for f in FIRST_ORDER_FIELDS)

    def total_second_order(self) -> int:
        return sum(getattr(self, f) for f in SECOND_ORDER_FIELDS)

    def __sub__(self, other: "OracleCounters") -> "OracleCounters":
        return OracleCounters(**{
            f: getattr(self, f) - getattr(other, f)
            for f in FIRST_ORDER_FIELDS + SECOND_ORDER_FIELDS
        })

    def copy(self) -> "OracleCounters":
        return OracleCounters(**self.snapshot())


class CountedOracles:
    """View of a problem whose oracle calls increment a counters record.

    Scalar results are validated to be finite; a NaN/Inf anywhere aborts the
    run loudly rather than propagating garbage.
    """

    def __init__(self, problem, counters: OracleCounters, context: str = ""):
        self.problem = problem
        self.counters = counters
        self.context = context

    def _check(self, value, name):
        if not np.all(np.isfinite(value)):
            raise DivergedError(
                f"non-finite value from oracle {name}"
                + (f" ({self.context})" if self.context else "")
            )
        return value

    def F(self, x, y) -> float:
        self.counters.eval_F += 1
        return float(self._check(self.problem.eval_F(x, y), "eval_F"))

    def f(self, x, y) -> float:
        self.counters.eval_f += 1
        return float(self._check(self.problem.eval_f(x, y), "eval_f"))

    def gFx(self, x, y):
        self.counters.grad_F_x += 1
        return self._check(self.problem.grad_F_x(x, y), "grad_F_x")

    def gFy(self, x, y):
        self.counters.grad_F_y += 1
        return self._check(self.problem.grad_F_y(x, y), "grad_F_y")

    def gfx(self, x, y):
        self.counters.grad_f_x += 1
        return self._check(self.problem.grad_f_x(x, y), "grad_f_x")

    def gfy(self, x, y):
        self.counters.grad_f_y += 1
        return self._check(self.problem.grad_f_y(x, y), "grad_f_y")

    def hvp(self, x, y, v):
        if self.problem.hvp_f_yy is None:
            raise MissingOracleError("problem provides no Hessian-vector oracle (hvp_f_yy)")
        self.counters.hvp_f_yy += 1
        return self._check(self.problem.hvp_f_yy(x, y, v), "hvp_f_yy")

    def jvp(self, x, y, v):
        if self.problem.jvp_f_xy is None:
            raise MissingOracleError("problem provides no Jacobian-vector oracle (jvp_f_xy)")
        self.counters.jvp_f_xy += 1
        return self._check(self.problem.jvp_f_xy(x, y, v), "jvp_f_xy")
