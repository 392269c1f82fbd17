"""Problem selection by string id, e.g. ``toy(a=0)`` or ``hyperclean(seed=3)``.

Used by the run-configuration parser.  The capability table records which
builtin problems ship analytic second-order oracles, so solver/problem
compatibility can be validated at parse time.
"""

from __future__ import annotations

import re

from ..exceptions import ConfigError
from .base import Problem, with_fd_second_order
from .hyperclean import make_hyperclean
from .quadratic import make_random_quadratic
from .toy import make_toy

_ID_RE = re.compile(r"^\s*([a-zA-Z_][\w-]*)\s*(?:\((.*)\))?\s*$")

# problem name -> (factory, {param: converter}, has analytic second order)
_REGISTRY = {
    "toy": (make_toy, {"a": float}, True),
    "quadratic": (make_random_quadratic, {"n": int, "m": int, "seed": int}, True),
    "hyperclean": (
        make_hyperclean,
        {"d": int, "classes": int, "n_tr": int, "n_val": int, "n_test": int,
         "arch": str, "hidden": int, "seed": int},
        False,
    ),
}


def problem_has_second_order(problem_id: str) -> bool:
    name, _ = _parse_id(problem_id)
    return _REGISTRY[name][2]


def _parse_id(problem_id: str):
    m = _ID_RE.match(problem_id)
    if not m:
        raise ConfigError(f"malformed problem id {problem_id!r}")
    name, arglist = m.group(1), m.group(2)
    if name not in _REGISTRY:
        known = ", ".join(sorted(_REGISTRY))
        raise ConfigError(f"unknown problem {name!r} (known: {known})")
    kwargs = {}
    if arglist and arglist.strip():
        for item in arglist.split(","):
            if "=" not in item:
                raise ConfigError(f"problem argument {item.strip()!r} is not key=value")
            key, val = (s.strip() for s in item.split("=", 1))
            kwargs[key] = val
    return name, kwargs


def make_problem(problem_id: str, fd_second_order: bool = False) -> Problem:
    """Instantiate a builtin problem from its string id.

    ``fd_second_order=True`` wraps a problem lacking analytic Hessian/Jacobian
    products with central-difference substitutes.
    """
    name, raw_kwargs = _parse_id(problem_id)
    factory, converters, has_so = _REGISTRY[name]
    kwargs = {}
    for key, val in raw_kwargs.items():
        if key not in converters:
            raise ConfigError(f"problem {name!r} takes no parameter {key!r}")
        try:
            kwargs[key] = converters[key](val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {name}.{key}: {val!r}") from exc
    problem = factory(**kwargs)
    if fd_second_order and not has_so:
        problem = with_fd_second_order(problem)
    return problem
