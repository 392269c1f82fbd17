"""Sectioned key-value run configuration documents.

Experiments carry ~15 tunables, so runs are described by small archivable
text files rather than flag soup:

    schema_version = 1

    [problem]
    id = toy(a=0)

    [solver]
    id = bvfim
    T_z = 50

    [schedule]
    mode = geometric

    [run]
    seed = 0
    K = 500
    x0 = 0
    y0 = 0

Parsing is strict: unknown keys, duplicated keys (both locations are
reported), missing required keys and type mismatches are all errors with
line/column positions.  Absent optional keys fall back to the library
defaults.  Solver/problem capability is validated at parse time: the
unrolled and implicit baselines refuse problems without second-order
oracles unless ``fd_second_order = true`` is set under ``[problem]``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..exceptions import ConfigError
from ..problems import make_problem, problem_has_second_order
from ..schedules import (Schedule, adaptive_mu2_schedule, fixed_schedule,
                         geometric_schedule)

SCHEMA_VERSION = 1

SOLVER_IDS = ("bvfim", "rhg", "trhg", "cg", "neumann")


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _vector(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.replace(",", " ").split()])


# section -> key -> (type converter, type name, required)
SCHEMA: Dict[str, Dict[str, Tuple]] = {
    "": {
        "schema_version": (int, "int", False),
    },
    "problem": {
        "id": (str, "string", True),
        "fd_second_order": (_bool, "bool", False),
    },
    "solver": {
        "id": (str, "string", True),
        # interior-point keys
        "T_z": (int, "int", False),
        "T_y": (int, "int", False),
        "s1": (float, "float", False),
        "s2": (float, "float", False),
        "warm_start_y": (_bool, "bool", False),
        "barrier_floor": (float, "float", False),
        "backtrack_max": (int, "int", False),
        # baseline keys
        "T": (int, "int", False),
        "J": (int, "int", False),
        "s": (float, "float", False),
        "truncate_at": (int, "int", False),
        "damping": (float, "float", False),
        # shared outer-loop keys
        "alpha": (float, "float", False),
        "outer_optimizer": (str, "string", False),
    },
    "schedule": {
        "mode": (str, "string", False),
        "base": (float, "float", False),
        "rate": (float, "float", False),
        "mu2_base": (float, "float", False),
        "mu2_offset": (float, "float", False),
        "mu1": (float, "float", False),
        "mu2": (float, "float", False),
        "theta": (float, "float", False),
        "tau": (float, "float", False),
    },
    "run": {
        "seed": (int, "int", False),
        "K": (int, "int", False),
        "L": (int, "int", False),
        "x0": (_vector, "vector", False),
        "y0": (_vector, "vector", False),
        "record_every": (int, "int", False),
        "output_dir": (str, "string", False),
    },
}

_BVFIM_KEYS = {"T_z", "T_y", "s1", "s2", "warm_start_y", "barrier_floor",
               "backtrack_max", "alpha", "outer_optimizer", "id"}
_UNROLL_KEYS = {"T", "s", "truncate_at", "alpha", "outer_optimizer", "id"}
_IMPLICIT_KEYS = {"T", "J", "s", "damping", "alpha", "outer_optimizer", "id"}


@dataclass
class RunSpec:
    problem_id: str
    solver_id: str
    schedule: Schedule
    solver_params: dict
    fd_second_order: bool = False
    seed: int = 0
    K: int = 500
    L: int = 1
    x0: Optional[np.ndarray] = None
    y0: Optional[np.ndarray] = None
    record_every: int = 1
    output_dir: Optional[str] = None
    schema_version: int = SCHEMA_VERSION
    text: str = ""

    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()

    def make_problem(self):
        return make_problem(self.problem_id,
                            fd_second_order=self.fd_second_order)


def _parse_lines(text: str):
    """Raw pass: ((section, key) -> (value, line, col)) preserving order."""
    entries = {}
    locations = {}
    section = ""
    seen_sections = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError(
                    f"unterminated section header at line {lineno}",
                    location=f"{lineno}:{line.index('[') + 1}")
            section = stripped[1:-1].strip()
            if section not in SCHEMA or section == "":
                known = ", ".join(s for s in SCHEMA if s)
                raise ConfigError(
                    f"unknown section [{section}] at line {lineno} "
                    f"(known: {known})", location=f"{lineno}:1")
            if section in seen_sections:
                raise ConfigError(
                    f"section [{section}] repeated at line {lineno}",
                    location=f"{lineno}:1")
            seen_sections.add(section)
            continue
        if "=" not in stripped:
            raise ConfigError(
                f"expected key = value at line {lineno}: {stripped!r}",
                location=f"{lineno}:1")
        key, value = (s.strip() for s in stripped.split("=", 1))
        col = line.index("=") + 1
        if not key:
            raise ConfigError(f"empty key at line {lineno}",
                              location=f"{lineno}:{col}")
        if (section, key) in entries:
            first = locations[(section, key)]
            raise ConfigError(
                f"duplicate key {key!r} in section [{section or 'top level'}] "
                f"at line {lineno} (first defined at line {first})",
                location=f"{lineno}:1")
        entries[(section, key)] = value
        locations[(section, key)] = lineno
    return entries, locations


def parse_runspec(text: str) -> RunSpec:
    """Parse and fully validate a run configuration document."""
    entries, locations = _parse_lines(text)

    typed: Dict[str, dict] = {sec: {} for sec in SCHEMA}
    for (section, key), value in entries.items():
        schema = SCHEMA[section]
        if key not in schema:
            known = ", ".join(sorted(schema))
            raise ConfigError(
                f"unknown key {key!r} in section [{section or 'top level'}] "
                f"at line {locations[(section, key)]} (known: {known})",
                location=f"{locations[(section, key)]}:1")
        conv, type_name, _ = schema[key]
        try:
            typed[section][key] = conv(value)
        except ValueError as exc:
            raise ConfigError(
                f"value for {section}.{key} at line "
                f"{locations[(section, key)]} is not a {type_name}: {value!r}",
                location=f"{locations[(section, key)]}:1") from exc

    for section, schema in SCHEMA.items():
        for key, (_, _, required) in schema.items():
            if required and key not in typed[section]:
                raise ConfigError(f"missing required key {key!r} "
                                  f"in section [{section}]")

    version = typed[""].get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version} "
                          f"(this library reads {SCHEMA_VERSION})")

    problem_id = typed["problem"]["id"]
    fd_so = typed["problem"].get("fd_second_order", False)
    make_problem(problem_id, fd_second_order=False)  # validates id + params

    solver = typed["solver"]
    solver_id = solver["id"]
    if solver_id not in SOLVER_IDS:
        raise ConfigError(f"unknown solver {solver_id!r} "
                          f"(known: {', '.join(SOLVER_IDS)})")
    allowed = {"bvfim": _BVFIM_KEYS, "rhg": _UNROLL_KEYS, "trhg": _UNROLL_KEYS,
               "cg": _IMPLICIT_KEYS, "neumann": _IMPLICIT_KEYS}[solver_id]
    for key in solver:
        if key not in allowed:
            raise ConfigError(
                f"key {key!r} does not apply to solver {solver_id!r} "
                f"(allowed: {', '.join(sorted(allowed - {'id'}))})")
    if solver_id != "bvfim" and not fd_so \
            and not problem_has_second_order(problem_id):
        raise ConfigError(
            f"solver {solver_id!r} needs second-order oracles but problem "
            f"{problem_id!r} has none; set fd_second_order = true under "
            f"[problem] to approximate them")

    schedule = _build_schedule(typed["schedule"])
    run_sec = typed["run"]

    return RunSpec(
        problem_id=problem_id,
        solver_id=solver_id,
        schedule=schedule,
        solver_params={k: v for k, v in solver.items() if k != "id"},
        fd_second_order=fd_so,
        seed=run_sec.get("seed", 0),
        K=run_sec.get("K", 500),
        L=run_sec.get("L", 1),
        x0=run_sec.get("x0"),
        y0=run_sec.get("y0"),
        record_every=run_sec.get("record_every", 1),
        output_dir=run_sec.get("output_dir"),
        schema_version=version,
        text=text,
    )


def _build_schedule(sched: dict) -> Schedule:
    mode = sched.get("mode", "geometric")
    fixed_keys = {"mu1", "mu2", "theta", "tau"}
    geo_keys = {"base", "rate", "mu2_base"}
    adaptive_keys = {"base", "rate", "mu2_offset"}
    present = set(sched) - {"mode"}
    if mode == "geometric":
        extra = present - geo_keys
        if extra:
            raise ConfigError(f"schedule keys {sorted(extra)} do not apply "
                              f"to geometric mode")
        return geometric_schedule(base=sched.get("base", 1.0),
                                  rate=sched.get("rate", 1.01),
                                  mu2_base=sched.get("mu2_base"))
    if mode == "fixed":
        extra = present - fixed_keys
        if extra:
            raise ConfigError(f"schedule keys {sorted(extra)} do not apply "
                              f"to fixed mode")
        missing = fixed_keys - present
        if missing:
            raise ConfigError(f"fixed schedule requires keys {sorted(missing)}")
        return fixed_schedule(sched["mu1"], sched["mu2"],
                              sched["theta"], sched["tau"])
    if mode == "adaptive-mu2":
        extra = present - adaptive_keys
        if extra:
            raise ConfigError(f"schedule keys {sorted(extra)} do not apply "
                              f"to adaptive-mu2 mode")
        return adaptive_mu2_schedule(base=sched.get("base", 1.0),
                                     rate=sched.get("rate", 1.01),
                                     mu2_offset=sched.get("mu2_offset", 1.0))
    raise ConfigError(f"unknown schedule mode {mode!r}")


def execute(spec: RunSpec):
    """Run the configured solver; returns ((x, y), trace)."""
    # local import: solvers depend on traceio for trace records
    from ..solvers import (ImplicitConfig, SolverConfig, UnrollConfig,
                           run, run_baseline)

    problem = spec.make_problem()
    if spec.solver_id == "bvfim":
        config = SolverConfig(K=spec.K, L=spec.L,
                              record_every=spec.record_every,
                              **spec.solver_params)
        return run(problem, spec.schedule, config, seed=spec.seed,
                   x0=spec.x0, y0=spec.y0)
    params = dict(spec.solver_params)
    alpha = params.pop("alpha", 0.01)
    outer = params.pop("outer_optimizer", "adam")
    if spec.solver_id in ("rhg", "trhg"):
        if spec.solver_id == "trhg" and "truncate_at" not in params:
            params["truncate_at"] = max(params.get("T", 100) // 2, 1)
        cfg = UnrollConfig(**params)
    else:
        cfg = ImplicitConfig(method=spec.solver_id, **params)
    return run_baseline(problem, spec.solver_id, cfg, K=spec.K, alpha=alpha,
                        seed=spec.seed, x0=spec.x0, y0=spec.y0,
                        outer_optimizer=outer,
                        record_every=spec.record_every)


def schema_documentation() -> str:
    """Human-readable key table, embedded in the CLI help text."""
    lines = ["configuration keys (sectioned key = value document):"]
    for section, schema in SCHEMA.items():
        header = f"[{section}]" if section else "(top level)"
        lines.append(f"  {header}")
        for key, (_, type_name, required) in schema.items():
            req = "required" if required else "optional"
            lines.append(f"    {key:<16} {type_name:<7} {req}")
    lines.append("  solver key applicability: bvfim uses "
                 + ", ".join(sorted(_BVFIM_KEYS - {'id'}))
                 + "; rhg/trhg use " + ", ".join(sorted(_UNROLL_KEYS - {'id'}))
                 + "; cg/neumann use " + ", ".join(sorted(_IMPLICIT_KEYS - {'id'})))
    return "\n".join(lines)
