"""Command line front end.

Subcommands:

* ``run <spec>``       -- execute one configured solver run; writes the
                          trace CSV and a summary JSON
* ``compare <dir>``    -- run every ``*.spec`` in a directory (same problem,
                          different solver/initialization) and merge the
                          curves into one long-format CSV
* ``verify``           -- numeric theory checks; ``--level quick`` or ``full``
* ``bench``            -- hypergradient timing benchmark across dimensions

Outputs land under ``--output-root`` (or ``$BILEVOPT_OUTPUT_ROOT``, default
``./runs``) in a directory named by the configuration hash, so identical
configurations always map to the same path.

Exit codes: 0 success, 2 configuration error, 3 solver divergence,
4 verification failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .exceptions import (BacktrackingExhaustedError, BilevoptError,
                         ConfigError, DivergedError)
from .traceio import (parse_runspec, execute, report_envelope,
                      schema_documentation, write_report_json,
                      write_trace_csv)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4
EXIT_IO = 5


def _output_root(args) -> Path:
    if args.output_root:
        return Path(args.output_root)
    env = os.environ.get("BILEVOPT_OUTPUT_ROOT")
    return Path(env) if env else Path("runs")


def _fmt_init(vec) -> str:
    if vec is None:
        return "default"
    return " ".join(f"{v:g}" for v in np.atleast_1d(vec))


def _summarize(spec, solution, trace) -> dict:
    x, y = solution
    final = trace.final()
    payload = {
        "problem": spec.problem_id,
        "solver": spec.solver_id,
        "seed": spec.seed,
        "K": spec.K,
        "L": spec.L,
        "x": list(map(float, x[:64])),
        "y_norm": float(np.linalg.norm(y)),
        "records": len(trace),
        "counters": trace.counters.snapshot() if trace.counters else {},
    }
    if final is not None:
        payload.update({"final_F": final.F, "final_f": final.f,
                        "final_dist_x": final.dist_x,
                        "final_grad_norm": final.grad_norm,
                        "wall_ms": final.wall_ms})
    return payload


def cmd_run(args) -> int:
    try:
        text = Path(args.spec).read_text()
    except OSError as exc:
        print(f"cannot read spec: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        spec = parse_runspec(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        solution, trace = execute(spec)
    except (DivergedError, BacktrackingExhaustedError) as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except BilevoptError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(spec.output_dir) if spec.output_dir \
        else _output_root(args) / spec.sha256()[:12]
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_trace_csv(trace, out_dir / "trace.csv")
        write_report_json(report_envelope(_summarize(spec, solution, trace),
                                          config_text=text),
                          out_dir / "summary.json")
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(out_dir)
    return EXIT_OK


def _compare_worker(text: str):
    """Run one member spec; returns long-format metric rows."""
    spec = parse_runspec(text)
    solution, trace = execute(spec)
    init = f"{_fmt_init(spec.x0)}|{_fmt_init(spec.y0)}"
    rows = []
    for rec in trace.records:
        for metric, value in (("F", rec.F), ("f", rec.f),
                              ("dist_x", rec.dist_x), ("dist_y", rec.dist_y)):
            rows.append((spec.solver_id, init, rec.step, metric, value))
    return rows


def cmd_compare(args) -> int:
    spec_dir = Path(args.spec_dir)
    paths = sorted(spec_dir.glob("*.spec"))
    if not paths:
        print(f"no *.spec files in {spec_dir}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        texts = [p.read_text() for p in paths]
    except OSError as exc:
        print(f"cannot read specs: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        specs = [parse_runspec(t) for t in texts]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    problems = {s.problem_id for s in specs}
    if len(problems) > 1:
        print(f"compare requires a single problem, got {sorted(problems)}",
              file=sys.stderr)
        return EXIT_CONFIG

    out_dir = _output_root(args) / ("compare-" + specs[0].sha256()[:12])
    out_dir.mkdir(parents=True, exist_ok=True)
    all_rows = []
    try:
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                for rows in pool.map(_compare_worker, texts):
                    all_rows.extend(rows)
        else:
            for text in texts:
                all_rows.extend(_compare_worker(text))
    except (DivergedError, BacktrackingExhaustedError) as exc:
        print(f"member run failed: {exc} (partial outputs in {out_dir})",
              file=sys.stderr)
        return EXIT_SOLVER

    merged = out_dir / "curves.csv"
    try:
        with open(merged, "w") as fh:
            fh.write("solver,init,step,metric,value\n")
            for solver, init, step, metric, value in all_rows:
                fh.write(f"{solver},{init},{step},{metric},{value:.17g}\n")
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(merged)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import full_suite, quick_suite

    results = quick_suite() if args.level == "quick" else full_suite()
    payload = {"level": args.level,
               "checks": [r.as_dict() for r in results],
               "passed": all(r.passed for r in results)}
    out_dir = _output_root(args)
    out_dir.mkdir(parents=True, exist_ok=True)
    out = Path(args.out) if args.out else out_dir / f"verify-{args.level}.json"
    try:
        write_report_json(report_envelope(payload), out)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.check_id}")
    if not payload["passed"]:
        failed = [r.check_id for r in results if not r.passed]
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import run_bench, write_bench_csv

    dims = [int(d) for d in args.dims.split(",")]
    steps = [int(t) for t in args.steps.split(",")]
    rows, summary = run_bench(dims=dims, T_grid=steps)
    out_dir = _output_root(args)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        write_bench_csv(rows, out_dir / "bench.csv")
        write_report_json(report_envelope(summary), out_dir / "bench.json")
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wall-vs-steps R^2 at n={summary['fit_n']}: "
          f"{summary['wall_vs_steps_r2']:.4f}")
    for n, ratio in summary["per_iteration_ratio_bvfim_over_cg"].items():
        print(f"per-iteration time ratio (interior-point / cg-fdhvp) "
              f"n={n}: {ratio:.3f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bilevopt",
        description="bilevel optimization: interior-point solver, baselines, "
                    "verification and benchmarks",
        epilog=schema_documentation(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--output-root", default=None,
                        help="root directory for outputs "
                             "(default $BILEVOPT_OUTPUT_ROOT or ./runs)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single run configuration")
    p_run.add_argument("spec", help="path to the configuration document")
    p_run.set_defaults(fn=cmd_run)

    p_cmp = sub.add_parser("compare",
                           help="run all *.spec files in a directory and "
                                "merge their curves")
    p_cmp.add_argument("spec_dir")
    p_cmp.add_argument("--jobs", type=int, default=1,
                       help="parallel worker processes")
    p_cmp.set_defaults(fn=cmd_compare)

    p_ver = sub.add_parser("verify", help="run the numeric theory checks")
    p_ver.add_argument("--level", choices=["quick", "full"], default="quick")
    p_ver.add_argument("--out", default=None, help="report JSON path")
    p_ver.set_defaults(fn=cmd_verify)

    p_bench = sub.add_parser("bench", help="hypergradient timing benchmark")
    p_bench.add_argument("--dims", default="100,1000,10000",
                         help="comma-separated lower-level dimensions")
    p_bench.add_argument("--steps", default="20,50,100,200,400",
                         help="comma-separated inner step budgets")
    p_bench.add_argument("--jobs", type=int, default=1,
                         help="accepted for symmetry; timing runs serially")
    p_bench.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
