"""Command-line front end.

Verbs:
    run <scenario> -o <dir>     integrate and write log + plot CSVs + summary
    check-rigidity <scenario>   rank test of the desired formation
    sweep <glob...> -o <dir>    run many scenarios in parallel
    echo <scenario>             normalize and print a scenario file

Exit codes: 0 success, 1 parse/validation error, 2 runtime geometry fault.
"""

import argparse
import concurrent.futures
import glob
import os
import sys
import time

from . import analysis, output, scenario_io
from ._backend import DEFAULT_BACKEND, HAVE_COMPILED
from .elevation import rigidity_matrix
from .engine import run as run_scenario
from .errors import ElevformError, GeometryFault, ParseError, ValidationError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_GEOMETRY = 2


def _fail(exc):
    print(f"error: {exc}", file=sys.stderr)
    if isinstance(exc, GeometryFault):
        return EXIT_GEOMETRY
    return EXIT_INVALID


def _run_one(path, outdir, backend=None):
    scenario = scenario_io.load_scenario(path)
    report = analysis.rigidity_report(scenario)
    t0 = time.perf_counter()
    log = run_scenario(scenario, backend=backend)
    elapsed = time.perf_counter() - t0
    os.makedirs(outdir, exist_ok=True)
    log_path = os.path.join(outdir, f"{scenario.name}_log.csv")
    output.emit_csv(log, log_path)
    output.emit_plot_data(log, outdir, stem=scenario.name)
    R_star = rigidity_matrix(report.desired_configuration, scenario.graph, scenario.params)
    consts = analysis.ftiss_constants(R_star, scenario.graph, scenario.gains, scenario.params.rho)
    summary = output.emit_summary(log, consts=consts, report=report)
    summary += f"\nwall time          : {elapsed:.3f} s ({DEFAULT_BACKEND if backend is None else backend} backend)"
    summary += f"\nlog                : {log_path}"
    return summary


def cmd_run(args):
    try:
        summary = _run_one(args.scenario, args.output, backend=args.backend)
    except ElevformError as exc:
        return _fail(exc)
    print(summary)
    return EXIT_OK


def cmd_check_rigidity(args):
    try:
        scenario = scenario_io.load_scenario(args.scenario, check_rigidity=False)
        report = analysis.rigidity_report(scenario)
    except ElevformError as exc:
        return _fail(exc)
    verdict = "rigid" if report.rigid else "NOT rigid"
    print(f"{scenario.name}: rank {report.rank}/{report.required_rank} -> {verdict}")
    print(f"lambda+ (desired configuration) = {report.lambda_plus:.9g}")
    sv = ", ".join(f"{s:.6g}" for s in report.singular_values)
    print(f"singular values: {sv}")
    return EXIT_OK if report.rigid else EXIT_INVALID


def cmd_echo(args):
    try:
        scenario = scenario_io.load_scenario(args.scenario)
    except ElevformError as exc:
        return _fail(exc)
    sys.stdout.write(scenario_io.dumps_scenario(scenario))
    return EXIT_OK


def cmd_sweep(args):
    paths = sorted(p for pattern in args.scenarios for p in glob.glob(pattern))
    if not paths:
        print("error: no scenario files matched", file=sys.stderr)
        return EXIT_INVALID
    workers = args.jobs or min(len(paths), os.cpu_count() or 1)
    status = EXIT_OK
    if workers == 1:
        results = []
        for p in paths:
            try:
                results.append((p, _run_one(p, args.output, backend=args.backend), None))
            except ElevformError as exc:
                results.append((p, None, exc))
    else:
        results = []
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_run_one, p, args.output, args.backend): p for p in paths}
            for fut in concurrent.futures.as_completed(futures):
                p = futures[fut]
                try:
                    results.append((p, fut.result(), None))
                except ElevformError as exc:
                    results.append((p, None, exc))
        results.sort(key=lambda r: paths.index(r[0]))
    for p, summary, exc in results:
        print(f"=== {p}")
        if exc is None:
            print(summary)
        else:
            code = _fail(exc)
            status = max(status, code)
    return status


def build_parser():
    parser = argparse.ArgumentParser(
        prog="elevform",
        description="Bearing-only elevation-angle formation control simulator",
    )
    parser.add_argument(
        "--backend", choices=["compiled", "python"], default=None,
        help=f"integration backend (default: {DEFAULT_BACKEND}; compiled available: {HAVE_COMPILED})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a scenario and write CSV outputs")
    p_run.add_argument("scenario")
    p_run.add_argument("-o", "--output", required=True, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_chk = sub.add_parser("check-rigidity", help="rank test of the desired formation")
    p_chk.add_argument("scenario")
    p_chk.set_defaults(func=cmd_check_rigidity)

    p_sweep = sub.add_parser("sweep", help="run every scenario matching the globs")
    p_sweep.add_argument("scenarios", nargs="+", help="scenario file globs")
    p_sweep.add_argument("-o", "--output", required=True, help="output directory")
    p_sweep.add_argument("-j", "--jobs", type=int, default=None, help="parallel workers")
    p_sweep.set_defaults(func=cmd_sweep)

    p_echo = sub.add_parser("echo", help="normalize and print a scenario file")
    p_echo.add_argument("scenario")
    p_echo.set_defaults(func=cmd_echo)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ElevformError as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
