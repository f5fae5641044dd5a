#!/usr/bin/env python3
"""Benchmark the compiled kernel against the numpy reference.

Times the raw closed-loop integration (no logging/analysis) and the full
``run`` pipeline for the bundled scenarios on both backends.

Usage:
    python bench/benchmark.py [--t-end SECONDS] [--repeat N]
"""

import argparse
import time
from dataclasses import replace
from importlib import resources

import elevform as ef
from elevform._backend import HAVE_COMPILED, resolve_backend
from elevform.engine import _backend_args


def scenario_path(name):
    return str(resources.files("elevform") / "scenarios" / f"{name}.cfg")


def time_call(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_scenario(name, t_end, repeat):
    scenario = replace(ef.load_scenario(scenario_path(name)), t_end=t_end)
    nsteps = int(round(scenario.t_end / scenario.dt))
    state = scenario.initial_state()
    args = _backend_args(scenario, state, nsteps, scenario.sample_stride)

    backends = ["python"] + (["compiled"] if HAVE_COMPILED else [])
    print(f"\n{name}: n={scenario.graph.n}, m={scenario.graph.m}, "
          f"{scenario.integrator} dt={scenario.dt:g}, {nsteps} steps "
          f"({4 * nsteps} derivative evaluations)")
    print(f"  {'backend':<10} {'integrate':>12} {'steps/s':>12} {'full run()':>12}")
    base_integrate = None
    for backend in backends:
        integrate = resolve_backend(backend)
        t_int = time_call(lambda: integrate(*args), repeat)
        t_run = time_call(lambda: ef.run(scenario, backend=backend), repeat)
        note = ""
        if backend == "python":
            base_integrate = t_int
        elif base_integrate is not None:
            note = f"  ({base_integrate / t_int:.1f}x faster kernel)"
        print(f"  {backend:<10} {t_int:>10.3f} s {nsteps / t_int:>12.0f} {t_run:>10.3f} s{note}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--t-end", type=float, default=30.0, help="horizon per run (s)")
    parser.add_argument("--repeat", type=int, default=3, help="repetitions, best-of")
    args = parser.parse_args()

    print(f"compiled kernel available: {HAVE_COMPILED}")
    for name in ("tetrahedron", "hexagon"):
        bench_scenario(name, args.t_end, args.repeat)


if __name__ == "__main__":
    main()
