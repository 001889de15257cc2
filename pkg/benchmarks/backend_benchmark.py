#!/usr/bin/env python3
"""Timing comparison of the compiled round loop against the numpy fallback.

Runs the belief-sharing algorithm (and the decision-sharing baseline on the
separable family) on the same instance with both backends, reports rounds/sec
and the worst trace disagreement between them.

Usage:
    python benchmarks/backend_benchmark.py --T 8192 --agents 8 --d-i 2
"""

import argparse
import time

import numpy as np

import docosim as ds
from docosim._backend import HAS_COMPILED


def time_run(fn, repeat):
    best = np.inf
    trace = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        trace = fn()
        best = min(best, time.perf_counter() - t0)
    return best, trace


def max_diff(a, b):
    return max(
        float(np.max(np.abs(a.cost_action - b.cost_action))),
        float(np.max(np.abs(a.g_action - b.g_action))),
        float(np.max(np.abs(a.actions - b.actions))),
        float(np.max(np.abs(a.delta_x - b.delta_x))),
        float(np.max(np.abs(a.lambda_bar - b.lambda_bar))),
    )


def bench(label, make_trace, T, repeat):
    if not HAS_COMPILED:
        print(f"{label}: compiled extension not available; skipping comparison")
        return
    t_compiled, trace_c = time_run(lambda: make_trace("compiled"), repeat)
    t_python, trace_p = time_run(lambda: make_trace("python"), repeat)
    print(f"{label}:")
    print(f"  compiled : {t_compiled * 1e3:9.2f} ms  ({T / t_compiled:12.0f} rounds/s)")
    print(f"  python   : {t_python * 1e3:9.2f} ms  ({T / t_python:12.0f} rounds/s)")
    print(f"  speedup  : {t_python / t_compiled:9.1f}x")
    print(f"  max trace difference: {max_diff(trace_c, trace_p):.3e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=int, default=8192)
    ap.add_argument("--agents", type=int, default=8)
    ap.add_argument("--d-i", type=int, default=2)
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--seed", type=int, default=6)
    ap.add_argument("--c", type=float, default=0.5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    graph = ds.build_graph("ring", args.agents)
    mixing = ds.build_mixing(graph)
    params = ds.AlgoParams.for_horizon(args.T, args.c, 5.0)

    coupled = ds.make_coupled_quadratic(args.agents, args.d_i, args.m, args.T,
                                        seed=args.seed)
    bench("dopbc / coupled-quadratic",
          lambda backend: ds.run(coupled, mixing, params, backend=backend),
          args.T, args.repeat)

    separable = ds.make_separable_quadratic(args.agents, args.d_i, args.T,
                                            seed=args.seed)
    bench("dopbc / separable-quadratic",
          lambda backend: ds.run(separable, mixing, params, backend=backend),
          args.T, args.repeat)
    bench("baseline-dspd / separable-quadratic",
          lambda backend: ds.run_baseline(separable, mixing, graph, params,
                                          backend=backend),
          args.T, args.repeat)


if __name__ == "__main__":
    main()
