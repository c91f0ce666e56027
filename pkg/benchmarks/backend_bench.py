"""Compare the numba and numpy backends on a matched ensemble workload.

Runs the same replica ensemble (identical seeds, so identical noise streams)
under both backends, reports wall times, and verifies the terminal states are
bitwise identical.

Usage:
    python benchmarks/backend_bench.py [--m 100] [--replicas 200] [--T 2.0]
                                       [--dt 1e-3] [--seed 37] [--scheme named]
"""

import argparse
import os
import sys
import time

import numpy as np


def run_backend(backend: str, args) -> tuple[float, np.ndarray]:
    os.environ["ATLAS_SIM_BACKEND"] = backend
    # re-import so the backend switch takes effect in a fresh module graph
    for name in [n for n in list(sys.modules) if n.startswith("atlas_sim")]:
        del sys.modules[name]
    from atlas_sim import engine, measures
    from atlas_sim.model import make_atlas

    spec = make_atlas(args.m, args.gamma)
    meas = measures.stationary_measure(args.m, args.gamma)
    sampler = lambda rng, s: measures.sample(meas, rng)

    if backend == "numba":  # warm the jit cache outside the timed region
        engine.run_replicas(spec, sampler, 2, 10 * args.dt, args.dt, args.seed,
                            scheme=args.scheme)
    t0 = time.perf_counter()
    res = engine.run_replicas(spec, sampler, args.replicas, args.T, args.dt,
                              args.seed, scheme=args.scheme)
    elapsed = time.perf_counter() - t0
    return elapsed, res.spacings


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--replicas", type=int, default=200)
    p.add_argument("--T", type=float, default=2.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=37)
    p.add_argument("--scheme", choices=("spacing", "named"), default="named")
    args = p.parse_args(argv)

    steps = int(round(args.T / args.dt))
    work = args.replicas * steps * args.m
    print(f"workload: m={args.m} replicas={args.replicas} steps={steps} "
          f"({work:.2e} particle-steps, scheme={args.scheme})")

    results = {}
    for backend in ("numpy", "numba"):
        try:
            elapsed, spacings = run_backend(backend, args)
        except Exception as exc:  # numba may be absent
            print(f"{backend:>6}: unavailable ({exc})")
            continue
        results[backend] = (elapsed, spacings)
        print(f"{backend:>6}: {elapsed:8.3f} s  "
              f"({work / elapsed:.2e} particle-steps/s)")

    if len(results) == 2:
        same = np.array_equal(results["numpy"][1], results["numba"][1])
        ratio = results["numpy"][0] / results["numba"][0]
        print(f"speedup numba vs numpy: {ratio:.1f}x; "
              f"terminal states bitwise identical: {same}")
        if not same:
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
