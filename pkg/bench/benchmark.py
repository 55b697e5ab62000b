"""Benchmark the hot polynomial kernel: numba backend vs numpy fallback.

Runs a sweep-shaped workload (the batched Horner evaluation that
dominates the orbit quadrature) under both backends and prints timings.
The two backends are bit-identical by construction; this script also
asserts that on the sampled workload.

Usage: python bench/benchmark.py [--nodes 192] [--rounds 2000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from modlab import kernels


def workload(nodes: int, rounds: int, fn):
    rng = np.random.default_rng(7)
    # a representative deflated-orbit stack: 8 polynomials up to degree 10
    rows = [rng.standard_normal(d) for d in (11, 9, 5, 3, 9, 2, 2, 2)]
    packed = kernels.pack_rows(rows)
    v = 1.0 + 0.8 * np.sin(np.linspace(0.01, 1.55, nodes)) ** 2
    out = None
    t0 = time.perf_counter()
    for _ in range(rounds):
        out = fn(packed, v)
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=192)
    ap.add_argument("--rounds", type=int, default=2000)
    args = ap.parse_args()

    t_np, out_np = workload(args.nodes, args.rounds, kernels.horner_batch_numpy)
    print(f"numpy fallback : {t_np:.4f} s "
          f"({args.rounds} rounds x {args.nodes} nodes)")
    if kernels.HAVE_NUMBA:
        # one warm-up call pays the JIT cost outside the timing
        workload(args.nodes, 1, kernels.horner_batch_numba)
        t_nb, out_nb = workload(args.nodes, args.rounds,
                                kernels.horner_batch_numba)
        print(f"numba @njit    : {t_nb:.4f} s   speedup x{t_np / t_nb:.2f}")
        same = np.array_equal(out_np, out_nb)
        print(f"bit-identical outputs: {same}")
        if not same:
            raise SystemExit("backend outputs diverged")
    else:
        print("numba not importable; fallback only")


if __name__ == "__main__":
    main()
