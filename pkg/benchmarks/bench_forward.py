"""Benchmark the forward kernel backends against each other.

Times the forward map per backend over a range of network sizes, plus one
end-to-end recovery, and prints a small table. Run as:

    python benchmarks/bench_forward.py [--sizes 7,11,15,19] [--repeats 20]
"""

import argparse
import time

import numpy as np

import spiderdtn as sp
from spiderdtn._kernels import available_backends


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_forward(sizes, repeats):
    backends = available_backends()
    print(f"backends: {', '.join(sorted(backends))}  (active: {sp.kernel_backend})")
    header = ["m", "edges"] + [f"{name} (ms)" for name in sorted(backends)]
    rows = []
    for num_radii in sizes:
        topo = sp.build_spider(num_radii)
        rng = sp.make_rng(sp.derive_seed(0, "bench", num_radii))
        weights = rng.uniform(0.5, 2.0, topo.num_edges)
        row = [str(num_radii), str(topo.num_edges)]
        for name in sorted(backends):
            core = backends[name]
            best = time_call(
                lambda: core(
                    topo.num_boundary,
                    topo.num_vertices,
                    topo.tails,
                    topo.heads,
                    weights,
                    True,
                ),
                repeats,
            )
            row.append(f"{best * 1e3:9.3f}")
        rows.append(row)
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    print("  ".join(h.rjust(w) for h, w in zip(header, widths)))
    for row in rows:
        print("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))


def bench_recovery(num_radii, repeats):
    topo = sp.build_spider(num_radii)
    partition = sp.random_partition(topo, 3, sp.derive_seed(0, "bench-part"))
    conductance, _ = sp.sample_pc_conductance(
        partition, 1.0, 100.0, sp.derive_seed(0, "bench-vals")
    )
    data = sp.response_from_conductance(topo, conductance)
    problem = sp.InverseProblem(
        topology=topo, partition=partition, response_data=data
    )
    best = time_call(lambda: sp.solve(problem), repeats)
    result = sp.solve(problem, true_conductance=conductance)
    print(
        f"\nreduced recovery, m={num_radii}, s=3: {best * 1e3:.1f} ms "
        f"({result.iterations} iterations, status {result.status}, "
        f"error {np.linalg.norm(result.conductance - conductance):.2e})"
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--sizes",
        default="7,11,15,19",
        help="comma-separated radius counts",
    )
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    sizes = [int(part) for part in args.sizes.split(",") if part.strip()]
    bench_forward(sizes, args.repeats)
    bench_recovery(min(sizes), max(3, args.repeats // 4))


if __name__ == "__main__":
    main()
