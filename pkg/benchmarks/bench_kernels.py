"""Time the embedding search on both backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Workloads mirror the hot paths: counting small patterns in random
hypergraphs (concentration experiment) and membership tests against
pasted Steiner systems (placement experiment).
"""
import argparse
import time

import numpy as np

from ovlab import kernels
from ovlab import catalog as cat
from ovlab import relstruct as rs
from ovlab.kaygraph import random_hypergraph


def workloads():
    rng = np.random.default_rng(0)
    out = []
    for n in (20, 40):
        X = random_hypergraph(n, 3, rng)
        out.append((f"K4^- into G(n={n}, 1/2)", cat.kminus(3), X))
        out.append((f"empty triple into G(n={n}, 1/2)", cat.empty_hypergraph(3, 3), X))
    sparse = random_hypergraph(60, 3, np.random.default_rng(1))
    keep = [e for e in sparse.rel("R") if sum(e) % 9 == 0]
    sparse = rs.hypergraph(60, 3, keep)
    out.append(("K4^3 into sparse n=60", cat.complete(4, 3), sparse))
    G = random_hypergraph(12, 2, np.random.default_rng(2))
    out.append(("triangle into G(12, 1/2)", cat.complete(3, 2), G))
    return out


def bench(H, G, backend, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t = time.perf_counter()
        result = kernels.search(H, G, backend=backend)[0]
        best = min(best, time.perf_counter() - t)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available()
    print(f"backends: {', '.join(backends)}")
    print(f"{'workload':40s} {'count':>8s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup")
    for name, H, G in workloads():
        times, counts = [], set()
        for b in backends:
            t, c = bench(H, G, b, args.repeat)
            times.append(t)
            counts.add(c)
        if len(counts) != 1:
            raise SystemExit(f"backends disagree on {name}: {counts}")
        speed = f"{times[0] / times[-1]:8.1f}x" if len(times) > 1 else "       -"
        print(f"{name:40s} {counts.pop():8d} " + " ".join(f"{t * 1e3:8.2f}ms" for t in times) + " " + speed)


if __name__ == "__main__":
    main()
