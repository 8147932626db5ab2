"""Partial Steiner systems avoiding small configurations (deletion method)."""
import math
import warnings
from collections import defaultdict
from itertools import combinations

import numpy as np


class SteinerError(ValueError):
    pass


class PartialSteiner:
    def __init__(self, n, r, k, J, edges, gen_params=None, stages=None):
        self.n, self.r, self.k, self.J = n, r, k, J
        self.edges = tuple(sorted(tuple(sorted(e)) for e in edges))
        self.gen_params = dict(gen_params or {})
        self.stages = list(stages or [])

    def to_json(self):
        return {"n": self.n, "r": self.r, "k": self.k, "J": self.J,
                "edges": [list(e) for e in self.edges],
                "gen_params": self.gen_params,
                "stages": [{"stage": s, "edges": c} for s, c in self.stages]}

    @classmethod
    def from_json(cls, obj):
        edges = obj["edges"]
        for e in edges:
            if len(e) != obj["r"] or len(set(e)) != len(e) or min(e) < 1 or max(e) > obj["n"]:
                raise SteinerError(f"bad edge {e}")
        if len({tuple(sorted(e)) for e in edges}) != len(edges):
            raise SteinerError("duplicate edges")
        stages = [(s["stage"], s["edges"]) for s in obj.get("stages", [])]
        return cls(obj["n"], obj["r"], obj["k"], obj["J"], edges, obj.get("gen_params"), stages)


def config_bound(j, r, k):
    """Largest vertex count a j-edge configuration may span and still violate."""
    return j * r - k * (j - 1) - 1


def pair_violations(edges, k):
    """Pairs of edges meeting in more than k points, sorted."""
    buckets = defaultdict(list)
    for e in edges:
        for c in combinations(e, k + 1):
            buckets[c].append(e)
    out = set()
    for lst in buckets.values():
        for a, b in combinations(sorted(lst), 2):
            out.add((a, b))
    return sorted(out)


def config_violations(edges, r, k, j):
    """Connected j-edge sets spanning at most config_bound(j, r, k) vertices."""
    edges = sorted(edges)
    by_vertex = defaultdict(list)
    by_pair = defaultdict(list)
    for i, e in enumerate(edges):
        for v in e:
            by_vertex[v].append(i)
        for pr in combinations(e, 2):
            by_pair[pr].append(i)
    step = r - k
    found = set()

    def grow(chosen, union, deficit):
        size = len(chosen)
        if size == j:
            if deficit >= 1:
                found.add(tuple(sorted(chosen)))
            return
        left = j - size - 1
        need = 1 - deficit + k - left * step
        counts = defaultdict(int)
        if need >= 2:
            # only edges sharing a pair with the union can qualify
            near = set()
            for pr in combinations(sorted(union), 2):
                near.update(by_pair.get(pr, ()))
            for i in near:
                counts[i] = len(union.intersection(edges[i]))
        else:
            for v in union:
                for i in by_vertex[v]:
                    counts[i] += 1
        for i, c in counts.items():
            if i <= chosen[0] or i in chosen or c < max(need, 1):
                continue
            grow(chosen + [i], union | set(edges[i]), deficit + c - k)

    for i0 in range(len(edges)):
        grow([i0], set(edges[i0]), 0)
    return sorted(tuple(edges[i] for i in s) for s in found)


def _delete(edges, groups):
    alive = set(edges)
    for g in groups:
        if all(e in alive for e in g):
            alive.discard(max(g))
    return alive


def _unrank(idx, r):
    """Colex unranking of an r-subset of {1..n}."""
    out = []
    for i in range(r, 0, -1):
        c = i - 1
        while math.comb(c + 1, i) <= idx:
            c += 1
        out.append(c + 1)
        idx -= math.comb(c, i)
    return tuple(sorted(out))


def _sample(n, r, p, rng):
    total = math.comb(n, r)
    count = int(rng.binomial(total, p))
    picks = rng.choice(total, size=count, replace=False)
    return sorted(_unrank(int(i), r) for i in picks)


def generate(n, r, k, J, epsilon, seed, mode="random-deletion"):
    if not r > k >= 1:
        raise SteinerError("need r > k >= 1")
    if n <= r:
        raise SteinerError("n ≤ r")
    params = {"epsilon": epsilon, "seed": seed, "mode": mode}
    if mode == "kpartite":
        if r != k + 1:
            raise SteinerError("kpartite mode needs r = k + 1")
        q = n // (k + 1)
        parts = [range(i * q + 1, (i + 1) * q + 1) for i in range(k + 1)]
        edges = []

        def build(i, acc):
            if i == len(parts):
                edges.append(tuple(acc))
                return
            for v in parts[i]:
                build(i + 1, acc + [v])

        build(0, [])
        return PartialSteiner(n, r, k, J, edges, params, [("kpartite", len(edges))])
    if mode != "random-deletion":
        raise SteinerError(f"unknown mode {mode!r}")
    if not 0 < epsilon < 1:
        raise SteinerError("epsilon must lie in (0, 1)")
    if not J * epsilon < 1 + epsilon:
        raise SteinerError("need J * epsilon < 1 + epsilon")
    p = n ** -(r - (k + epsilon))
    if p * math.comb(n, r) < 1:
        warnings.warn(f"degenerate parameters: expected edge count {p * math.comb(n, r):.3g} < 1")
    params["p"] = p
    rng = np.random.default_rng(seed)
    edges = _sample(n, r, p, rng)
    stages = [("sampled", len(edges))]
    alive = _delete(edges, pair_violations(edges, k))
    stages.append(("pairs", len(alive)))
    for j in range(2, J + 1):
        alive = _delete(sorted(alive), config_violations(alive, r, k, j))
        stages.append((f"config_{j}", len(alive)))
    system = PartialSteiner(n, r, k, J, alive, params, stages)
    rep = verify(system)
    if not rep["pairwise_ok"]:
        raise SteinerError("pairwise stage left violations")
    for j, ok in rep["config_ok"].items():
        if not ok:
            raise SteinerError(f"configuration stage j={j} left violations")
    return system


def verify(system):
    edges = list(system.edges)
    pairs = pair_violations(edges, system.k)
    config_ok, examples = {}, {}
    for j in range(2, system.J + 1):
        bad = config_violations(edges, system.r, system.k, j)
        config_ok[j] = not bad
        if bad:
            examples[j] = [list(map(list, bad[0]))]
    m = len(edges)
    dens = math.log(m) / math.log(system.n) if m > 0 and system.n > 1 else None
    return {"pairwise_ok": not pairs, "pair_violations": [list(map(list, p)) for p in pairs[:5]],
            "config_ok": config_ok, "config_examples": examples,
            "edge_count": m, "density_exponent": dens}


def verified(report):
    return report["pairwise_ok"] and all(report["config_ok"].values())
