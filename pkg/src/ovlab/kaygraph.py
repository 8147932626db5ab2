"""Kay-graphs: the parity reduct of a k-uniform hypergraph and its preimages.

A hypergraphing of a (k+1)-uniform kay-graph G is a k-uniform H whose parity
reduct is G.  Over GF(2) the preimages form a coset of the cycle space
spanned by the stars delta(e_U) = {T : U ⊂ T}, U ⊂ {2..l} with |U| = k-1,
so there are exactly 2^C(l-1, k-1) of them.  For k = 2 the stars are vertex
switchings.
"""
import math
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import relstruct as rs
from .relstruct import Structure
from .catalog import hyper_signature, catalog
from .classes import accepts

ENUM_CAP_BITS = 20


class KayGraphError(ValueError):
    pass


def _arity(s):
    if len(s.signature) != 1 or not s.signature.relations[0].symmetric:
        raise KayGraphError("expected a uniform hypergraph")
    return s.signature.relations[0].arity


def _edges(s):
    return s.rel(s.signature.relations[0].name)


def reduct_map(H):
    """(k+1)-sets whose number of contained H-edges has the parity of k+1."""
    k = _arity(H)
    E = _edges(H)
    out = []
    for S in combinations(range(1, H.size + 1), k + 1):
        c = sum(1 for T in combinations(S, k) if T in E)
        if c % 2 == (k + 1) % 2:
            out.append(S)
    return Structure(hyper_signature(k + 1), H.size, {hyper_signature(k + 1).names()[0]: out})


def is_kaygraph(G, k=None):
    if k is None:
        k = _arity(G) - 1
    return accepts(catalog("kaygraph", k=k), G)


class KayGraphInstance:
    def __init__(self, k, reduct, hypergraphings=None):
        self.k = k
        self.reduct = reduct
        self.hypergraphings = hypergraphings

    def to_json(self):
        out = {"k": self.k, "reduct": self.reduct.to_json()}
        if self.hypergraphings is not None:
            out["hypergraphings"] = [h.to_json() for h in self.hypergraphings]
            out["count"] = len(self.hypergraphings)
        return out


def hypergraphings(G, k=None):
    """All k-uniform H with reduct_map(H) == G, sorted by key."""
    if k is None:
        k = _arity(G) - 1
    if _arity(G) != k + 1:
        raise KayGraphError("G must be (k+1)-uniform")
    if k < 1:
        raise KayGraphError("k must be at least 1")
    l = G.size
    if l <= k:
        # no (k+1)-sets: every k-uniform hypergraph qualifies
        return list(rs.all_structures(hyper_signature(k), l))
    dim = math.comb(l - 1, k - 1)
    if dim > ENUM_CAP_BITS:
        raise KayGraphError(f"2^{dim} hypergraphings exceed the enumeration cap")
    GE = _edges(G)
    flip = k % 2
    base = set()
    for T in combinations(range(2, l + 1), k):
        if (((1,) + T) in GE) ^ flip:
            base.add(T)
    stars = []
    for U in combinations(range(2, l + 1), k - 1):
        Us = set(U)
        stars.append({tuple(sorted(Us | {x})) for x in range(1, l + 1) if x not in Us})
    name = hyper_signature(k).names()[0]
    out = []
    for mask in range(1 << dim):
        edges = set(base)
        for i in range(dim):
            if mask >> i & 1:
                edges ^= stars[i]
        out.append(Structure(hyper_signature(k), l, {name: edges}))
    if reduct_map(out[0]) != G:
        raise KayGraphError("G is not a kay-graph")
    out.sort(key=lambda s: s.key())
    return out


def hypergraphings_by_reduct(l, k):
    """Brute force: bucket every k-uniform hypergraph on l points by its reduct."""
    sig = hyper_signature(k)
    if math.comb(l, k) > ENUM_CAP_BITS:
        raise KayGraphError("brute force enumeration cap exceeded")
    buckets = {}
    for H in rs.all_structures(sig, l, cap_bits=ENUM_CAP_BITS):
        buckets.setdefault(reduct_map(H), []).append(H)
    return buckets


def rho(l, k):
    if l <= k:
        raise KayGraphError("rho needs l > k")
    return Fraction(1, 2 ** math.comb(l - 1, k - 1))


def _pullback(Bs, phi, size):
    k = _arity(Bs)
    E = _edges(Bs)
    name = Bs.signature.names()[0]
    return Structure(Bs.signature, size,
                     {name: [T for T in combinations(range(1, size + 1), k)
                             if tuple(sorted(phi[x - 1] for x in T)) in E]})


def keisler_fraction(A, Astar, B, embedding_mode="fixed"):
    """Fiber statistics of uniform hypergraphings of B over a copy of A.

    ``fixed``: the first embedding of A in B; ``all``: every embedding.
    Returns a dict with the probability that the embedding carries A*, the
    per-B* ratios N(A*, B*) / N(A, B), and whether the fiber is uniform.
    """
    k = _arity(A) - 1
    if _arity(Astar) != k or Astar.size != A.size or reduct_map(Astar) != A:
        raise KayGraphError("A* is not a hypergraphing of A")
    NA, maps = rs.count_embeddings(A, B, collect=True)
    if NA == 0:
        raise KayGraphError("A does not embed in B")
    if embedding_mode not in ("fixed", "all"):
        raise KayGraphError(f"unknown embedding mode {embedding_mode!r}")
    chosen = maps[:1] if embedding_mode == "fixed" else maps
    Bstars = hypergraphings(B, k)
    total = len(Bstars)
    probs = []
    for phi in chosen:
        hits = sum(1 for Bs in Bstars if _pullback(Bs, phi, A.size) == Astar)
        probs.append(Fraction(hits, total))
    ratios = [Fraction(rs.count_embeddings(Astar, Bs)[0], NA) for Bs in Bstars]
    target = rho(A.size, k) if A.size > k else None
    return {"probability": probs[0], "per_embedding": probs,
            "ratios": ratios, "hypergraphings": total, "embeddings": NA,
            "rho": target,
            "uniform": target is not None and all(p == target for p in probs),
            "mean_ratio": sum(ratios, Fraction(0)) / total}


# concentration experiment ----------------------------------------------------

def expected_count(n, l, k):
    """E[N(A, red X)] for X uniform k-uniform on n points and |A| = l."""
    falling = math.perm(n, l)
    return Fraction(2 ** math.comb(l - 1, k - 1) * falling, 2 ** math.comb(l, k))


def random_hypergraph(n, k, rng):
    slots = list(combinations(range(1, n + 1), k))
    coins = rng.integers(2, size=len(slots))
    sig = hyper_signature(k)
    return Structure(sig, n, {sig.names()[0]: [s for s, c in zip(slots, coins) if c]})


def concentration_experiment(k, A, n_grid=(10, 20, 40), trials=50, seed=0):
    l = A.size
    if _arity(A) != k + 1:
        raise KayGraphError("A must be (k+1)-uniform")
    stars = hypergraphings(A, k)
    r = rho(l, k)
    rows = []
    for n in n_grid:
        if n < l:
            raise KayGraphError("n must be at least |A|")
        E = expected_count(n, l, k)
        Ef = float(E)
        f_dev, fs_dev, counts = [], [], []
        for t in range(trials):
            rng = np.random.default_rng([seed, n, t])
            X = random_hypergraph(n, k, rng)
            red = reduct_map(X)
            NA = rs.count_embeddings(A, red)[0]
            counts.append(NA)
            f_dev.append(abs(NA / Ef - 1))
            worst = 0.0
            for As in stars:
                fs = rs.count_embeddings(As, X)[0] / Ef
                worst = max(worst, abs(fs - float(r)))
            fs_dev.append(worst)
        row = {"n": n, "E": str(E), "E_float": Ef, "trials": trials}
        if trials:
            mean = float(np.mean(counts))
            se = float(np.std(counts, ddof=1) / math.sqrt(trials)) if trials > 1 else None
            scale = math.sqrt(math.log(n) / n)
            row.update({"max_abs_f_minus_1": max(f_dev), "max_abs_fstar_minus_rho": max(fs_dev),
                        "mean_count": mean, "count_standard_error": se,
                        "envelope_scale": scale})
        rows.append(row)
    report = {"k": k, "A": A.to_json(), "rho": str(r), "seed": seed,
              "n_grid": list(n_grid), "hypergraphings_of_A": len(stars), "rows": rows}
    if trials:
        report["envelope_c_f"] = max(row["max_abs_f_minus_1"] / row["envelope_scale"] for row in rows)
        report["envelope_c_fstar"] = max(row["max_abs_fstar_minus_rho"] / row["envelope_scale"]
                                         for row in rows)
    return report
