"""Backtracking embedding search, pure-Python engine.

The pattern H is compiled once into a plan: a vertex order plus, for each
depth, the relation atoms that become decidable when that vertex is placed
(positive and negative, so embeddings both preserve and reflect relations),
and an optional positive atom used to generate candidates from an index on G.
The compiled Cython engine consumes the same plan.
"""
from itertools import combinations, permutations


class Plan:
    __slots__ = ("nh", "order", "checks", "sources", "names", "arities")

    def __init__(self, nh, order, checks, sources, names, arities):
        self.nh = nh
        self.order = order
        self.checks = checks
        self.sources = sources
        self.names = names
        self.arities = arities


def _vertex_order(H):
    n = H.size
    deg = [0] * (n + 1)
    nbrs = [set() for _ in range(n + 1)]
    for r in H.signature:
        for t in H.rel(r.name):
            for x in t:
                deg[x] += 1
                nbrs[x].update(t)
    order, placed = [], set()
    while len(order) < n:
        best = None
        for v in range(1, n + 1):
            if v in placed:
                continue
            key = (-len(nbrs[v] & placed), -deg[v], v)
            if best is None or key < best[0]:
                best = (key, v)
        order.append(best[1])
        placed.add(best[1])
    return order


def build_plan(H):
    order = _vertex_order(H)
    names = H.signature.names()
    arities = [r.arity for r in H.signature]
    checks, sources = [], []
    for d, v in enumerate(order):
        here, src = [], None
        for ri, r in enumerate(H.signature):
            rel = H.rel(r.name)
            if r.arity - 1 > d:
                continue
            if r.symmetric:
                for c in combinations(range(d), r.arity - 1):
                    idxs = c + (d,)
                    t = tuple(sorted(order[i] for i in idxs))
                    exp = t in rel
                    here.append((ri, idxs, exp))
                    if exp and src is None:
                        src = (ri, r.arity - 1, c)
            else:
                for c in permutations(range(d), r.arity - 1):
                    for p in range(r.arity):
                        idxs = c[:p] + (d,) + c[p:]
                        exp = tuple(order[i] for i in idxs) in rel
                        here.append((ri, idxs, exp))
                        if exp and src is None:
                            src = (ri, p, c)
        # positive atoms first: they fail fastest on sparse targets
        here.sort(key=lambda c: not c[2])
        checks.append(here)
        sources.append(src)
    return Plan(H.size, order, checks, sources, names, arities)


def plan_for(H):
    return H.cached("plan", lambda: build_plan(H))


class Target:
    __slots__ = ("ng", "member", "index", "tuples")

    def __init__(self, G):
        self.ng = G.size
        self.tuples = [sorted(G.expanded(n)) for n in G.signature.names()]
        self.member = [set(ts) for ts in self.tuples]
        self.index = [None] * len(self.tuples)

    def lookup(self, ri, p):
        idx = self.index[ri]
        if idx is None:
            idx = self.index[ri] = {}
        key_p = idx.get(p)
        if key_p is None:
            key_p = idx[p] = {}
            for t in self.tuples[ri]:
                key_p.setdefault(t[:p] + t[p + 1:], []).append(t[p])
        return key_p


def target_for(G):
    return G.cached("target", lambda: Target(G))


class _Stop(Exception):
    pass


def search(plan, target, limit=0, collect=False):
    nh, ng = plan.nh, target.ng
    if nh == 0:
        return 1, [()]
    if nh > ng:
        return 0, []
    member = target.member
    phi = [0] * nh
    used = bytearray(ng + 1)
    maps = []
    count = 0
    srcs = []
    for src in plan.sources:
        if src is None:
            srcs.append(None)
        else:
            ri, p, others = src
            srcs.append((target.lookup(ri, p), others))

    def rec(d):
        nonlocal count
        src = srcs[d]
        if src is None:
            cands = range(1, ng + 1)
        else:
            table, others = src
            cands = table.get(tuple(phi[i] for i in others), ())
        checks = plan.checks[d]
        last = d + 1 == nh
        for w in cands:
            if used[w]:
                continue
            phi[d] = w
            ok = True
            for ri, idxs, exp in checks:
                if (tuple([phi[i] for i in idxs]) in member[ri]) != exp:
                    ok = False
                    break
            if not ok:
                continue
            if last:
                count += 1
                if collect:
                    maps.append(tuple(phi))
                if limit and count >= limit:
                    raise _Stop
            else:
                used[w] = 1
                rec(d + 1)
                used[w] = 0

    try:
        rec(0)
    except _Stop:
        pass
    return count, maps
