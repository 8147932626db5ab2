"""Finite-level polytopes of consistent random expansions and exact gap bounds.

A level-n polytope has one variable P_G(G*G') for every isomorphism
representative G of C[m], m <= n, and every labelled expansion G' with G*G'
in C*.  Constraints: each P_G sums to one, marginals agree along one fixed
embedding per vertex deletion, and automorphisms of G permute the variables
of G.  Every embedding between representatives factors through these, so
this is the full consistency system.
"""
import warnings
from fractions import Fraction
from functools import lru_cache

from . import relstruct as rs
from .relstruct import Relation, Signature, Structure
from .classes import ClassSpec, accepts, members
from .catalog import product_class
from . import exactlp

LP_VAR_CAP = 5000
EXPANSION_CAP_BITS = 16


class CREError(ValueError):
    pass


def pullback(Gp, phi, size):
    """The structure on {1..size} induced by Gp along phi (phi[i-1] = image of i)."""
    rels = {}
    for name, t in rs.all_slots(Gp.signature, size):
        if Gp.holds(name, tuple(phi[x - 1] for x in t)):
            rels.setdefault(name, []).append(t)
    return Structure(Gp.signature, size, rels)


def _split_names(cstar):
    if cstar.split is None:
        raise CREError("C* needs a declared split L ∪ L'")
    base = list(cstar.split)
    exp = [n for n in cstar.signature.names() if n not in set(base)]
    return base, exp


@lru_cache(maxsize=None)
def _expansions(cstar, G):
    """Labelled L'-structures G' with G*G' in C*, sorted by key."""
    _, exp = _split_names(cstar)
    lsig = cstar.signature.restrict(exp)
    if len(rs.all_slots(lsig, G.size)) > EXPANSION_CAP_BITS:
        raise CREError(f"expansion enumeration on {G.size} points exceeds the cap")
    out = []
    for Gp in rs.all_structures(lsig, G.size):
        s = Structure(cstar.signature, G.size, rs.superpose(G, Gp).relations)
        if accepts(cstar, s):
            out.append(Gp)
    return tuple(out)


class LevelPolytope:
    """The level-n consistency polytope; rows are dicts with entries +1/-1."""

    def __init__(self, base, cstar, level):
        self.base = base
        self.cstar = cstar
        self.level = level
        self.reps = []            # (m, G)
        self.var_index = {}       # (G key, G' key) -> column
        self.vars = []            # (G, G')
        self.rows, self.rhs, self.kinds = [], [], []
        self._solver = None
        self._presolved = None
        self._build()

    def _build(self):
        base_names, _ = _split_names(self.cstar)
        if list(self.base.signature.names()) != base_names:
            raise CREError("base class signature must equal the L part of C*")
        by_rep = {}
        for m in range(self.level + 1):
            for G in members(self.base, m):
                exps = _expansions(self.cstar, G)
                if not exps:
                    raise CREError(f"infeasible: C* admits no expansion of {rs.canonical_string(G)}")
                self.reps.append((m, G))
                cols = []
                for Gp in exps:
                    self.var_index[(G.key(), Gp.key())] = len(self.vars)
                    cols.append(len(self.vars))
                    self.vars.append((G, Gp))
                by_rep[G.key()] = (G, exps, cols)
                if len(self.vars) > LP_VAR_CAP:
                    raise CREError(f"more than {LP_VAR_CAP} variables")
        for m, G in self.reps:
            _, exps, cols = by_rep[G.key()]
            self._add({j: 1 for j in cols}, 1, ("normalize", G))
            # automorphisms
            if m > 1:
                _, auts = rs.count_embeddings(G, G, collect=True)
                for sigma in auts:
                    if list(sigma) == list(range(1, m + 1)):
                        continue
                    for Gp, j in zip(exps, cols):
                        moved = pullback(Gp, sigma, m)
                        jj = self.var_index[(G.key(), moved.key())]
                        if jj != j:
                            self._add({j: 1, jj: -1}, 0, ("automorphism", G))
            # one embedding per vertex deletion
            for v in range(1, m + 1):
                keep = [u for u in range(1, m + 1) if u != v]
                H = rs.induced(G, keep)
                R = rs.canonical_form(H)
                iso = rs.isomorphism(R, H)   # R-vertex i -> H-vertex iso[i-1]
                phi = [keep[iso[i] - 1] for i in range(R.size)]
                _, rexps, rcols = by_rep[R.key()]
                sums = {j: [] for j in rcols}
                for Gp, j in zip(exps, cols):
                    Rp = pullback(Gp, phi, R.size)
                    jr = self.var_index.get((R.key(), Rp.key()))
                    if jr is None:
                        raise CREError("C* is not hereditary on this instance")
                    sums[jr].append(j)
                for jr in rcols:
                    row = {jr: 1}
                    for j in sums[jr]:
                        row[j] = row.get(j, 0) - 1
                    self._add(row, 0, ("marginal", G, v))

    def _add(self, row, rhs, kind):
        self.rows.append({j: v for j, v in row.items() if v})
        self.rhs.append(rhs)
        self.kinds.append(kind)

    @property
    def nvars(self):
        return len(self.vars)

    def column(self, H, Hp):
        """Column of P_H(H*H') for labelled H (mapped to its representative)."""
        R = rs.canonical_form(H)
        iso = rs.isomorphism(R, H)
        if iso is None:
            raise CREError("H is not a member of the base class")
        Rp = pullback(Hp, iso, R.size)
        return self.var_index.get((R.key(), Rp.key()))

    def var_name(self, j):
        G, Gp = self.vars[j]
        lab = ";".join(f"{r.name}:" + ",".join("".join(str(x) for x in t) for t in sorted(Gp.rel(r.name)))
                       for r in Gp.signature)
        return f"P[{rs.canonical_string(G)}][{lab}]"

    def export(self, objective=None):
        """Plain-text equational form of the instance."""
        def fmt(row):
            terms = []
            for j in sorted(row):
                v = row[j]
                sign = "+" if v > 0 else "-"
                mag = "" if abs(v) == 1 else f"{abs(v)} "
                terms.append(f"{sign} {mag}{self.var_name(j)}")
            s = " ".join(terms)
            return s[2:] if s.startswith("+ ") else s
        lines = [f"\\ level {self.level}, {self.nvars} variables, {len(self.rows)} constraints"]
        if objective:
            lines.append("maximize")
            lines.append("  obj: " + fmt(objective))
        lines.append("subject to")
        for i, (row, rhs) in enumerate(zip(self.rows, self.rhs)):
            lines.append(f"  c{i}: {fmt(row)} = {rhs}")
        lines.append("bounds")
        lines.append("  all variables >= 0")
        lines.append("end")
        return "\n".join(lines) + "\n"

    # solving --------------------------------------------------------------
    def presolved(self):
        """Merge variables forced equal by automorphism rows.

        Returns (orbit of each column, number of orbits, reduced rows, rhs).
        """
        if self._presolved is None:
            self._presolved = self._presolve()
        return self._presolved

    def _presolve(self):
        parent = list(range(self.nvars))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for row, kind in zip(self.rows, self.kinds):
            if kind[0] == "automorphism":
                a, b = (find(j) for j in row)
                if a != b:
                    parent[max(a, b)] = min(a, b)
        roots = sorted({find(j) for j in range(self.nvars)})
        ridx = {r: i for i, r in enumerate(roots)}
        orbit = [ridx[find(j)] for j in range(self.nvars)]
        seen = set()
        rows, rhs = [], []
        for row, b, kind in zip(self.rows, self.rhs, self.kinds):
            if kind[0] == "automorphism":
                continue
            red = {}
            for j, v in row.items():
                red[orbit[j]] = red.get(orbit[j], 0) + v
            red = {j: v for j, v in red.items() if v}
            if not red:
                if b:
                    raise CREError("inconsistent constraint after merging")
                continue
            key = (tuple(sorted(red.items())), b)
            if key in seen:
                continue
            seen.add(key)
            rows.append(red)
            rhs.append(b)
        return orbit, len(roots), rows, rhs

    def maximize(self, objective, oracle=False):
        """Exact optimum of a linear objective (dict column -> coefficient)."""
        orbit, k, rows, rhs = self.presolved()
        c = {}
        for j, v in objective.items():
            c[orbit[j]] = c.get(orbit[j], 0) + v
        if oracle:
            res = exactlp.vertex_enumeration(c, rows, rhs, k)
        else:
            if self._solver is None:
                self._solver = exactlp.Simplex(rows, rhs, k)
            res = self._solver.maximize(c)
        if res.status != "optimal":
            raise CREError(f"LP {res.status}")
        x = [res.x[orbit[j]] for j in range(self.nvars)]
        if not exactlp.check_feasible(x, self.rows, self.rhs):
            raise CREError("optimal vertex failed the exact constraint re-check")
        return res.value, x


class GapBound:
    def __init__(self, H1, H2, Hp, levels, optima, reverse):
        self.H1, self.H2, self.Hp = H1, H2, Hp
        self.levels = list(levels)
        self.optima = list(optima)        # max P_H1 - P_H2 per level
        self.reverse = list(reverse)      # max P_H2 - P_H1 per level

    @property
    def symmetric(self):
        return [max(a, b) for a, b in zip(self.optima, self.reverse)]

    def to_json(self):
        return {"H1": self.H1.to_json(), "H2": self.H2.to_json(), "H'": self.Hp.to_json(),
                "levels": self.levels,
                "optimum": [str(v) for v in self.optima],
                "reverse_optimum": [str(v) for v in self.reverse],
                "max_over_orderings": [str(v) for v in self.symmetric],
                "note": "upper bound on the gap of any consistent random expansion at each level"}


def _primed(s, names):
    sig = Signature([Relation(r.name + "'" if r.name in names else r.name, r.arity, r.symmetric)
                     for r in s.signature])
    rels = {(n + "'" if n in names else n): v for n, v in s.relations.items()}
    return Structure(sig, s.size, rels)


def as_cstar(base, expansion):
    """Accept either an expansion class C' (unconstrained product) or C* itself.

    Expansion relation names that clash with the base get a trailing prime.
    """
    if expansion.split is not None and set(base.signature.names()) <= set(expansion.signature.names()):
        return expansion
    clash = set(base.signature.names()) & set(expansion.signature.names())
    if clash:
        expansion = ClassSpec(Signature([Relation(r.name + "'" if r.name in clash else r.name,
                                                  r.arity, r.symmetric) for r in expansion.signature]),
                              [_primed(f, clash) for f in expansion.forbidden])
    return product_class(base, expansion)


def _align(Hp, cstar):
    """Rename H' relations to the expansion names used inside C*."""
    _, exp = _split_names(cstar)
    if all(n in exp for n in Hp.signature.names()):
        return Hp
    clash = {n for n in Hp.signature.names() if n + "'" in exp}
    out = _primed(Hp, clash)
    if not all(n in exp for n in out.signature.names()):
        raise CREError("H' is not over the expansion signature")
    return out


def gap_objective(poly, H1, H2, Hp):
    c = {}
    j1 = poly.column(H1, Hp)
    j2 = poly.column(H2, Hp)
    if j1 is not None:
        c[j1] = c.get(j1, 0) + 1
    if j2 is not None:
        c[j2] = c.get(j2, 0) - 1
    return c


def gap_bound(base, expansion, H1, H2, Hp, levels, oracle=False):
    """Exact max of P_H1(H1*H') - P_H2(H2*H') over each level polytope."""
    if isinstance(levels, int):
        levels = [levels]
    if not (H1.size == H2.size == Hp.size):
        raise CREError("H1, H2 and H' must have equal sizes")
    if not accepts(base, H1) or not accepts(base, H2):
        raise CREError("H1 and H2 must lie in the base class")
    cstar = as_cstar(base, expansion)
    Hp = _align(Hp, cstar)
    opt, rev = [], []
    for n in levels:
        if n < H1.size:
            raise CREError("level below |H|")
        poly = LevelPolytope(base, cstar, n)
        c = gap_objective(poly, H1, H2, Hp)
        v1, _ = poly.maximize(c, oracle)
        v2, _ = poly.maximize({j: -v for j, v in c.items()}, oracle)
        opt.append(v1)
        rev.append(v2)
    return GapBound(H1, H2, Hp, levels, opt, rev)


# measuring class -----------------------------------------------------------------

def projection_signature(sig):
    """Relations R[x@i] (arity r-1) per position; one symmetric R[x*1] when R is symmetric.

    Only slots with exactly one position taken by the new point survive: no
    slot at all is a copy of R itself and two or more slots repeat an entry.
    """
    out = []
    for r in sig:
        if r.arity < 2:
            continue
        if r.symmetric:
            out.append(Relation(f"{r.name}[x*1]", r.arity - 1, True))
        else:
            for i in range(1, r.arity + 1):
                out.append(Relation(f"{r.name}[x@{i}]", r.arity - 1, False))
    return Signature(out)


def attach_point(astar, sig, psig):
    """The L-structure Ab on n+1 points encoded by an L*-structure A*."""
    n = astar.size
    b = n + 1
    rels = {r.name: list(astar.rel(r.name)) for r in sig}
    for p in psig:
        base_name, _, tag = p.name.partition("[x")
        if tag.startswith("*"):
            rels[base_name] += [t + (b,) for t in astar.rel(p.name)]
        else:
            i = int(tag[1:-1])
            rels[base_name] += [t[:i - 1] + (b,) + t[i - 1:] for t in astar.rel(p.name)]
    return Structure(sig, n + 1, rels)


def project_point(ab, v, sig, psig):
    """A^b for b = v: the L*-structure on the other points."""
    keep = [u for u in range(1, ab.size + 1) if u != v]
    pos = {u: i + 1 for i, u in enumerate(keep)}
    rels = {r.name: [tuple(pos[x] for x in t) for t in ab.rel(r.name) if v not in t] for r in sig}
    for p in psig:
        base_name, _, tag = p.name.partition("[x")
        tuples = []
        for t in ab.rel(base_name):
            if v not in t:
                continue
            if tag.startswith("*"):
                tuples.append(tuple(pos[x] for x in t if x != v))
            elif t.index(v) == int(tag[1:-1]) - 1:
                tuples.append(tuple(pos[x] for x in t if x != v))
        rels[p.name] = tuples
    return Structure(sig + psig, len(keep), rels)


def measuring_class(base, size_cap=None):
    """MC(C) as Forb(minimal non-members up to size_cap) over L ∪ L^pr."""
    sig = base.signature
    if any(r.arity == 1 for r in sig):
        raise CREError("unary predicates are not supported")
    psig = projection_signature(sig)
    full = sig + psig
    N = base.size_cap_of_forbidden
    if size_cap is None:
        size_cap = max(N, 1)
    if size_cap < N:
        warnings.warn(f"size_cap {size_cap} is below the largest forbidden size {N}; "
                      "the emitted family may be incomplete")
    keys = {}
    for m in range(size_cap + 1):
        ok = set()
        for ab in members(base, m + 1):
            for v in range(1, m + 2):
                ok.add(rs.canonical_key(project_point(ab, v, sig, psig)))
        keys[m] = ok
    everything = ClassSpec(full)
    bad = []
    for m in range(1, size_cap + 1):
        for s in members(everything, m):
            if rs.canonical_key(s) in keys[m]:
                continue
            if all(rs.canonical_key(rs.induced(s, [u for u in range(1, m + 1) if u != x])) in keys[m - 1]
                   for x in range(1, m + 1)):
                bad.append(s)
    name = None
    if base.catalog:
        name = ("MC(" + base.catalog[0] + ")", dict(base.catalog[1]))
    return ClassSpec(full, bad, catalog=name, split=sig.names())


def mc_member(base, astar):
    """Direct membership test: A* is some A^b exactly when Ab lies in C."""
    sig = base.signature
    psig = projection_signature(sig)
    return accepts(base, attach_point(astar, sig, psig))


def keisler_gap(base, level, max_size=None, oracle=False):
    """Gap table over all (H1, H2, H') with |H| <= max_size, C* = MC(C)."""
    if max_size is None:
        max_size = level
    cstar = measuring_class(base)
    base_names, exp = _split_names(cstar)
    lsig = cstar.signature.restrict(exp)
    poly = LevelPolytope(base, cstar, level)
    table = []
    for s in range(1, max_size + 1):
        reps = members(base, s)
        for i, H1 in enumerate(reps):
            for H2 in reps[i + 1:]:
                for Hp in rs.all_structures(lsig, s):
                    c = gap_objective(poly, H1, H2, Hp)
                    if not c:
                        v1 = v2 = Fraction(0)
                    else:
                        v1, _ = poly.maximize(c, oracle)
                        v2, _ = poly.maximize({j: -v for j, v in c.items()}, oracle)
                    table.append({"size": s, "H1": rs.canonical_string(H1),
                                  "H2": rs.canonical_string(H2),
                                  "H'": Hp.to_json(), "gap": max(v1, v2)})
    headline = max((row["gap"] for row in table), default=Fraction(0))
    return {"level": level, "max_size": max_size, "nvars": poly.nvars,
            "table": table, "headline": headline}
