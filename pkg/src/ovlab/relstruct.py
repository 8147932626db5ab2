"""Finite relational structures on the domain {1..n}.

Relations never hold on tuples with repeated entries.  Symmetric relations
are stored as sorted representatives and expanded on demand.
"""
from itertools import combinations, permutations
from typing import NamedTuple

from . import kernels


class StructureError(ValueError):
    pass


class Relation(NamedTuple):
    name: str
    arity: int
    symmetric: bool = False


class Signature:
    """An ordered list of relation symbols with unique names."""

    __slots__ = ("relations", "_by_name")

    def __init__(self, relations=()):
        rels = []
        for r in relations:
            if isinstance(r, dict):
                r = Relation(r["name"], int(r["arity"]), bool(r.get("symmetric", False)))
            elif not isinstance(r, Relation):
                r = Relation(*r)
            if r.arity < 1:
                raise StructureError(f"relation {r.name!r} has arity < 1")
            rels.append(r)
        self.relations = tuple(rels)
        self._by_name = {r.name: r for r in rels}
        if len(self._by_name) != len(rels):
            raise StructureError("duplicate relation names in signature")

    def __iter__(self):
        return iter(self.relations)

    def __len__(self):
        return len(self.relations)

    def __contains__(self, name):
        return name in self._by_name

    def __getitem__(self, name):
        try:
            return self._by_name[name]
        except KeyError:
            raise StructureError(f"unknown relation {name!r}") from None

    def __eq__(self, other):
        return isinstance(other, Signature) and self.relations == other.relations

    def __hash__(self):
        return hash(self.relations)

    def __repr__(self):
        return "Signature(%s)" % ", ".join(
            f"{r.name}/{r.arity}{'s' if r.symmetric else ''}" for r in self.relations)

    def names(self):
        return [r.name for r in self.relations]

    @property
    def max_arity(self):
        return max((r.arity for r in self.relations), default=0)

    def __add__(self, other):
        clash = set(self.names()) & set(other.names())
        if clash:
            raise StructureError(f"signatures share names {sorted(clash)}")
        return Signature(self.relations + other.relations)

    def restrict(self, names):
        names = list(names)
        for n in names:
            self[n]
        keep = set(names)
        return Signature([r for r in self.relations if r.name in keep])

    def to_json(self):
        return [{"name": r.name, "arity": r.arity, "symmetric": r.symmetric}
                for r in self.relations]


def _norm(rel, t):
    t = tuple(int(x) for x in t)
    return tuple(sorted(t)) if rel.symmetric else t


class Structure:
    """Immutable labelled structure.  ``relations`` maps names to tuple sets."""

    __slots__ = ("signature", "size", "_rels", "_hash", "_cache")

    def __init__(self, signature, size, relations=None):
        if not isinstance(signature, Signature):
            signature = Signature(signature)
        self.signature = signature
        self.size = int(size)
        relations = relations or {}
        for name in relations:
            signature[name]
        self._rels = {r.name: frozenset(_norm(r, t) for t in relations.get(r.name, ()))
                      for r in signature}
        self._hash = None
        self._cache = {}

    def rel(self, name):
        return self._rels[name]

    @property
    def relations(self):
        return dict(self._rels)

    def holds(self, name, t):
        return _norm(self.signature[name], t) in self._rels[name]

    def expanded(self, name):
        """All tuples of the relation, including permutations of symmetric ones."""
        r = self.signature[name]
        if not r.symmetric:
            return set(self._rels[name])
        return {p for t in self._rels[name] for p in permutations(t)}

    def num_tuples(self):
        return sum(len(v) for v in self._rels.values())

    def key(self):
        return (self.size, tuple(tuple(sorted(self._rels[r.name])) for r in self.signature))

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (self.size == other.size and self.signature == other.signature
                and self._rels == other._rels)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.signature, self.size,
                               tuple(self._rels[r.name] for r in self.signature)))
        return self._hash

    def __repr__(self):
        body = "; ".join(f"{n}={sorted(v)}" for n, v in self._rels.items())
        return f"Structure(n={self.size}; {body})"

    def cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    # JSON ------------------------------------------------------------
    def to_json(self):
        return {"signature": self.signature.to_json(), "size": self.size,
                "relations": {r.name: [list(t) for t in sorted(self._rels[r.name])]
                              for r in self.signature}}

    @classmethod
    def from_json(cls, obj):
        sig = Signature(obj["signature"])
        size = obj["size"]
        if not isinstance(size, int) or size < 0:
            raise StructureError("size must be a nonnegative integer")
        rels = obj.get("relations", {})
        for name, tuples in rels.items():
            r = sig[name]
            seen = set()
            for t in tuples:
                msg = _check_tuple(r, t, size)
                if msg:
                    raise StructureError(msg)
                nt = _norm(r, t)
                if nt in seen:
                    raise StructureError(f"duplicate tuple {list(t)} in {name}")
                seen.add(nt)
        return cls(sig, size, rels)


def _check_tuple(r, t, n):
    t = list(t)
    if len(t) != r.arity:
        return f"tuple {t} in {r.name} has length {len(t)}, expected arity {r.arity}"
    for x in t:
        if not isinstance(x, int) or isinstance(x, bool) or x < 1 or x > n:
            return f"tuple {t} in {r.name}: entry {x!r} out of range 1..{n}"
    if len(set(t)) != len(t):
        return f"tuple {t} in {r.name}: repeated entries"
    return None


def validate(s):
    """Return None if ``s`` satisfies the invariants, else a description."""
    for r in s.signature:
        for t in sorted(s.rel(r.name)):
            msg = _check_tuple(r, t, s.size)
            if msg:
                return msg
    return None


# constructors ----------------------------------------------------------

def hypergraph(n, r, edges, name="R"):
    sig = Signature([Relation(name, r, True)])
    return Structure(sig, n, {name: edges})


def graph(n, edges, name="E"):
    return hypergraph(n, 2, edges, name)


def empty(signature, n):
    return Structure(signature, n)


# basic operations --------------------------------------------------------

def induced(s, subset):
    """Substructure on ``subset`` relabelled order-preservingly to 1..|subset|."""
    verts = sorted(set(subset))
    for v in verts:
        if v < 1 or v > s.size:
            raise StructureError(f"element {v} out of range 1..{s.size}")
    pos = {v: i + 1 for i, v in enumerate(verts)}
    rels = {}
    for r in s.signature:
        rels[r.name] = [tuple(pos[x] for x in t) for t in s.rel(r.name)
                        if all(x in pos for x in t)]
    return Structure(s.signature, len(verts), rels)


def relabel(s, perm, size=None):
    """Image of ``s`` under the injective map ``perm`` (dict or 1-indexed sequence)."""
    if not isinstance(perm, dict):
        perm = {i + 1: v for i, v in enumerate(perm)}
    size = s.size if size is None else size
    rels = {r.name: [tuple(perm[x] for x in t) for t in s.rel(r.name)] for r in s.signature}
    return Structure(s.signature, size, rels)


def superpose(a, b):
    if a.size != b.size:
        raise StructureError("superposition needs equal sizes")
    sig = a.signature + b.signature
    rels = dict(a.relations)
    rels.update(b.relations)
    return Structure(sig, a.size, rels)


def reduct(s, names):
    sig = s.signature.restrict(names)
    return Structure(sig, s.size, {n: s.rel(n) for n in sig.names()})


def disjoint_union(a, b):
    if a.signature != b.signature:
        raise StructureError("signature mismatch")
    rels = {}
    for r in a.signature:
        rels[r.name] = list(a.rel(r.name)) + [tuple(x + a.size for x in t) for t in b.rel(r.name)]
    return Structure(a.signature, a.size + b.size, rels)


# embeddings ----------------------------------------------------------------

def count_embeddings(H, G, collect=False, limit=0):
    """Count embeddings of H into G.

    Returns ``(count, maps)`` where ``maps`` is a list of tuples
    (``maps[i][j-1]`` is the image of vertex j) when ``collect`` is set,
    else None.  A positive ``limit`` stops the search after that many.
    """
    if H.signature != G.signature:
        raise StructureError("signature mismatch")
    if H.size > G.size:
        return 0, ([] if collect else None)
    count, maps = kernels.search(H, G, limit=limit, collect=collect)
    return count, (maps if collect else None)


def find_embedding(H, G):
    c, maps = count_embeddings(H, G, collect=True, limit=1)
    return maps[0] if c else None


def embeds(H, G):
    return count_embeddings(H, G, limit=1)[0] > 0


def is_embedding(H, G, phi):
    """Direct check of the embedding definition (used for witnesses)."""
    if len(phi) != H.size or len(set(phi)) != H.size:
        return False
    for r in H.signature:
        hs = H.rel(r.name)
        for t in permutations(range(1, H.size + 1), r.arity):
            if r.symmetric and list(t) != sorted(t):
                continue
            if (t in hs) != G.holds(r.name, tuple(phi[x - 1] for x in t)):
                return False
    return True


def automorphism_count(s):
    return count_embeddings(s, s)[0]


# canonical labelling -------------------------------------------------------

def _incidence(s):
    """Per-vertex list of (relation index, position, tuple) occurrences."""
    occ = [[] for _ in range(s.size + 1)]
    for ri, r in enumerate(s.signature):
        for t in s.rel(r.name):
            for p, x in enumerate(t):
                occ[x].append((ri, -1 if r.symmetric else p, t))
    return occ


def _refine(occ, colors):
    """Colour refinement to a stable ordered partition (iso-invariant)."""
    n = len(colors) - 1
    while True:
        sigs = [None] * (n + 1)
        for v in range(1, n + 1):
            around = sorted(
                (ri, p, tuple(sorted(colors[x] for x in t)) if p < 0 else tuple(colors[x] for x in t))
                for ri, p, t in occ[v])
            sigs[v] = (colors[v], tuple(around))
        order = sorted(set(sigs[1:]))
        rank = {sg: i for i, sg in enumerate(order)}
        new = [0] + [rank[sigs[v]] for v in range(1, n + 1)]
        if len(order) == len(set(colors[1:])):
            return new
        colors = new


def _certificate(s, lab):
    """Encoding of s relabelled by lab (lab[v] = new label of v)."""
    out = []
    for r in s.signature:
        if r.symmetric:
            ts = sorted(tuple(sorted(lab[x] for x in t)) for t in s.rel(r.name))
        else:
            ts = sorted(tuple(lab[x] for x in t) for t in s.rel(r.name))
        out.append(tuple(ts))
    return tuple(out)


def _twins(s):
    """twin[v] = smallest w such that the transposition (v w) is an automorphism."""
    n = s.size
    twin = list(range(n + 1))
    for v in range(1, n + 1):
        if twin[v] != v:
            continue
        for w in range(v + 1, n + 1):
            if twin[w] != w:
                continue
            perm = {u: u for u in range(1, n + 1)}
            perm[v], perm[w] = w, v
            if relabel(s, perm) == s:
                twin[w] = v
    return twin


def _canonical_labelling(s):
    n = s.size
    occ = _incidence(s)
    twin = _twins(s)
    best = [None, None]

    def search(colors):
        colors = _refine(occ, colors)
        cells = {}
        for v in range(1, n + 1):
            cells.setdefault(colors[v], []).append(v)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = cells[c]
                break
        if target is None:
            lab = [0] + [colors[v] + 1 for v in range(1, n + 1)]
            cert = _certificate(s, lab)
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, lab
            return
        seen = set()
        for v in target:
            # twins give identical subtrees, one representative is enough
            if twin[v] in seen:
                continue
            seen.add(twin[v])
            # individualize v: it goes before the rest of its cell
            nc = [0] + [2 * colors[u] + (0 if u == v else 1) for u in range(1, n + 1)]
            search(nc)

    search([0] * (n + 1))
    return best[1]


def canonical_form(s):
    """Canonical relabelling: equal for two structures iff they are isomorphic."""
    def compute():
        if s.size == 0:
            return s
        lab = _canonical_labelling(s)
        return relabel(s, {v: lab[v] for v in range(1, s.size + 1)})
    return s.cached("canon", compute)


def canonical_key(s):
    return canonical_form(s).key()


def canonical_string(s):
    """Compact text encoding of the canonical form, used in names."""
    c = canonical_form(s)
    parts = []
    for r in c.signature:
        ts = sorted(c.rel(r.name))
        parts.append(r.name + ":" + ",".join("".join(_digit(x) for x in t) for t in ts))
    return f"n{c.size}|" + "|".join(parts)


def _digit(x):
    return str(x) if x < 10 else "(%d)" % x


def is_isomorphic(a, b):
    if a.signature != b.signature or a.size != b.size:
        return False
    if sorted(len(a.rel(n)) for n in a.signature.names()) != \
            sorted(len(b.rel(n)) for n in b.signature.names()):
        return False
    return canonical_form(a) == canonical_form(b)


def isomorphism(a, b):
    """A map phi with relabel(a, phi) == b, or None."""
    if a.signature != b.signature or a.size != b.size:
        return None
    if a.size == 0:
        return () if a == b else None
    return find_embedding(a, b)


def all_slots(signature, n):
    """Every possible tuple slot on {1..n}: (name, tuple) in a fixed order."""
    slots = []
    for r in signature:
        gen = combinations if r.symmetric else permutations
        for t in gen(range(1, n + 1), r.arity):
            slots.append((r.name, t))
    return slots


def all_structures(signature, n, cap_bits=22):
    """Every labelled structure on {1..n}, in binary counting order."""
    slots = all_slots(signature, n)
    if len(slots) > cap_bits:
        raise StructureError(f"{2 ** len(slots)} labelled structures exceeds the enumeration cap")
    for mask in range(1 << len(slots)):
        rels = {r.name: [] for r in signature}
        for i, (name, t) in enumerate(slots):
            if mask >> i & 1:
                rels[name].append(t)
        yield Structure(signature, n, rels)


def structure_from_slots(signature, n, present):
    rels = {r.name: [] for r in signature}
    for name, t in present:
        rels[name].append(t)
    return Structure(signature, n, rels)
