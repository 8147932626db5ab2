"""Hereditary classes given by finite forbidden families."""
from functools import lru_cache
from itertools import combinations, permutations
from math import factorial
from typing import NamedTuple, Optional

from . import relstruct as rs
from .relstruct import Structure, Signature, StructureError


class ClassError(ValueError):
    pass


class MembershipResult(NamedTuple):
    accepted: bool
    witness: Optional[tuple] = None  # (forbidden index, embedding)


def minimize_forbidden(family):
    """Drop isomorphic duplicates and members that embed a smaller member."""
    reps = {}
    for f in family:
        msg = rs.validate(f)
        if msg:
            raise ClassError(f"invalid forbidden structure: {msg}")
        c = rs.canonical_form(f)
        reps.setdefault(c.key(), c)
    ordered = [reps[k] for k in sorted(reps)]
    kept = []
    for f in ordered:
        if not any(g.size < f.size and rs.embeds(g, f) for g in kept):
            kept.append(f)
    return kept


class ClassSpec:
    """Forb(family) over a signature, with optional catalog provenance.

    ``split`` optionally names the base part L of a signature L ∪ L'.
    """

    def __init__(self, signature, forbidden=(), catalog=None, split=None, minimize=True):
        if not isinstance(signature, Signature):
            signature = Signature(signature)
        self.signature = signature
        for f in forbidden:
            if f.signature != signature:
                raise ClassError("forbidden structure over a different signature")
        self.forbidden = tuple(minimize_forbidden(forbidden) if minimize else forbidden)
        self.catalog = catalog
        self.split = tuple(split) if split is not None else None

    @property
    def size_cap_of_forbidden(self):
        return max((f.size for f in self.forbidden), default=0)

    def __eq__(self, other):
        return (isinstance(other, ClassSpec) and self.signature == other.signature
                and self.forbidden == other.forbidden)

    def __hash__(self):
        return hash((self.signature, self.forbidden))

    def __repr__(self):
        tag = f" catalog={self.catalog[0]}" if self.catalog else ""
        return f"ClassSpec({self.signature!r}, {len(self.forbidden)} forbidden{tag})"

    def to_json(self):
        out = {"signature": self.signature.to_json(),
               "forbidden": [f.to_json() for f in self.forbidden]}
        if self.catalog:
            out["catalog"] = {"name": self.catalog[0], "params": dict(self.catalog[1])}
        if self.split is not None:
            out["split"] = list(self.split)
        return out

    @classmethod
    def from_json(cls, obj):
        sig = Signature(obj["signature"])
        fam = [Structure.from_json(f) for f in obj.get("forbidden", [])]
        cat = obj.get("catalog")
        if cat:
            cat = (cat["name"], dict(cat.get("params", {})))
        return cls(sig, fam, catalog=cat, split=obj.get("split"))


def contains(spec, a):
    if a.signature != spec.signature:
        raise ClassError("signature mismatch")
    for i, f in enumerate(spec.forbidden):
        if f.size > a.size:
            continue
        phi = rs.find_embedding(f, a)
        if phi is not None:
            return MembershipResult(False, (i, phi))
    return MembershipResult(True, None)


def accepts(spec, a):
    return contains(spec, a).accepted


def is_k_irreducible(a, k):
    if k < 1 or k > a.size:
        raise ClassError(f"k={k} out of range 1..{a.size}")
    covered = set()
    for r in a.signature:
        if r.arity < k:
            continue
        for t in a.rel(r.name):
            covered.update(combinations(sorted(t), k))
    return all(c in covered for c in combinations(range(1, a.size + 1), k))


def has_free_amalgamation(spec):
    for f in spec.forbidden:
        if f.size < 2:
            continue
        if not is_k_irreducible(f, 2):
            return False
    return True


def free_amalgam(b0, b1, m):
    """Disjoint union of b0 and b1 over their common first m vertices."""
    n0 = b0.size
    rels = {}
    for r in b0.signature:
        shifted = [tuple(x if x <= m else x - m + n0 for x in t) for t in b1.rel(r.name)]
        rels[r.name] = list(b0.rel(r.name)) + shifted
    return Structure(b0.signature, n0 + b1.size - m, rels)


# enumeration -----------------------------------------------------------------

LABELLED_CAP_BITS = 20


def count_labelled(spec, n):
    """Exact number of labelled members on {1..n} (exhaustive)."""
    slots = rs.all_slots(spec.signature, n)
    if len(slots) > LABELLED_CAP_BITS:
        raise ClassError(f"count_labelled cap exceeded ({len(slots)} slots)")
    count = sum(1 for s in rs.all_structures(spec.signature, n) if accepts(spec, s))
    m = len(spec.signature)
    k = spec.signature.max_arity
    assert count <= 2 ** (m * n ** k)
    return count


def _extensions(s, signature):
    """All one-point extensions of s (new vertex s.size+1)."""
    n = s.size + 1
    slots = [(name, t) for name, t in rs.all_slots(signature, n) if n in t]
    base = [(r.name, t) for r in signature for t in s.rel(r.name)]
    for mask in range(1 << len(slots)):
        present = base + [slots[i] for i in range(len(slots)) if mask >> i & 1]
        yield rs.structure_from_slots(signature, n, present)


@lru_cache(maxsize=None)
def members(spec, n):
    """Isomorphism representatives (canonical forms) of members of size n."""
    if n == 0:
        e = Structure(spec.signature, 0)
        return (e,) if accepts(spec, e) else ()
    found = {}
    for s in members(spec, n - 1):
        for t in _extensions(s, spec.signature):
            c = rs.canonical_form(t)
            k = c.key()
            if k not in found and accepts(spec, c):
                found[k] = c
    return tuple(found[k] for k in sorted(found))


def all_labellings(s):
    """All distinct relabellings of s."""
    out = {}
    for p in permutations(range(1, s.size + 1)):
        t = rs.relabel(s, p)
        out[t.key()] = t
    return [out[k] for k in sorted(out)]


def labelled_count(s):
    return factorial(s.size) // rs.automorphism_count(s)


def lift_family(family, signature):
    """Forbid L-structures inside an L*-class: all L*-expansions of each member."""
    out = []
    for f in family:
        rest = Signature([r for r in signature if r.name not in f.signature])
        for e in rs.all_structures(rest, f.size):
            combined = rs.superpose(f, e)
            out.append(rs.Structure(signature, f.size, combined.relations))
    return out


# Exc -----------------------------------------------------------------------

def _split(cstar, l_names=None):
    if l_names is None:
        l_names = cstar.split
    if l_names is None:
        raise ClassError("signature split L ∪ L' not declared")
    l_names = list(l_names)
    lp = [n for n in cstar.signature.names() if n not in set(l_names)]
    return l_names, lp


@lru_cache(maxsize=None)
def _reduct_keys(cstar, names, m):
    return frozenset(rs.canonical_key(rs.reduct(s, names)) for s in members(cstar, m))


def exc_membership(cstar, a_prime, l_names=None):
    """a' ∈ Exc(C*): A * a' ∈ C* for every A ∈ C*↾L of the same size."""
    l_names, lp = _split(cstar, l_names)
    m = a_prime.size
    if rs.canonical_key(a_prime) not in _reduct_keys(cstar, tuple(lp), m):
        return False
    lsig = cstar.signature.restrict(l_names)
    lkeys = _reduct_keys(cstar, tuple(l_names), m)
    for a in rs.all_structures(lsig, m):
        if rs.canonical_key(a) not in lkeys:
            continue
        s = rs.superpose(a, a_prime)
        s = Structure(cstar.signature, m, s.relations)
        if not accepts(cstar, s):
            return False
    return True


def exc_forbidden(cstar, size_cap, l_names=None):
    """Minimal non-members of Exc(C*) with at most size_cap vertices."""
    l_names, lp = _split(cstar, l_names)
    lpsig = cstar.signature.restrict(lp)
    everything = ClassSpec(lpsig)
    bad = []
    for m in range(1, size_cap + 1):
        for a in members(everything, m):
            if exc_membership(cstar, a, l_names):
                continue
            if all(exc_membership(cstar, rs.induced(a, [v for v in range(1, m + 1) if v != x]), l_names)
                   for x in range(1, m + 1)):
                bad.append(a)
    return minimize_forbidden(bad)
