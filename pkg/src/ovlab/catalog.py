"""Named structures and classes.

Class references on the command line look like ``catalog:tet_free`` or
``catalog:kaygraph?k=2`` or ``catalog:koponen?I=4,5``.
"""
from itertools import combinations, permutations
from urllib.parse import parse_qsl

from . import relstruct as rs
from .relstruct import Relation, Signature, Structure
from .classes import ClassSpec, ClassError, lift_family


def hyper_signature(r, name=None):
    """Uniform symmetric signature; graphs use E, higher arities R."""
    if name is None:
        name = "E" if r == 2 else "R"
    return Signature([Relation(name, r, True)])


ORDER_SIG = Signature([Relation("L", 2, False)])
KOPONEN_SIG = Signature([Relation("R", 3, False)])


# structures ------------------------------------------------------------------

def _uniform(n, r, edges):
    return Structure(hyper_signature(r), n, {hyper_signature(r).names()[0]: edges})


def complete(n, r):
    if not 1 <= r <= n:
        raise ClassError("complete needs 1 <= r <= n")
    return _uniform(n, r, list(combinations(range(1, n + 1), r)))


def kminus(r):
    """K_{r+1}^r minus one edge; the missing edge is {2, ..., r+1}."""
    if r < 2:
        raise ClassError("kminus needs r >= 2")
    missing = tuple(range(2, r + 2))
    edges = [e for e in combinations(range(1, r + 2), r) if e != missing]
    return _uniform(r + 1, r, edges)


def petal(n, r):
    """Centre 1 forms an edge with every (r-1)-subset of the n leaves 2..n+1."""
    if not 2 < r <= n:
        raise ClassError("petal needs 2 < r <= n")
    edges = [(1,) + c for c in combinations(range(2, n + 2), r - 1)]
    return _uniform(n + 1, r, edges)


def hyperedge(r):
    return _uniform(r, r, [tuple(range(1, r + 1))])


def empty_hypergraph(n, r):
    return _uniform(n, r, [])


def koponen_unrelated(a, b, c, n):
    if len({a, b, c}) < 3:
        return True
    return a == 1 and b > 1 and ((b < n and c == b + 1) or (b == n and c == 2))


def koponen_S(n):
    if n < 1:
        raise ClassError("koponen_S needs n >= 1")
    tuples = [t for t in permutations(range(1, n + 1), 3) if not koponen_unrelated(*t, n)]
    return Structure(KOPONEN_SIG, n, {"R": tuples})


def linear_order(n, perm=None):
    """The order perm[0] < perm[1] < ... (identity by default)."""
    perm = perm or list(range(1, n + 1))
    return Structure(ORDER_SIG, n, {"L": [(perm[i], perm[j]) for i in range(n)
                                          for j in range(i + 1, n)]})


STRUCTURES = {
    "complete": (complete, {"n": 4, "r": 3}),
    "kminus": (kminus, {"r": 3}),
    "petal": (petal, {"n": 4, "r": 3}),
    "koponen_S": (koponen_S, {"n": 4}),
    "hyperedge": (hyperedge, {"r": 3}),
    "empty": (empty_hypergraph, {"n": 3, "r": 3}),
    "order": (linear_order, {"n": 2}),
}


def catalog_structure(name, **params):
    if name not in STRUCTURES:
        raise ClassError(f"unknown structure {name!r}")
    fn, defaults = STRUCTURES[name]
    args = dict(defaults)
    args.update(params)
    return fn(**args)


# classes ------------------------------------------------------------------

def _hypergraphs(r=3):
    return ClassSpec(hyper_signature(r), [])


def _complete_free(n=4, r=3):
    return ClassSpec(hyper_signature(r), [complete(n, r)])


def _kminus_free(r=3):
    return ClassSpec(hyper_signature(r), [kminus(r)])


def _petal_free(n=4, r=3):
    return ClassSpec(hyper_signature(r), [petal(n, r)])


def _edgeless(r=2):
    return ClassSpec(hyper_signature(r), [hyperedge(r)])


def kaygraph_forbidden_labelled(k):
    """All (k+2)-vertex (k+1)-hypergraphs whose edge count parity differs from k."""
    sig = hyper_signature(k + 1)
    return [s for s in rs.all_structures(sig, k + 2)
            if s.num_tuples() % 2 != k % 2]


def _kaygraph(k=2):
    if k < 1:
        raise ClassError("kaygraph needs k >= 1")
    return ClassSpec(hyper_signature(k + 1), kaygraph_forbidden_labelled(k))


def _koponen(I=(4,)):
    if isinstance(I, str):
        I = [int(x) for x in I.split(",") if x.strip()]
    if isinstance(I, int):
        I = [I]
    I = sorted(set(int(x) for x in I))
    if any(x < 4 for x in I):
        raise ClassError("koponen index set must lie in {4, 5, ...}")
    # S_0 forbids relations with repeated entries, already excluded by the
    # injectivity convention, so it contributes nothing.
    return ClassSpec(KOPONEN_SIG, [koponen_S(n) for n in I])


def _linear_orders():
    fam = [Structure(ORDER_SIG, 2, {}),
           Structure(ORDER_SIG, 2, {"L": [(1, 2), (2, 1)]}),
           Structure(ORDER_SIG, 3, {"L": [(1, 2), (2, 3), (3, 1)]})]
    return ClassSpec(ORDER_SIG, fam)


CLASSES = {
    "hypergraphs": (_hypergraphs, {"r": 3}),
    "graphs": (lambda: _hypergraphs(2), {}),
    "complete_free": (_complete_free, {"n": 4, "r": 3}),
    "tet_free": (lambda: _complete_free(4, 3), {}),
    "kminus_free": (_kminus_free, {"r": 3}),
    "petal_free": (_petal_free, {"n": 4, "r": 3}),
    "edgeless": (_edgeless, {"r": 2}),
    "kaygraph": (_kaygraph, {"k": 2}),
    "koponen": (_koponen, {"I": (4,)}),
    "linear_orders": (_linear_orders, {}),
}


def catalog(name, **params):
    if name not in CLASSES:
        raise ClassError(f"unknown class {name!r}")
    fn, defaults = CLASSES[name]
    args = dict(defaults)
    for key, val in params.items():
        if key not in defaults:
            raise ClassError(f"unknown parameter {key!r} for {name}")
        args[key] = val
    spec = fn(**args)
    record = {k: (list(v) if isinstance(v, tuple) else v) for k, v in args.items()}
    spec.catalog = (name, record)
    return spec


def _coerce(v):
    try:
        return int(v)
    except ValueError:
        return v


def parse_reference(ref):
    """'catalog:name?a=1&b=2' -> (name, params)."""
    body = ref[len("catalog:"):] if ref.startswith("catalog:") else ref
    name, _, query = body.partition("?")
    params = {k: _coerce(v) for k, v in parse_qsl(query, keep_blank_values=True)}
    return name, params


def resolve(ref):
    name, params = parse_reference(ref)
    return catalog(name, **params)


def product_class(base, expansion, name=None):
    """Unconstrained superpositions C * C' as a class over L ∪ L'."""
    sig = base.signature + expansion.signature
    fam = lift_family(base.forbidden, sig) + lift_family(expansion.forbidden, sig)
    return ClassSpec(sig, fam, catalog=name, split=base.signature.names())
