import json

import pytest
from hypothesis import given, settings

from ovlab import relstruct as rs
from ovlab import catalog as cat
from ovlab import classes as cl

import oracles


def test_catalog_structures():
    assert len(cat.complete(4, 3).rel("R")) == 4
    assert len(cat.kminus(3).rel("R")) == 3
    assert len(cat.petal(4, 3).rel("R")) == 6
    S4 = cat.koponen_S(4)
    assert 4 * 3 * 2 - len(S4.rel("R")) == 3


def test_koponen_structures_do_not_embed():
    for n in (4, 5):
        a, b = cat.koponen_S(n), cat.koponen_S(n + 1)
        assert not rs.embeds(a, b)
        assert oracles.count(a, b) == 0


def test_free_amalgamation_flags():
    assert cl.has_free_amalgamation(cat.catalog("tet_free"))
    assert cl.has_free_amalgamation(cat.catalog("hypergraphs"))
    assert not cl.has_free_amalgamation(cat.catalog("kaygraph"))
    assert not cl.has_free_amalgamation(cat.catalog("linear_orders"))


def test_contains_reports_identity_embedding_of_tetrahedron():
    res = cl.contains(cat.catalog("tet_free"), cat.complete(4, 3))
    assert not res.accepted
    idx, phi = res.witness
    assert idx == 0
    assert rs.is_embedding(cat.complete(4, 3), cat.complete(4, 3), phi)


@pytest.mark.parametrize("name", ["tet_free", "kminus_free", "kaygraph", "linear_orders", "petal_free"])
def test_membership_matches_brute_force(name):
    spec = cat.catalog(name)
    sig = spec.signature
    n = 4 if sig.max_arity == 3 else 3
    for s in oracles.labelled_structures(sig, n):
        assert cl.accepts(spec, s) == oracles.member(spec.forbidden, s)


@settings(max_examples=60, deadline=None)
@given(oracles.structures(sig=cat.hyper_signature(3), max_size=5))
def test_membership_property(s):
    spec = cat.catalog("tet_free")
    res = cl.contains(spec, s)
    assert res.accepted == oracles.member(spec.forbidden, s)
    if not res.accepted:
        idx, phi = res.witness
        assert rs.is_embedding(spec.forbidden[idx], s, phi)


def test_minimize_forbidden_drops_non_minimal():
    point = cat.empty_hypergraph(1, 3)
    bigger = rs.disjoint_union(cat.kminus(3), point)
    fam = cl.minimize_forbidden([bigger, cat.kminus(3), rs.relabel(cat.kminus(3), [2, 1, 3, 4])])
    assert len(fam) == 1
    assert rs.is_isomorphic(fam[0], cat.kminus(3))
    # embeddings reflect non-edges, so K4^3 does not contain K4^- and both stay
    assert len(cl.minimize_forbidden([cat.complete(4, 3), cat.kminus(3)])) == 2


@pytest.mark.parametrize("name, n", [("tet_free", 4), ("kaygraph", 4), ("linear_orders", 3), ("graphs", 3)])
def test_members_are_iso_classes(name, n):
    spec = cat.catalog(name)
    reps = cl.members(spec, n)
    codes = {oracles.canonical_code(s) for s in oracles.labelled_structures(spec.signature, n)
             if oracles.member(spec.forbidden, s)}
    assert len(reps) == len(codes)
    labelled = sum(cl.labelled_count(r) for r in reps)
    assert labelled == cl.count_labelled(spec, n)


def test_member_counts():
    # [DERIVED] brute-force counts frozen from the oracle above
    assert len(cl.members(cat.catalog("linear_orders"), 3)) == 1
    assert cl.count_labelled(cat.catalog("linear_orders"), 3) == 6
    assert len(cl.members(cat.catalog("graphs"), 4)) == 11
    assert cl.count_labelled(cat.catalog("tet_free"), 4) == 15


def test_k_irreducible():
    assert cl.is_k_irreducible(cat.complete(4, 3), 3)
    assert not cl.is_k_irreducible(cat.kminus(3), 3)
    assert cl.is_k_irreducible(cat.kminus(3), 2)


def test_class_json_round_trip():
    spec = cat.catalog("petal_free")
    back = cl.ClassSpec.from_json(json.loads(json.dumps(spec.to_json())))
    assert back == spec
    assert back.catalog == ("petal_free", {"n": 4, "r": 3})


def test_catalog_reference_parsing():
    spec = cat.resolve("catalog:kaygraph?k=3")
    assert spec.signature.max_arity == 4
    with pytest.raises(cl.ClassError):
        cat.resolve("catalog:nosuch")
    with pytest.raises(cl.ClassError):
        cat.resolve("catalog:tet_free?n=5")


def test_exc_of_graph_expansions_of_kminus_free():
    # an unconstrained expansion excludes nothing
    cstar = cat.product_class(cat.catalog("kminus_free"), cat.catalog("graphs"))
    assert list(cl.exc_forbidden(cstar, 3)) == []


def test_exc_membership_brute():
    # C* = hypergraphs x graphs with no triangle lying on a hyperedge
    sig = cat.hyper_signature(3) + cat.hyper_signature(2)
    bad = rs.Structure(sig, 3, {"R": [(1, 2, 3)], "E": [(1, 2), (1, 3), (2, 3)]})
    cstar = cl.ClassSpec(sig, [bad], split=["R"])
    fam = cl.exc_forbidden(cstar, 3)
    assert [rs.canonical_string(f) for f in fam] == ["n3|E:12,13,23"]
    # oracle: a' is excluded iff some base hypergraph on its vertices clashes
    for a in oracles.labelled_structures(cat.hyper_signature(2), 3):
        clash = any(not oracles.member([bad], rs.Structure(sig, 3, {**h.relations, **a.relations}))
                    for h in oracles.labelled_structures(cat.hyper_signature(3), 3))
        assert cl.exc_membership(cstar, a) == (not clash)
