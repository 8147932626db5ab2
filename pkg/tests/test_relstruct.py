import json

import pytest
from hypothesis import given, settings, strategies as st

from ovlab import relstruct as rs
from ovlab import kernels
from ovlab import catalog as cat

import oracles


@settings(max_examples=150, deadline=None)
@given(oracles.structure_pairs())
def test_count_embeddings_matches_brute_force(pair):
    H, G = pair
    c, maps = rs.count_embeddings(H, G, collect=True)
    brute = oracles.embeddings(H, G)
    assert c == len(brute)
    assert sorted(maps) == sorted(brute)


@settings(max_examples=80, deadline=None)
@given(oracles.structure_pairs())
def test_backends_agree(pair):
    H, G = pair
    if H.size > G.size:
        return
    results = {b: kernels.search(H, G, collect=True, backend=b) for b in kernels.available()}
    counts = {b: r[0] for b, r in results.items()}
    assert len(set(counts.values())) == 1, counts
    maps = [sorted(r[1]) for r in results.values()]
    assert all(m == maps[0] for m in maps)


@settings(max_examples=100, deadline=None)
@given(oracles.structures(max_size=5), st.randoms(use_true_random=False))
def test_canonical_form_invariant_under_relabelling(s, rnd):
    perm = list(range(1, s.size + 1))
    rnd.shuffle(perm)
    t = rs.relabel(s, perm)
    assert rs.canonical_form(s) == rs.canonical_form(t)
    assert rs.canonical_string(s) == rs.canonical_string(t)
    assert rs.is_isomorphic(s, t)


@settings(max_examples=100, deadline=None)
@given(oracles.structure_pairs(max_small=4, max_big=4))
def test_canonical_form_separates_non_isomorphic(pair):
    a, b = pair
    if a.size != b.size:
        return
    same = oracles.canonical_code(a) == oracles.canonical_code(b)
    assert (rs.canonical_form(a) == rs.canonical_form(b)) == same
    assert rs.is_isomorphic(a, b) == same


@settings(max_examples=60, deadline=None)
@given(oracles.structures(max_size=5))
def test_automorphism_count(s):
    assert rs.automorphism_count(s) == oracles.automorphisms(s)


@settings(max_examples=60, deadline=None)
@given(oracles.structures(max_size=5))
def test_json_round_trip(s):
    text = json.dumps(s.to_json())
    assert rs.Structure.from_json(json.loads(text)) == s
    assert rs.validate(s) is None


@settings(max_examples=60, deadline=None)
@given(oracles.structures(min_size=1, max_size=5), st.data())
def test_induced_and_embedding_witness(s, data):
    sub = data.draw(st.sets(st.integers(1, s.size), min_size=1))
    A = rs.induced(s, sub)
    phi = sorted(sub)
    assert rs.is_embedding(A, s, phi)
    assert rs.embeds(A, s)


def test_isomorphism_map_relabels():
    p = cat.petal(4, 3)
    q = rs.relabel(p, [5, 3, 1, 2, 4])
    phi = rs.isomorphism(p, q)
    assert rs.relabel(p, phi) == q


@pytest.mark.parametrize("obj, fragment", [
    ({"signature": [{"name": "R", "arity": 3, "symmetric": True}], "size": 3,
      "relations": {"R": [[1, 2]]}}, "arity"),
    ({"signature": [{"name": "R", "arity": 2, "symmetric": False}], "size": 3,
      "relations": {"R": [[1, 1]]}}, "repeated"),
    ({"signature": [{"name": "R", "arity": 2, "symmetric": False}], "size": 2,
      "relations": {"R": [[1, 3]]}}, "out of range"),
    ({"signature": [{"name": "R", "arity": 2, "symmetric": True}], "size": 2,
      "relations": {"R": [[1, 2], [2, 1]]}}, "duplicate"),
    ({"signature": [{"name": "R", "arity": 2}, {"name": "R", "arity": 3}], "size": 2,
      "relations": {}}, "duplicate relation"),
])
def test_malformed_json_rejected(obj, fragment):
    with pytest.raises(rs.StructureError, match=fragment):
        rs.Structure.from_json(obj)


def test_signature_mismatch():
    with pytest.raises(rs.StructureError):
        rs.count_embeddings(cat.hyperedge(3), cat.complete(3, 2))


def test_all_structures_count():
    sig = rs.Signature([rs.Relation("L", 2, False)])
    assert sum(1 for _ in rs.all_structures(sig, 3)) == 2 ** 6
