import json
from itertools import combinations

import numpy as np
import pytest

from ovlab import relstruct as rs
from ovlab import catalog as cat
from ovlab import overlap as ov
from ovlab.classes import ClassSpec
from ovlab.crelp import pullback


def test_tetrahedron_certified_by_irreducibility():
    cert = ov.certify_structural(cat.catalog("tet_free"), 2)
    assert cert.verdict == "Certified"
    assert cert.rule == "all_k_plus_1_irreducible"


def test_petal_certified_by_petal_condition():
    spec = cat.catalog("petal_free")
    cert = ov.certify_structural(spec, 2)
    assert cert.verdict == "Certified"
    assert cert.rule == "petal_condition"
    item = cert.evidence[0]
    f = spec.forbidden[0]
    A = set(item["A"])
    tuples = [set(t) for t in f.rel("R")]
    assert A in tuples
    for b, (A0, A1) in item["pairs"].items():
        b = int(b)
        assert b not in A and A0 != A1
        for Ai in (A0, A1):
            assert len(Ai) >= 2 and set(Ai) <= A
            assert any(set(Ai) | {b} <= T for T in tuples)


def test_petal_witness_brute_force():
    # [DERIVED] independent search over every tuple A for structures on <= 5 points
    for n in (4, 5):
        for s in [cat.kminus(3), cat.complete(4, 3), cat.petal(3, 3), cat.petal(4, 3)]:
            if s.size != n:
                continue
            k = 2
            tuples = [frozenset(t) for t in s.rel("R")]

            def ok(A):
                for b in range(1, s.size + 1):
                    if b in A:
                        continue
                    subs = {frozenset(c) for T in tuples if b in T for c in combinations(sorted(T & A), k)}
                    if len(subs) < 2:
                        return False
                return True
            expected = any(len(A) > k and ok(A) for A in tuples)
            assert (ov.petal_witness(s, k) is not None) == expected


def test_empty_family_certified():
    cert = ov.certify_structural(cat.catalog("hypergraphs"), 2)
    assert cert.verdict == "Certified" and cert.rule == "ndap_all_small_n"


def test_unknown_verdicts():
    assert ov.certify_structural(cat.catalog("kaygraph"), 2).verdict == "Unknown"
    sig = cat.hyper_signature(4)
    F = rs.Structure(sig, 6, {"R": [(1, 2, 3, 4), (1, 2, 5, 6), (3, 4, 5, 6)]})
    assert ov.certify_structural(ClassSpec(sig, [F]), 3).verdict == "Unknown"


def test_arity_too_small_rejected():
    with pytest.raises(ov.OverlapError):
        ov.certify_structural(cat.catalog("tet_free"), 3)
    with pytest.raises(ov.OverlapError):
        ov.certify_structural(cat.catalog("linear_orders"), 2)


def test_paste_uses_given_edges():
    H1, H2 = cat.hyperedge(3), cat.empty_hypergraph(3, 3)
    edges = [(1, 2, 3), (3, 4, 5), (5, 6, 7)]
    which, thetas, rels = ov._paste(H1, H2, edges, np.random.default_rng(0))
    assert [sorted(t) for t in thetas] == [list(e) for e in edges]
    expect = {tuple(sorted(t)) for w, t in zip(which, thetas) if w == 0}
    assert {tuple(sorted(t)) for t in rels["R"]} == expect


def test_gap_state_incremental_matches_recount():
    rng = np.random.default_rng(4)
    edges = [(1, 2, 3), (1, 4, 5), (2, 4, 6), (3, 5, 6), (1, 6, 7)]
    which, thetas, _ = ov._paste(cat.hyperedge(3), cat.empty_hypergraph(3, 3), edges, rng)
    Hp = rs.graph(3, [(1, 2)])
    state = ov._GapState(Hp, which, thetas)
    state.reset({s: bool(rng.integers(2)) for s in state.slots})
    for _ in range(30):
        state.flip(state.slots[int(rng.integers(len(state.slots)))])
        G = rs.Structure(Hp.signature, 7, {"E": [t for (n, t), v in state.val.items() if v]})
        N = [0, 0]
        for w, th in zip(which, thetas):
            if pullback(G, th, 3) == Hp:
                N[int(w)] += 1
        assert N == state.N


def test_placement_small_run():
    rep = ov.placement_experiment(cat.catalog("tet_free"), cat.hyperedge(3), cat.empty_hypergraph(3, 3),
                                  2, n_grid=(20,), trials=30, adversary_steps=50, seed=1)
    assert rep.membership_failures == 0
    row = rep.rows[0]
    assert row["completion"] == "ok"
    assert 0.0 <= row["max_observed_gap"] <= 1.0
    assert len(rep.betas) == 4
    # beta = |Aut H'| / 3! over the four graphs on three points
    assert sorted(b["beta"] for b in rep.betas) == sorted([1.0, 2 / 6, 2 / 6, 1.0])
    json.dumps(rep.to_json())


def test_placement_is_deterministic():
    args = (cat.catalog("tet_free"), cat.hyperedge(3), cat.empty_hypergraph(3, 3), 2)
    a = ov.placement_experiment(*args, n_grid=(20,), trials=10, adversary_steps=20, seed=9).to_json()
    b = ov.placement_experiment(*args, n_grid=(20,), trials=10, adversary_steps=20, seed=9).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_linear_orders_completion_fails():
    rep = ov.placement_experiment(cat.catalog("linear_orders"), cat.linear_order(2), cat.linear_order(2),
                                  1, n_grid=(20,), trials=3, adversary_steps=10, seed=0)
    assert rep.completion_failed
    assert rep.certificate["verdict"] == "Unknown"


def test_placement_rejects_nonmember():
    with pytest.raises(ov.OverlapError):
        ov.placement_experiment(cat.catalog("tet_free"), cat.complete(4, 3), cat.complete(4, 3), 2,
                                n_grid=(20,), trials=1)
