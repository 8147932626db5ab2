from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings

from ovlab import relstruct as rs
from ovlab import catalog as cat
from ovlab import kaygraph as kg
from ovlab.classes import members

import oracles


@settings(max_examples=80, deadline=None)
@given(oracles.structures(sig=cat.hyper_signature(2), max_size=6))
def test_reduct_matches_parity_oracle(H):
    G = kg.reduct_map(H)
    expect = oracles.parity_reduct_edges(H.size, 2, [tuple(t) for t in H.rel("E")])
    assert sorted(G.rel("R")) == sorted(expect)
    assert kg.is_kaygraph(G)


@settings(max_examples=40, deadline=None)
@given(oracles.structures(sig=cat.hyper_signature(3), max_size=6))
def test_reduct_of_3_uniform_is_4_kaygraph(H):
    G = kg.reduct_map(H)
    assert G.signature.max_arity == 4
    assert kg.is_kaygraph(G, 3)


@pytest.mark.parametrize("k, l", [(2, 3), (2, 4), (2, 5), (2, 6), (3, 4), (3, 5)])
def test_hypergraphing_counts_exhaustive(k, l):
    buckets = kg.hypergraphings_by_reduct(l, k)
    assert len(buckets) == 2 ** comb(l, k) // 2 ** comb(l - 1, k - 1)
    for G, Hs in buckets.items():
        assert len(Hs) == 2 ** comb(l - 1, k - 1)
        got = kg.hypergraphings(G, k)
        assert sorted(h.key() for h in got) == sorted(h.key() for h in Hs)


def test_preimage_oracle_on_a_few_kaygraphs():
    for G in members(cat.catalog("kaygraph"), 4) + members(cat.catalog("kaygraph"), 5):
        assert oracles.preimage_count(G, 2) == len(kg.hypergraphings(G, 2)) == 2 ** comb(G.size - 1, 1)


def test_non_kaygraph_rejected():
    bad = rs.hypergraph(4, 3, [(1, 2, 3)])
    assert not kg.is_kaygraph(bad)
    with pytest.raises(kg.KayGraphError):
        kg.hypergraphings(bad, 2)


def test_small_sizes_fall_back_to_all_structures():
    G = cat.empty_hypergraph(2, 3)
    assert len(kg.hypergraphings(G, 2)) == 2


def test_rho():
    assert kg.rho(3, 2) == Fraction(1, 4)
    assert kg.rho(4, 3) == Fraction(1, 8)
    with pytest.raises(kg.KayGraphError):
        kg.rho(2, 2)


def test_fixed_fraction_is_quarter_on_all_small_two_graphs():
    A, Astar = cat.hyperedge(3), cat.complete(3, 2)
    for n in range(3, 7):
        for B in members(cat.catalog("kaygraph"), n):
            if not rs.embeds(A, B):
                continue
            rep = kg.keisler_fraction(A, Astar, B, "fixed")
            assert rep["probability"] == Fraction(1, 4)


def test_all_embedding_mode_is_uniform():
    B = members(cat.catalog("kaygraph"), 5)[-1]
    A = cat.hyperedge(3)
    if not rs.embeds(A, B):
        A = cat.empty_hypergraph(3, 3)
    for Astar in kg.hypergraphings(A, 2):
        rep = kg.keisler_fraction(A, Astar, B, "all")
        assert rep["uniform"]
        assert rep["mean_ratio"] == Fraction(1, 4)


def test_fraction_brute_force():
    # direct count: fraction of hypergraphings of B whose pullback at phi equals A*
    B = members(cat.catalog("kaygraph"), 4)[1]
    A = rs.induced(B, [1, 2, 3])
    Astar = kg.hypergraphings(A, 2)[0]
    rep = kg.keisler_fraction(A, Astar, B, "fixed")
    phi = rs.find_embedding(A, B)
    hits = 0
    Bstars = [h for h in oracles.labelled_structures(cat.hyper_signature(2), 4)
              if sorted(oracles.parity_reduct_edges(4, 2, list(h.rel("E")))) == sorted(B.rel("R"))]
    for h in Bstars:
        pulled = [(a, b) for a, b in [(1, 2), (1, 3), (2, 3)] if tuple(sorted((phi[a - 1], phi[b - 1]))) in h.rel("E")]
        if sorted(pulled) == sorted(Astar.rel("E")):
            hits += 1
    assert rep["probability"] == Fraction(hits, len(Bstars))


def test_bad_fraction_inputs():
    A = cat.hyperedge(3)
    with pytest.raises(kg.KayGraphError):
        kg.keisler_fraction(A, cat.empty_hypergraph(3, 2), members(cat.catalog("kaygraph"), 4)[-1])
    with pytest.raises(kg.KayGraphError):
        kg.keisler_fraction(A, cat.complete(3, 2), cat.empty_hypergraph(4, 3))


def test_expected_count():
    # [DERIVED] 2^C(2,1) * 10*9*8 / 2^C(3,2)
    assert kg.expected_count(10, 3, 2) == 360
    rng = np.random.default_rng(0)
    X = kg.random_hypergraph(8, 2, rng)
    assert X.size == 8 and X.signature == cat.hyper_signature(2)


def test_concentration_small_run():
    rep = kg.concentration_experiment(2, cat.hyperedge(3), (10, 20), trials=5, seed=2)
    assert rep["rho"] == "1/4" and rep["hypergraphings_of_A"] == 4
    assert [r["n"] for r in rep["rows"]] == [10, 20]
    again = kg.concentration_experiment(2, cat.hyperedge(3), (10, 20), trials=5, seed=2)
    assert again == rep


def test_concentration_zero_trials():
    rep = kg.concentration_experiment(2, cat.hyperedge(3), (10,), trials=0)
    assert "envelope_c_f" not in rep
    assert rep["rows"][0]["E"] == "360"
