from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ovlab import exactlp


@st.composite
def bounded_lps(draw):
    """Equality LPs with a normalisation row so every feasible region is a polytope."""
    n = draw(st.integers(1, 6))
    m = draw(st.integers(0, 3))
    coef = st.integers(-3, 3)
    rows = [{j: v for j, v in enumerate(draw(st.lists(coef, min_size=n, max_size=n))) if v}
            for _ in range(m)]
    b = draw(st.lists(st.integers(-4, 4), min_size=m, max_size=m))
    rows.append({j: 1 for j in range(n)})
    b.append(draw(st.integers(0, 5)))
    c = draw(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=4), min_size=n, max_size=n))
    return c, rows, b, n


@settings(max_examples=300, deadline=None)
@given(bounded_lps())
def test_simplex_matches_vertex_enumeration(lp):
    c, rows, b, n = lp
    got = exactlp.simplex(c, rows, b, n)
    ref = exactlp.vertex_enumeration(c, rows, b, n)
    assert got.status == ref.status
    if ref.status == "optimal":
        assert got.value == ref.value
        assert exactlp.check_feasible(got.x, rows, b)
        assert sum(Fraction(ci) * xi for ci, xi in zip(c, got.x)) == got.value


def test_values_are_fractions():
    res = exactlp.simplex([1, 1], [{0: 3, 1: 1}, {0: 1, 1: 3}], [1, 1], 2)
    assert res.status == "optimal"
    assert res.value == Fraction(1, 2)
    assert all(isinstance(v, Fraction) for v in res.x)


def test_unbounded_and_infeasible():
    assert exactlp.simplex([1, 0], [{0: 1, 1: -1}], [0], 2).status == "unbounded"
    assert exactlp.simplex([1], [{0: 1}], [-1], 1).status == "infeasible"
    assert exactlp.simplex([1, 1], [{0: 1, 1: 1}, {0: 1, 1: 1}], [1, 2], 2).status == "infeasible"


def test_redundant_rows_dropped():
    rows = [{0: 1, 1: 1}, {0: 2, 1: 2}, {0: 1, 1: -1}]
    res = exactlp.simplex([0, 1], rows, [2, 4, 0], 2)
    assert res.value == 1 and res.x == [1, 1]


def test_degenerate_cycling_example():
    # Beale's example in equality form; Bland's rule must terminate
    rows = [{0: Fraction(1, 4), 1: -60, 2: Fraction(-1, 25), 3: 9, 4: 1},
            {0: Fraction(1, 2), 1: -90, 2: Fraction(-1, 50), 3: 3, 5: 1},
            {2: 1, 6: 1}]
    c = {0: Fraction(3, 4), 1: -150, 2: Fraction(1, 50), 3: -6}
    res = exactlp.simplex(c, rows, [0, 0, 1], 7)
    assert res.value == Fraction(1, 20)
    assert exactlp.vertex_enumeration(c, rows, [0, 0, 1], 7).value == Fraction(1, 20)


def test_repeated_maximize_reuses_phase_one():
    solver = exactlp.Simplex([{0: 1, 1: 1, 2: 1}], [1], 3)
    assert solver.maximize([1, 2, 3]).value == 3
    assert solver.maximize([3, 2, 1]).value == 3
    assert solver.maximize([-1, -2, -3]).value == -1


def test_oracle_cap():
    rows = [{j: 1 for j in range(30)}] + [{j: 1, j + 1: -1} for j in range(14)]
    with pytest.raises(exactlp.LPError):
        exactlp.vertex_enumeration([1] * 30, rows, [1] + [0] * 14, 30, cap=1000)
