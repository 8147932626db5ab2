"""Exact rational linear programming.

``simplex`` solves  max c.x  subject to  A x = b, x >= 0  with a sparse
two-phase tableau over exact rationals, using Bland's rule so it cannot cycle.
``vertex_enumeration`` is the brute-force oracle: it tries every column basis.
"""
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import NamedTuple, Optional

try:  # gmpy2 rationals are much faster than Fraction; results are identical
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction


def to_fraction(v):
    return v if isinstance(v, Fraction) else Fraction(int(v.numerator), int(v.denominator))


class LPError(ValueError):
    pass


class LPResult(NamedTuple):
    status: str            # "optimal" | "infeasible" | "unbounded"
    value: Optional[Fraction]
    x: Optional[list]
    basis: Optional[list] = None


def _q(v):
    if isinstance(v, Fraction):
        return Q(v.numerator, v.denominator)
    return Q(v)


def _frac_rows(rows, b):
    out = []
    for row, rhs in zip(rows, b):
        d = {int(j): _q(v) for j, v in row.items() if v != 0}
        out.append([d, _q(rhs)])
    return out


class _Tableau:
    def __init__(self, rows, basis):
        self.rows = rows          # list of [dict col -> coef, rhs]
        self.basis = basis        # basic column per row
        self.obj = {}             # reduced costs; entering candidates are > 0
        self.value = Q(0)

    def copy(self):
        t = _Tableau([[dict(r), rhs] for r, rhs in self.rows], list(self.basis))
        return t

    def pivot(self, p, q):
        prow, prhs = self.rows[p]
        piv = prow[q]
        if piv != 1:
            prow = {j: v / piv for j, v in prow.items()}
            prhs = prhs / piv
        self.rows[p] = [prow, prhs]
        for i, (row, rhs) in enumerate(self.rows):
            if i == p:
                continue
            f = row.get(q)
            if not f:
                continue
            for j, v in prow.items():
                nv = row.get(j, 0) - f * v
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
            self.rows[i][1] = rhs - f * prhs
        f = self.obj.get(q)
        if f:
            for j, v in prow.items():
                nv = self.obj.get(j, 0) - f * v
                if nv:
                    self.obj[j] = nv
                else:
                    self.obj.pop(j, None)
            self.value += f * prhs
        self.basis[p] = q

    def set_objective(self, c):
        """Reduced costs for maximizing c (dict col -> coef) at the current basis."""
        obj = {j: _q(v) for j, v in c.items() if v}
        value = Q(0)
        for (row, rhs), bj in zip(self.rows, self.basis):
            cb = obj.get(bj, 0)
            if not cb:
                continue
            for j, v in row.items():
                nv = obj.get(j, 0) - cb * v
                if nv:
                    obj[j] = nv
                else:
                    obj.pop(j, None)
            value += cb * rhs
        self.obj = obj
        self.value = value

    def run(self, allowed):
        """Bland's rule iterations; returns 'optimal' or 'unbounded'."""
        while True:
            q = min((j for j, v in self.obj.items() if v > 0 and j in allowed), default=None)
            if q is None:
                return "optimal"
            best = None
            for i, (row, rhs) in enumerate(self.rows):
                a = row.get(q)
                if a is not None and a > 0:
                    key = (rhs / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], q)


class Simplex:
    """Phase one is done once; ``maximize`` can then be called repeatedly."""

    def __init__(self, rows, b, nvars):
        self.nvars = nvars
        trows = _frac_rows(rows, b)
        for r in trows:
            if r[1] < 0:
                r[0] = {j: -v for j, v in r[0].items()}
                r[1] = -r[1]
        m = len(trows)
        for i, r in enumerate(trows):
            r[0][nvars + i] = Q(1)
        tab = _Tableau(trows, [nvars + i for i in range(m)])
        # phase 1: maximize -sum(artificials)
        tab.set_objective({nvars + i: -1 for i in range(m)})
        tab.run(set(range(nvars + m)))
        self.feasible = tab.value == 0
        if not self.feasible:
            return
        # drive artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if tab.basis[i] >= nvars:
                row = tab.rows[i][0]
                q = min((j for j, v in row.items() if j < nvars and v), default=None)
                if q is None:
                    continue
                tab.pivot(i, q)
            keep.append(i)
        tab.rows = [tab.rows[i] for i in keep]
        tab.basis = [tab.basis[i] for i in keep]
        for row, _ in tab.rows:
            for j in [j for j in row if j >= nvars]:
                del row[j]
        self.start = tab

    def maximize(self, c):
        if not isinstance(c, dict):
            c = {j: v for j, v in enumerate(c) if v}
        if not self.feasible:
            return LPResult("infeasible", None, None)
        tab = self.start.copy()
        tab.set_objective(c)
        status = tab.run(set(range(self.nvars)))
        if status == "unbounded":
            return LPResult("unbounded", None, None)
        x = [Fraction(0)] * self.nvars
        for (row, rhs), bj in zip(tab.rows, tab.basis):
            x[bj] = to_fraction(rhs)
        return LPResult("optimal", to_fraction(tab.value), x, list(tab.basis))


def simplex(c, rows, b, nvars):
    """Maximize c.x over {x >= 0 : rows . x = b}.

    ``rows`` are dicts column -> coefficient; ``c`` is a dict or sequence.
    """
    return Simplex(rows, b, nvars).maximize(c)


# oracle ------------------------------------------------------------------------

def _solve_square(cols, rows, b):
    """Unique solution of the square system restricted to cols, or None."""
    n = len(cols)
    mat = [[Fraction(r.get(j, 0)) for j in cols] + [Fraction(bi)] for r, bi in zip(rows, b)]
    piv_rows = []
    r0 = 0
    for cidx in range(n):
        p = next((i for i in range(r0, len(mat)) if mat[i][cidx] != 0), None)
        if p is None:
            return None
        mat[r0], mat[p] = mat[p], mat[r0]
        pv = mat[r0][cidx]
        mat[r0] = [v / pv for v in mat[r0]]
        for i in range(len(mat)):
            if i != r0 and mat[i][cidx] != 0:
                f = mat[i][cidx]
                mat[i] = [a - f * bb for a, bb in zip(mat[i], mat[r0])]
        piv_rows.append(r0)
        r0 += 1
    if any(mat[i][-1] != 0 for i in range(r0, len(mat))):
        return None
    return [mat[i][-1] for i in range(n)]


def independent_rows(rows, b, nvars):
    """A maximal linearly independent subset of the equations (consistent ones)."""
    basis = []       # reduced rows as dense lists with their pivot
    chosen = []
    for idx, (r, bi) in enumerate(zip(rows, b)):
        vec = [Fraction(r.get(j, 0)) for j in range(nvars)] + [Fraction(bi)]
        for piv, bv in basis:
            if vec[piv]:
                f = vec[piv]
                vec = [a - f * c for a, c in zip(vec, bv)]
        piv = next((j for j in range(nvars) if vec[j]), None)
        if piv is None:
            if vec[-1]:
                return None
            continue
        pv = vec[piv]
        basis.append((piv, [v / pv for v in vec]))
        chosen.append(idx)
    return chosen


def feasible_vertices(rows, b, nvars, cap=2_000_000):
    """Every basic feasible solution, by trying every column basis.

    Returns None when the equations are inconsistent.
    """
    keep = independent_rows(rows, b, nvars)
    if keep is None:
        return None
    rows = [rows[i] for i in keep]
    b = [b[i] for i in keep]
    rank = len(rows)
    if comb(nvars, rank) > cap:
        raise LPError(f"{comb(nvars, rank)} candidate bases exceed the oracle cap")
    out = []
    for cols in combinations(range(nvars), rank):
        sol = _solve_square(list(cols), rows, b)
        if sol is None or any(v < 0 for v in sol):
            continue
        x = [Fraction(0)] * nvars
        for j, v in zip(cols, sol):
            x[j] = v
        out.append(x)
    return out


def best_vertex(c, vertices):
    if not isinstance(c, dict):
        c = {j: v for j, v in enumerate(c) if v}
    best = None
    for x in vertices:
        val = sum(Fraction(v) * x[j] for j, v in c.items())
        if best is None or val > best[0]:
            best = (val, x)
    if best is None:
        return LPResult("infeasible", None, None)
    return LPResult("optimal", best[0], best[1])


def vertex_enumeration(c, rows, b, nvars, cap=2_000_000):
    """Optimum of max c.x by trying every basis; the brute-force oracle.

    Only meaningful for bounded feasible regions (it never reports unbounded).
    """
    verts = feasible_vertices(rows, b, nvars, cap)
    return best_vertex(c, verts or [])


def check_feasible(x, rows, b):
    """Exact re-check of A x = b and x >= 0."""
    if any(v < 0 for v in x):
        return False
    return all(sum(Fraction(v) * x[j] for j, v in r.items()) == bi for r, bi in zip(rows, b))
