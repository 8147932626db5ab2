"""Disjoint n-amalgamation problems, failing-problem search, dichotomy witnesses.

Vertex layout of a problem: the base is {1..m}; direction i contributes the
block of new points following the blocks of directions 1..i-1.  A piece for
an index set I lives on the base plus the blocks of I, relabelled
order-preservingly to {1..|piece|}.
"""
from itertools import combinations, permutations

import numpy as np

from . import relstruct as rs
from .relstruct import Structure
from .classes import accepts, members

UNDETERMINED_CAP = 20
EXHAUSTIVE_BITS = 16


class AmalgError(ValueError):
    pass


def proper_subsets(n):
    return [frozenset(c) for size in range(n) for c in combinations(range(1, n + 1), size)]


class AmalgProblem:
    def __init__(self, base, n, pieces, piece_sizes=None, index_family=None):
        self.base = base
        self.n = n
        self.piece_sizes = tuple(piece_sizes or [1] * n)
        if len(self.piece_sizes) != n:
            raise AmalgError("need one piece size per direction")
        fam = index_family if index_family is not None else proper_subsets(n)
        self.index_family = tuple(sorted((frozenset(I) for I in fam), key=lambda I: (len(I), sorted(I))))
        self.pieces = {frozenset(I): p for I, p in pieces.items()}
        self.signature = base.signature

    @property
    def m(self):
        return self.base.size

    @property
    def size(self):
        return self.m + sum(self.piece_sizes)

    def block(self, i):
        start = self.m + sum(self.piece_sizes[:i - 1])
        return list(range(start + 1, start + self.piece_sizes[i - 1] + 1))

    def vertices(self, I):
        out = list(range(1, self.m + 1))
        for i in sorted(I):
            out.extend(self.block(i))
        return out

    def maximal(self):
        fam = self.index_family
        return [I for I in fam if not any(I < J for J in fam)]

    def check(self):
        """Return None when the invariants hold, else a description."""
        fam = set(self.index_family)
        for I in fam:
            for i in I:
                if I - {i} not in fam:
                    return f"index family not downward closed at {sorted(I)}"
            if I not in self.pieces:
                return f"missing piece for {sorted(I)}"
            if self.pieces[I].size != len(self.vertices(I)):
                return f"piece {sorted(I)} has the wrong size"
            if rs.induced(self.pieces[I], range(1, self.m + 1)) != self.base:
                return f"piece {sorted(I)} does not restrict to the base"
        for I in fam:
            vi = self.vertices(I)
            for J in fam:
                if I < J:
                    vj = self.vertices(J)
                    pos = [vj.index(v) + 1 for v in vi]
                    if rs.induced(self.pieces[J], pos) != self.pieces[I]:
                        return f"pieces {sorted(I)} and {sorted(J)} disagree"
        return None

    def restrict(self, s, I):
        return rs.induced(s, self.vertices(I))

    def is_solution(self, s):
        return all(self.restrict(s, I) == self.pieces[I] for I in self.index_family)

    def determined(self):
        """(present tuples over global labels, undetermined slots)."""
        present = set()
        undetermined = []
        maxi = [(set(self.vertices(I)), self.vertices(I), self.pieces[I]) for I in self.maximal()]
        for name, t in rs.all_slots(self.signature, self.size):
            vs = set(t)
            for vset, vlist, piece in maxi:
                if vs <= vset:
                    loc = tuple(vlist.index(x) + 1 for x in t)
                    if piece.holds(name, loc):
                        present.add((name, t))
                    break
            else:
                undetermined.append((name, t))
        return present, undetermined

    def to_json(self):
        return {"base": self.base.to_json(), "n": self.n,
                "piece_sizes": list(self.piece_sizes),
                "index_family": [sorted(I) for I in self.index_family],
                "pieces": [{"index": sorted(I), "vertices": self.vertices(I),
                            "structure": self.pieces[I].to_json()} for I in self.index_family]}

    @classmethod
    def from_json(cls, obj):
        base = Structure.from_json(obj["base"])
        pieces = {frozenset(p["index"]): Structure.from_json(p["structure"]) for p in obj["pieces"]}
        prob = cls(base, obj["n"], pieces, obj.get("piece_sizes"),
                   [frozenset(I) for I in obj["index_family"]])
        msg = prob.check()
        if msg:
            raise AmalgError(msg)
        return prob

    def __eq__(self, other):
        return (isinstance(other, AmalgProblem) and self.base == other.base and self.n == other.n
                and self.piece_sizes == other.piece_sizes and self.index_family == other.index_family
                and self.pieces == other.pieces)


def problem_from_structure(s, m, n, index_family=None):
    """The 1-point problem whose pieces are the restrictions of s (size m+n)."""
    base = rs.induced(s, range(1, m + 1))
    prob = AmalgProblem(base, n, {}, None, index_family)
    prob.pieces = {I: prob.restrict(s, I) for I in prob.index_family}
    return prob


def solve(problem, spec):
    """A class member restricting to every piece, or None."""
    if problem.signature != spec.signature:
        raise AmalgError("signature mismatch")
    present, und = problem.determined()
    if len(und) > UNDETERMINED_CAP:
        raise AmalgError(f"{len(und)} undetermined tuples exceed the cap {UNDETERMINED_CAP}")
    fixed = sorted(present)
    # fewest added relations first
    for size in range(len(und) + 1):
        for extra in combinations(und, size):
            cand = rs.structure_from_slots(problem.signature, problem.size, fixed + list(extra))
            if accepts(spec, cand):
                return cand
    return None


# failing-problem search ----------------------------------------------------

def _one_point_slots(sig, m, n):
    N = m + n
    new = set(range(m + 1, N + 1))
    det, und = [], []
    for name, t in rs.all_slots(sig, N):
        vs = set(t)
        if vs <= set(range(1, m + 1)):
            continue
        (und if new <= vs else det).append((name, t))
    return det, und


def _pieces_ok(spec, s, m, n):
    N = m + n
    for i in range(m + 1, N + 1):
        if not accepts(spec, rs.induced(s, [v for v in range(1, N + 1) if v != i])):
            return False
    return True


def _exhaustive(spec, n, m, det):
    sig = spec.signature
    for A in members(spec, m):
        base_slots = [(r.name, t) for r in sig for t in sorted(A.rel(r.name))]
        for mask in range(1 << len(det)):
            present = base_slots + [det[i] for i in range(len(det)) if mask >> i & 1]
            s = rs.structure_from_slots(sig, m + n, present)
            if not _pieces_ok(spec, s, m, n):
                continue
            prob = problem_from_structure(s, m, n)
            if solve(prob, spec) is None:
                return prob
    return None


def _glue(spec, n, cap):
    """Build a failing problem by placing forbidden copies over the new points.

    Working labels: new points are 1..n, base points n+1, n+2, ...  Each
    completion of the undetermined tuples must contain one of the copies.
    """
    sig = spec.signature
    family = [f for f in spec.forbidden if n <= f.size <= n + cap]
    if not family:
        return None
    new = set(range(1, n + 1))

    def is_u(slot):
        return new <= set(slot[1])

    def placements(f, state, nbase):
        fv = list(range(1, f.size + 1))
        for chosen in permutations(fv, n):
            rest = [v for v in fv if v not in chosen]
            yield from _place_rest(f, chosen, rest, nbase, state)

    def _place_rest(f, chosen, rest, nbase, state):
        psi = {v: i + 1 for i, v in enumerate(chosen)}

        def go(j, used, fresh):
            if j == len(rest):
                yield dict(psi), fresh
                return
            v = rest[j]
            for b in range(n + 1, n + nbase + 1):
                if b not in used:
                    psi[v] = b
                    yield from go(j + 1, used | {b}, fresh)
            if nbase + fresh < cap:
                b = n + nbase + fresh + 1
                psi[v] = b
                yield from go(j + 1, used | {b}, fresh + 1)
            psi.pop(v, None)

        yield from go(0, frozenset(), 0)

    def copy_values(f, psi):
        vals = {}
        for name, t in rs.all_slots(sig, f.size):
            img = tuple(psi[x] for x in t)
            if sig[name].symmetric:
                img = tuple(sorted(img))
            vals[(name, img)] = f.holds(name, t)
        return vals

    def uncovered(copies):
        """An assignment of the U-slots seen so far avoiding every copy, or None."""
        uslots = sorted({s for c in copies for s in c if is_u(s)})
        for mask in range(1 << len(uslots)):
            sigma = {s: bool(mask >> i & 1) for i, s in enumerate(uslots)}
            if not any(all(sigma[s] == v for s, v in c.items() if is_u(s)) for c in copies):
                return sigma
        return None

    def finish(state, nbase):
        m = nbase
        relab = {i: m + i for i in range(1, n + 1)}
        relab.update({n + j: j for j in range(1, m + 1)})
        present = []
        for (name, t), v in state.items():
            if v:
                img = tuple(relab[x] for x in t)
                present.append((name, img))
        s = rs.structure_from_slots(sig, m + n, present)
        if not accepts(spec, rs.induced(s, range(1, m + 1))):
            return None
        if not _pieces_ok(spec, s, m, n):
            return None
        prob = problem_from_structure(s, m, n)
        if solve(prob, spec) is not None:
            return None
        return prob

    def rec(copies, state, nbase, depth):
        sigma = uncovered(copies)
        if sigma is None:
            return finish(state, nbase)
        if depth == 0:
            return None
        for f in family:
            for psi, fresh in placements(f, state, nbase):
                vals = copy_values(f, psi)
                ok = True
                for s, v in vals.items():
                    if is_u(s):
                        if s in sigma and sigma[s] != v:
                            ok = False
                            break
                    elif s in state and state[s] != v:
                        ok = False
                        break
                if not ok:
                    continue
                new_state = dict(state)
                new_state.update({s: v for s, v in vals.items() if not is_u(s)})
                found = rec(copies + [vals], new_state, nbase + fresh, depth - 1)
                if found is not None:
                    return found
        return None

    return rec([], {}, 0, 4)


def find_failing(spec, n, base_size_cap):
    """A 1-point n-problem over a base of size <= cap with no solution, or None."""
    if n < 1:
        raise AmalgError("n must be positive")
    fam = spec.forbidden
    # a forbidden copy in a completion must use every new point
    if not fam or max(f.size for f in fam) < n:
        return None
    smallest = min(f.size for f in fam)
    glued_from = None
    for m in range(base_size_cap + 1):
        if m + n < smallest:
            continue
        det, und = _one_point_slots(spec.signature, m, n)
        if len(und) > UNDETERMINED_CAP:
            break
        if len(det) <= EXHAUSTIVE_BITS:
            prob = _exhaustive(spec, n, m, det)
            if prob is not None:
                return prob
        else:
            glued_from = m
            break
    if glued_from is not None:
        return _glue(spec, n, base_size_cap)
    return None


# dichotomy --------------------------------------------------------------------

class DichotomyWitness:
    def __init__(self, failing, succeeding, matched_on, formula_description, flags, caveat=None):
        self.failing = failing
        self.succeeding = succeeding
        self.matched_on = matched_on
        self.formula_description = formula_description
        self.applicability_flags = flags
        self.caveat = caveat

    def to_json(self):
        out = {"failing": self.failing.to_json(), "succeeding": self.succeeding.to_json(),
               "matched_on": [sorted(I) for I in self.matched_on],
               "formula_description": self.formula_description,
               "applicability_flags": dict(self.applicability_flags),
               "labels": {"F(empty)": "formulas q(x, b) over the succeeding parameters",
                          "O(empty)": "the formula q(x, y) is consistent but nulled"}}
        if self.applicability_flags.get("overlap_certified"):
            out["measure_zero"] = ("q(x, b) has measure zero under every invariant "
                                   "Keisler measure of the limit")
        if self.caveat:
            out["caveat"] = self.caveat
        return out


def _derived_problem(prob):
    """Pieces A_{I ∪ {n}} as an (n-1)-problem over base ∪ {a_n}.

    Returns the problem and the map from its labels to prob's labels.
    """
    m, n = prob.m, prob.n
    an = prob.block(n)[0]
    to_old = {v: v for v in range(1, m + 1)}
    to_old[m + 1] = an
    for i in range(1, n):
        to_old[m + 1 + i] = prob.block(i)[0]
    to_new = {v: k for k, v in to_old.items()}
    whole = rs.structure_from_slots(prob.signature, prob.size, sorted(prob.determined()[0]))
    sub = problem_from_structure(rs.relabel(whole, to_new), m + 1, n - 1)
    return sub, to_old


def _fmt_atom(name, args, positive):
    return ("" if positive else "¬") + f"{name}({','.join(args)})"


def _describe(prob, succ):
    """Render q(x, y) and the two parameter types."""
    m, n = prob.m, prob.n
    x = prob.block(n)[0]
    params = list(range(1, m + 1)) + [prob.block(i)[0] for i in range(1, n)]
    names = {v: f"y{j + 1}" for j, v in enumerate(params)}
    names[x] = "x"
    sig = prob.signature
    atoms, pos_atoms = [], []
    whole = rs.structure_from_slots(sig, prob.size, sorted(prob.determined()[0]))
    for name, t in rs.all_slots(sig, prob.size):
        if x not in t:
            continue
        if not any(set(t) <= set(prob.vertices(I)) for I in prob.index_family if n in I):
            continue
        val = whole.holds(name, t)
        args = [names[v] for v in t]
        atoms.append(_fmt_atom(name, args, val))
        if val:
            pos_atoms.append(set(t) - {x})

    def param_type(p):
        top = p.pieces[frozenset(range(1, n))]
        lab = p.vertices(frozenset(range(1, n)))
        out = []
        for name, t in rs.all_slots(sig, top.size):
            out.append(_fmt_atom(name, [names[lab[i - 1]] for i in t], top.holds(name, t)))
        return out

    fail_t = param_type(prob)
    succ_t = param_type(succ)
    text = "q(x; " + ",".join(names[v] for v in params) + ") = " + " ∧ ".join(atoms)
    lines = [text, "failing parameters: " + " ∧ ".join(fail_t),
             "succeeding parameters: " + " ∧ ".join(succ_t)]
    # plain-language summary for uniform hypergraph signatures
    if len(sig) == 1 and sig.relations[0].symmetric and m == 0:
        r = sig.relations[0].arity
        ps = set(params)
        want = [set(c) for c in combinations(sorted(ps), r - 1)]
        top_succ = succ.pieces[frozenset(range(1, n))]
        if len(ps) == r and all(w in pos_atoms for w in want) and top_succ.num_tuples() == 0:
            group = "pair" if r == 3 else f"{r - 1}-subset"
            bs = "".join(f"b{j + 1}" for j in range(r))
            lines.append(f"succeeding formula: x forms a hyperedge with each {group} "
                         f"from a non-hyperedge {'triple' if r == 3 else 'set'} {bs}")
    return "\n".join(lines)


def dichotomy_witness(spec, n_max=5, base_cap=1, flag_base_cap=2):
    """Witness pair for the first n with a failing 1-point problem, or None."""
    from .overlap import certify_structural

    flags = {"two_dap": find_failing(spec, 2, flag_base_cap) is None,
             "three_dap": find_failing(spec, 3, flag_base_cap) is None}
    arities = [r.arity for r in spec.signature]
    k = max(arities) - 1
    try:
        cert = certify_structural(spec, k)
        flags["overlap_certified"] = cert.verdict == "Certified"
    except ValueError:
        flags["overlap_certified"] = False

    failing = None
    for n in range(2, n_max + 1):
        cap = flag_base_cap if n <= 3 else base_cap
        failing = find_failing(spec, n, cap)
        if failing is not None:
            break
    if failing is None:
        return None

    while True:
        sub, to_old = _derived_problem(failing)
        B = solve(sub, spec)
        if B is not None:
            break
        if sub.n < 2:
            raise AmalgError("derived problem has no one-point extension")
        failing = sub
    full = rs.relabel(B, to_old)
    succeeding = problem_from_structure(full, failing.m, failing.n)
    if solve(failing, spec) is not None or solve(succeeding, spec) is None:
        raise AmalgError("witness re-check failed")
    n = failing.n
    matched = [I for I in failing.index_family if n in I]
    assert all(failing.pieces[I] == succeeding.pieces[I] for I in matched)
    caveat = None
    if not (flags["two_dap"] and flags["three_dap"]):
        caveat = "2-DAP or 3-DAP not verified within caps; the measure statement does not apply"
    return DichotomyWitness(failing, succeeding, matched, _describe(failing, succeeding),
                            flags, caveat)


# n-DAP sampler ------------------------------------------------------------------

class NdapSample:
    def __init__(self, ground, structure, types, seed):
        self.ground = ground
        self.structure = structure
        self.types = types
        self.seed = seed

    def pattern(self):
        return tuple(sorted((tuple(T), tuple(sorted(v))) for T, v in self.types.items()))

    def to_json(self):
        return {"seed": self.seed, "ground": self.ground.to_json(),
                "extended": self.structure.to_json(),
                "types": [{"over": list(T), "present": [[name, list(t)] for name, t in sorted(v)]}
                          for T, v in sorted(self.types.items())]}


def sample_ndap_expansion(spec, ground, seed, base_cap=0):
    """Random quantifier-free type of a new point x over ground."""
    m = ground.size
    for n in range(2, m + 2):
        if find_failing(spec, n, base_cap) is not None:
            raise AmalgError(f"class fails basic {n}-amalgamation; sampler not applicable")
    rng = np.random.default_rng(seed)
    sig = spec.signature
    x = m + 1
    present = [(r.name, t) for r in sig for t in sorted(ground.rel(r.name))]
    types = {}
    top = min(m, sig.max_arity - 1)
    for size in range(1, top + 1):
        for T in combinations(range(1, m + 1), size):
            vs = set(T) | {x}
            slots = [(name, t) for name, t in rs.all_slots(sig, x) if set(t) == vs]
            sub = sorted(vs)
            cands = []
            for mask in range(1 << len(slots)):
                extra = [slots[i] for i in range(len(slots)) if mask >> i & 1]
                s = rs.structure_from_slots(sig, x, present + extra)
                if accepts(spec, rs.induced(s, sub)):
                    cands.append(extra)
            if not cands:
                raise AmalgError(f"no solution for the type over {T}")
            choice = cands[int(rng.integers(len(cands)))]
            present += choice
            types[T] = choice
    s = rs.structure_from_slots(sig, x, present)
    if not accepts(spec, s):
        raise AmalgError("sampled extension left the class")
    return NdapSample(ground, s, types, seed)
