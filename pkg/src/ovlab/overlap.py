"""Overlap closedness: structural certificates and the random placement experiment."""
from itertools import combinations
from math import factorial

import numpy as np

from . import relstruct as rs
from . import steiner
from .classes import ClassSpec, accepts, contains, has_free_amalgamation, is_k_irreducible, members, all_labellings


class OverlapError(ValueError):
    pass


RULES = ("all_k_plus_1_irreducible", "petal_condition", "k_irreducible_bounded",
         "ndap_all_small_n", "mixed")


class OverlapCertificate:
    def __init__(self, verdict, rule, k, evidence):
        self.verdict = verdict
        self.rule = rule
        self.k = k
        self.evidence = evidence

    def to_json(self):
        return {"verdict": self.verdict, "rule": self.rule, "k": self.k,
                "evidence": self.evidence}


def _tuple_sets(f):
    return [frozenset(t) for r in f.signature for t in f.rel(r.name)]


def petal_witness(f, k):
    """Find A and, for every b outside A, a pair A0 != A1 of >=k-subsets of A
    each lying in a relation tuple together with b.  Returns None if no A works.
    """
    tuples = _tuple_sets(f)
    seen = set()
    for A in tuples:
        if len(A) <= k or A in seen:
            continue
        seen.add(A)
        pairs = {}
        for b in range(1, f.size + 1):
            if b in A:
                continue
            traces = sorted({T & A for T in tuples if b in T and len(T & A) >= k},
                            key=lambda s: (-len(s), sorted(s)))
            if not traces:
                break
            big = traces[0]
            if len(big) > k:
                subs = list(combinations(sorted(big), k))
                pairs[b] = (list(subs[0]), list(subs[1]))
            elif len(traces) >= 2:
                pairs[b] = (sorted(traces[0]), sorted(traces[1]))
            else:
                break
        else:
            return sorted(A), pairs
    return None


def certify_structural(spec, k):
    if k < 1:
        raise OverlapError("k must be positive")
    low = [r.name for r in spec.signature if r.arity <= k]
    if low:
        raise OverlapError(f"relations {low} have arity <= k={k}")
    if not spec.forbidden:
        ev = [{"note": "nothing forbidden; every amalgamation problem is solvable"}]
        return OverlapCertificate("Certified", "ndap_all_small_n", k, ev)
    evidence = []
    used = set()
    for i, f in enumerate(spec.forbidden):
        item = {"index": i, "size": f.size, "rule": None}
        if f.size >= k + 1 and is_k_irreducible(f, k + 1):
            item["rule"] = "all_k_plus_1_irreducible"
        else:
            w = petal_witness(f, k)
            if w is not None:
                A, pairs = w
                item["rule"] = "petal_condition"
                item["A"] = A
                item["pairs"] = {str(b): [list(p[0]), list(p[1])] for b, p in sorted(pairs.items())}
            elif k >= 2 and f.size >= k and is_k_irreducible(f, k):
                item["rule"] = "k_irreducible_bounded"
                item["bound"] = spec.size_cap_of_forbidden
        used.add(item["rule"])
        evidence.append(item)
    if None in used:
        return OverlapCertificate("Unknown", None, k, evidence)
    rule = used.pop() if len(used) == 1 else "mixed"
    return OverlapCertificate("Certified", rule, k, evidence)


# placement experiment --------------------------------------------------------

class PlacementReport:
    def __init__(self, params, certificate, rows, betas):
        self.params = params
        self.certificate = certificate
        self.rows = rows
        self.betas = betas

    @property
    def membership_failures(self):
        return sum(row["membership_failures"] for row in self.rows)

    @property
    def completion_failed(self):
        return any(row["completion"] == "failed" for row in self.rows)

    def to_json(self):
        return {"params": self.params, "certificate": self.certificate,
                "betas": self.betas, "per_n": self.rows}


def _paste(H1, H2, edges, rng):
    """Paste H1 or H2 into every edge via a uniform random bijection."""
    r = H1.size
    m = len(edges)
    which = rng.integers(2, size=m)
    perms = rng.random((m, r)).argsort(axis=1)
    thetas = []
    rels = {name: [] for name in H1.signature.names()}
    for e, w, p in zip(edges, which, perms):
        theta = tuple(e[int(j)] for j in p)
        thetas.append(theta)
        H = H1 if w == 0 else H2
        for name in rels:
            rels[name].extend(tuple(theta[x - 1] for x in t) for t in H.rel(name))
    return which, thetas, rels


class _GapState:
    """Incremental N_Theta counts under single-slot flips of G'."""

    def __init__(self, Hp, which, thetas):
        sig = Hp.signature
        self.which = which
        self.reqs = []
        self.by_slot = {}
        for idx, theta in enumerate(thetas):
            req = []
            for name, t in rs.all_slots(sig, Hp.size):
                img = tuple(theta[x - 1] for x in t)
                if sig[name].symmetric:
                    img = tuple(sorted(img))
                slot = (name, img)
                req.append((slot, Hp.holds(name, t)))
                self.by_slot.setdefault(slot, []).append(idx)
            self.reqs.append(req)
        self.slots = sorted(self.by_slot)
        self.sizes = [int(np.sum(which == 0)), int(np.sum(which == 1))]

    def reset(self, values):
        self.val = dict(values)
        self.match = [all(self.val[s] == v for s, v in req) for req in self.reqs]
        self.N = [0, 0]
        for w, ok in zip(self.which, self.match):
            if ok:
                self.N[int(w)] += 1

    def gap(self):
        a = self.N[0] / self.sizes[0] if self.sizes[0] else 0.0
        b = self.N[1] / self.sizes[1] if self.sizes[1] else 0.0
        return abs(a - b)

    def flip(self, slot):
        self.val[slot] = not self.val[slot]
        for idx in self.by_slot[slot]:
            ok = all(self.val[s] == v for s, v in self.reqs[idx])
            if ok != self.match[idx]:
                self.N[int(self.which[idx])] += 1 if ok else -1
                self.match[idx] = ok


def _adversarial_gap(state, rng, samples, steps):
    best = 0.0
    slots = state.slots
    for _ in range(samples):
        coins = rng.integers(2, size=len(slots))
        state.reset({s: bool(c) for s, c in zip(slots, coins)})
        cur = state.gap()
        best = max(best, cur)
        if not slots:
            continue
        picks = rng.integers(len(slots), size=steps)
        for p in picks:
            s = slots[int(p)]
            state.flip(s)
            g = state.gap()
            if g >= cur:
                cur = g
                best = max(best, cur)
            else:
                state.flip(s)
    return best


def placement_experiment(spec, H1, H2, k, n_grid=(20, 40, 60), trials=1000,
                         adversary_steps=500, seed=0, expansion=None, J=3,
                         epsilon=0.3, gap_trials=2, gap_samples=3):
    """Random placement of H1/H2 into a partial Steiner system.

    Every pasting is completed freely (no relations added) and checked for
    membership.  Gaps sup |N_1/|Theta_1| - N_2/|Theta_2|| are estimated on the
    first ``gap_trials`` pastings per n by random restarts plus single-flip
    hill climbing, so they are lower bounds on the true supremum.
    """
    r = H1.size
    if H2.size != r:
        raise OverlapError("H1 and H2 must have the same size")
    if r <= k:
        raise OverlapError("need |H1| > k")
    for H in (H1, H2):
        if H.signature != spec.signature:
            raise OverlapError("H1/H2 signature differs from the class")
        if not accepts(spec, H):
            raise OverlapError("H1 and H2 must belong to the class")
    if expansion is None:
        expansion = ClassSpec(rs.Signature([rs.Relation("E", 2, True)]))
    if expansion.forbidden:
        raise OverlapError("adversarial search needs an unconstrained expansion class")
    try:
        cert = certify_structural(spec, k).to_json()
    except OverlapError as exc:
        cert = {"verdict": "Unknown", "error": str(exc)}
    free = has_free_amalgamation(spec)

    reps = members(expansion, r)
    betas = [{"H'": rs.canonical_string(h),
              "beta": rs.automorphism_count(h) / factorial(r)} for h in reps]
    labelled = [(i, h) for i, rep in enumerate(reps) for h in all_labellings(rep)]

    rows = []
    for n in n_grid:
        K = steiner.generate(n, r, k, J, epsilon, [seed, n])
        edges = list(K.edges)
        fails, witness = 0, None
        gaps = [0.0] * len(reps)
        theta_sizes = []
        for trial in range(trials):
            rng = np.random.default_rng([seed, n, trial])
            which, thetas, rels = _paste(H1, H2, edges, rng)
            G = rs.Structure(spec.signature, n, rels)
            res = contains(spec, G)
            if not res.accepted:
                fails += 1
                if witness is None:
                    idx, phi = res.witness
                    witness = {"trial": trial, "forbidden": spec.forbidden[idx].to_json(),
                               "embedding": list(phi)}
            if trial < gap_trials:
                t1 = int(np.sum(which == 0))
                theta_sizes.append([t1, len(edges) - t1])
                for i, h in labelled:
                    state = _GapState(h, which, thetas)
                    g = _adversarial_gap(state, rng, gap_samples, adversary_steps)
                    gaps[i] = max(gaps[i], g)
        if fails and not free:
            completion = "failed"
        elif fails:
            completion = "counterexample"
        else:
            completion = "ok"
        rows.append({"n": n, "steiner": {"edges": len(edges), "stages": [list(s) for s in K.stages],
                                         "seed": [seed, n], "J": J, "epsilon": epsilon},
                     "pastings": trials, "theta_sizes": theta_sizes,
                     "membership_failures": fails, "completion": completion,
                     "first_failure": witness,
                     "expansions_tried": len(labelled) * gap_samples * min(gap_trials, trials),
                     "max_gap_by_H'": [{"H'": b["H'"], "max_observed_gap": g}
                                       for b, g in zip(betas, gaps)],
                     "max_observed_gap": max(gaps) if gaps else 0.0})
    params = {"r": r, "k": k, "n_grid": list(n_grid), "trials": trials,
              "adversary_steps": adversary_steps, "seed": seed, "J": J, "epsilon": epsilon,
              "gap_trials": gap_trials, "gap_samples": gap_samples,
              "H1": H1.to_json(), "H2": H2.to_json(), "free_completion": True,
              "class_has_free_amalgamation": free}
    return PlacementReport(params, cert, rows, betas)
