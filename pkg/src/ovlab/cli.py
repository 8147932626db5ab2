"""Command-line interface.

Exit codes: 0 success (accepted, certified, verified, report written),
1 negative verdict (report still written), 2 usage or input error.
"""
import argparse
import datetime
import json
import math
import os
import sys
from fractions import Fraction

from . import __version__
from . import relstruct as rs
from . import catalog as cat
from . import classes as cl
from . import amalgamation as am
from . import steiner as st
from . import overlap as ov
from . import crelp
from . import kaygraph as kg


class UsageError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return _jsonable(obj.to_json())
    if hasattr(obj, "item"):  # numpy scalars
        return obj.item()
    return obj


def dumps(report):
    return json.dumps(_jsonable(report), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}")


def load_structure(ref):
    if ref.startswith("catalog:"):
        name, params = cat.parse_reference(ref)
        return cat.catalog_structure(name, **params)
    return rs.Structure.from_json(_read_json(ref))


def load_class(ref):
    if ref.startswith("catalog:"):
        return cat.resolve(ref)
    return cl.ClassSpec.from_json(_read_json(ref))


def _seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("OVLAB_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError("OVLAB_SEED must be an integer")
    return 0


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


# subcommand handlers: each returns (report, ok, summary) ------------------------------

def struct_validate(args):
    try:
        s = load_structure(args.input)
        msg = rs.validate(s)
    except (rs.StructureError, KeyError, TypeError) as exc:
        msg = str(exc)
    return {"ok": msg is None, "violation": msg}, msg is None, msg or "ok"


def struct_canon(args):
    s = load_structure(args.input)
    c = rs.canonical_form(s)
    return ({"canonical": c, "canonical_string": rs.canonical_string(s),
             "automorphisms": rs.automorphism_count(s)}, True, rs.canonical_string(s))


def struct_embed(args):
    H, G = load_structure(args.H), load_structure(args.G)
    count, maps = rs.count_embeddings(H, G, collect=args.collect)
    rep = {"count": count}
    if args.collect:
        rep["embeddings"] = [list(m) for m in maps]
    return rep, True, f"{count} embeddings"


def class_check(args):
    spec = load_class(args.cls)
    a = load_structure(args.input)
    res = cl.contains(spec, a)
    rep = {"class": spec, "accepted": res.accepted}
    if not res.accepted:
        idx, phi = res.witness
        rep["witness"] = {"forbidden_index": idx, "forbidden": spec.forbidden[idx],
                          "embedding": list(phi)}
    return rep, res.accepted, "accepted" if res.accepted else f"rejected (forbidden #{res.witness[0]})"


def class_catalog(args):
    if args.name is None:
        rep = {"classes": sorted(cat.CLASSES), "structures": sorted(cat.STRUCTURES)}
        return rep, True, "classes: " + ", ".join(rep["classes"])
    params = dict(cat.parse_reference("catalog:" + args.name)[1])
    name = cat.parse_reference("catalog:" + args.name)[0]
    if name in cat.CLASSES:
        spec = cat.catalog(name, **params)
        rep = {"class": spec, "free_amalgamation": cl.has_free_amalgamation(spec),
               "forbidden_count": len(spec.forbidden)}
        return rep, True, f"{name}: {len(spec.forbidden)} minimal forbidden structures"
    s = cat.catalog_structure(name, **params)
    return {"structure": s}, True, f"{name}: {s.size} vertices, {s.num_tuples()} tuples"


def class_exc(args):
    spec = load_class(args.cls)
    fam = cl.exc_forbidden(spec, args.size_cap)
    rep = {"size_cap": args.size_cap, "forbidden": fam,
           "forbidden_strings": [rs.canonical_string(f) for f in fam]}
    return rep, True, f"{len(fam)} minimal forbidden structures up to size {args.size_cap}"


def amalg_solve(args):
    spec = load_class(args.cls)
    prob = am.AmalgProblem.from_json(_read_json(args.problem))
    sol = am.solve(prob, spec)
    return {"solution": sol, "solvable": sol is not None}, sol is not None, \
        "solvable" if sol is not None else "no solution"


def amalg_find(args):
    spec = load_class(args.cls)
    prob = am.find_failing(spec, args.n, args.base_cap)
    rep = {"n": args.n, "base_cap": args.base_cap, "failing": prob}
    return rep, prob is None, "none found" if prob is None else f"failing problem over a base of size {prob.m}"


def amalg_dichotomy(args):
    spec = load_class(args.cls)
    w = am.dichotomy_witness(spec, n_max=args.n_max, base_cap=args.base_cap)
    rep = {"witness": w}
    if w is None:
        return rep, True, "no failing problem within caps (every basic problem solved)"
    return rep, False, w.formula_description


def amalg_sample(args):
    spec = load_class(args.cls)
    ground = load_structure(args.ground)
    seed = _seed(args)
    s = am.sample_ndap_expansion(spec, ground, seed)
    return {"seed": seed, "sample": s}, True, f"{len(s.types)} types sampled"


def steiner_gen(args):
    seed = _seed(args)
    system = st.generate(args.n, args.r, args.k, args.J, args.epsilon, seed, args.mode)
    rep = system.to_json()
    rep["verify"] = st.verify(system)
    return rep, True, f"{len(system.edges)} edges"


def steiner_verify(args):
    obj = _read_json(args.input)
    if "result" in obj and "edges" not in obj:  # a report written by `steiner gen -o`
        obj = obj["result"]
    system = st.PartialSteiner.from_json(obj)
    rep = st.verify(system)
    ok = st.verified(rep)
    return rep, ok, "verified" if ok else "violations found"


def overlap_certify(args):
    spec = load_class(args.cls)
    cert = ov.certify_structural(spec, args.k)
    ok = cert.verdict == "Certified"
    return cert.to_json(), ok, f"Certified ({cert.rule})" if ok else "Unknown: no sufficient condition applies"


def overlap_place(args):
    spec = load_class(args.cls)
    H1, H2 = load_structure(args.H1), load_structure(args.H2)
    expansion = load_class(args.expansion) if args.expansion else None
    seed = _seed(args)
    rep = ov.placement_experiment(spec, H1, H2, args.k, _ints(args.n_grid), args.trials,
                                  args.adversary_steps, seed, expansion)
    ok = rep.membership_failures == 0
    summary = f"{rep.membership_failures} membership failures; max observed gaps " + \
        ", ".join(f"n={r['n']}: {r['max_observed_gap']:.4f}" for r in rep.rows)
    return rep.to_json(), ok, summary


def cre_gap(args):
    base = load_class(args.cls)
    if bool(args.expansion) == bool(args.cstar):
        raise UsageError("give exactly one of --expansion and --cstar")
    other = load_class(args.expansion or args.cstar)
    H1, H2, Hp = load_structure(args.H1), load_structure(args.H2), load_structure(args.Hp)
    levels = _ints(args.levels)
    g = crelp.gap_bound(base, other, H1, H2, Hp, levels)
    if args.export_lp:
        cstar = crelp.as_cstar(base, other)
        poly = crelp.LevelPolytope(base, cstar, levels[-1])
        obj = crelp.gap_objective(poly, H1, H2, crelp._align(Hp, cstar))
        with open(args.export_lp, "w") as fh:
            fh.write(poly.export(obj))
    summary = "upper bounds per level: " + ", ".join(
        f"{n}: {v}" for n, v in zip(g.levels, g.symmetric))
    return g.to_json(), True, summary


def cre_keisler(args):
    base = load_class(args.cls)
    rep = crelp.keisler_gap(base, args.level, args.max_size)
    return rep, True, f"headline upper bound at level {args.level}: {rep['headline']}"


def cre_mc(args):
    base = load_class(args.cls)
    mc = crelp.measuring_class(base, args.size_cap)
    rep = {"class": mc, "forbidden_strings": [rs.canonical_string(f) for f in mc.forbidden]}
    return rep, True, f"{len(mc.forbidden)} minimal forbidden structures over {mc.signature!r}"


def kay_reduct(args):
    H = load_structure(args.input)
    G = kg.reduct_map(H)
    return {"reduct": G}, True, f"{G.num_tuples()} hyperedges"


def kay_count(args):
    G = load_structure(args.input)
    if args.size is not None and G.size != args.size:
        raise UsageError(f"--size {args.size} does not match the structure size {G.size}")
    hs = kg.hypergraphings(G, args.k)
    expected = 2 ** math.comb(G.size - 1, args.k - 1) if G.size > args.k else len(hs)
    ok = len(hs) == expected
    return {"count": len(hs), "expected": expected, "k": args.k}, ok, str(len(hs))


def kay_fraction(args):
    A, As, B = load_structure(args.A), load_structure(args.Astar), load_structure(args.B)
    rep = kg.keisler_fraction(A, As, B, args.mode)
    return rep, rep["uniform"], f"probability {rep['probability']} (rho {rep['rho']})"


def kay_concentrate(args):
    A = load_structure(args.A)
    seed = _seed(args)
    rep = kg.concentration_experiment(args.k, A, _ints(args.n_grid), args.trials, seed)
    summary = "; ".join(f"n={r['n']}: E={r['E']}" + (
        f" max|f-1|={r['max_abs_f_minus_1']:.4f} max|f*-rho|={r['max_abs_fstar_minus_rho']:.4f}"
        if r["trials"] else "") for r in rep["rows"])
    return rep, True, summary


# parser ---------------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="ovlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    common.add_argument("-o", "--output", help="write the JSON report to this file")
    common.add_argument("--threads", type=int, default=None,
                        help="accepted for compatibility; work runs sequentially")
    groups = p.add_subparsers(dest="group", required=True)

    def cmd(group, name, fn, **kw):
        sp = group.add_parser(name, parents=[common], **kw)
        sp.set_defaults(fn=fn, command=name)
        return sp

    g = groups.add_parser("struct").add_subparsers(dest="cmd", required=True)
    sp = cmd(g, "validate", struct_validate)
    sp.add_argument("--in", dest="input", required=True)
    sp = cmd(g, "canon", struct_canon)
    sp.add_argument("--in", dest="input", required=True)
    sp = cmd(g, "embed", struct_embed)
    sp.add_argument("--H", required=True)
    sp.add_argument("--G", required=True)
    sp.add_argument("--collect", action="store_true")

    g = groups.add_parser("class").add_subparsers(dest="cmd", required=True)
    sp = cmd(g, "check", class_check)
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("--in", dest="input", required=True)
    sp = cmd(g, "catalog", class_catalog)
    sp.add_argument("--name", help="e.g. kaygraph?k=2 or petal?n=4&r=3")
    sp = cmd(g, "exc", class_exc)
    sp.add_argument("--class", dest="cls", required=True, help="C* with a declared split")
    sp.add_argument("--size-cap", type=int, default=3)

    g = groups.add_parser("amalg").add_subparsers(dest="cmd", required=True)
    sp = cmd(g, "solve", amalg_solve)
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("--problem", required=True)
    sp = cmd(g, "find", amalg_find)
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("--base-cap", type=int, default=2)
    sp = cmd(g, "dichotomy", amalg_dichotomy)
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("--n-max", type=int, default=5)
    sp.add_argument("--base-cap", type=int, default=1)
    sp = cmd(g, "sample", amalg_sample)
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("--ground", required=True)
    sp.add_argument("--seed", type=int)

    g = groups.add_parser("steiner").add_subparsers(dest="cmd", required=True)
    sp = cmd(g, "gen", steiner_gen)
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("-r", type=int, default=3)
    sp.add_argument("-k", type=int, default=2)
    sp.add_argument("-J", type=int, default=3)
    sp.add_argument("--epsilon", type=float, default=0.3)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--mode", default="random-deletion", choices=["random-deletion", "kpartite"])
    sp = cmd(g, "verify", steiner_verify)
    sp.add_argument("--in", dest="input", required=True)

    g = groups.add_parser("overlap").add_subparsers(dest="cmd", required=True)
    sp = cmd(g, "certify", overlap_certify)
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("-k", type=int, required=True)
    sp = cmd(g, "place", overlap_place)
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("--H1", required=True)
    sp.add_argument("--H2", required=True)
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("--n-grid", default="20,40,60")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--adversary-steps", type=int, default=500)
    sp.add_argument("--expansion", help="unconstrained expansion class (default: graphs)")
    sp.add_argument("--seed", type=int)

    g = groups.add_parser("cre").add_subparsers(dest="cmd", required=True)
    sp = cmd(g, "gap", cre_gap)
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("--expansion")
    sp.add_argument("--cstar")
    sp.add_argument("--H1", required=True)
    sp.add_argument("--H2", required=True)
    sp.add_argument("--Hp", required=True)
    sp.add_argument("--levels", default="3")
    sp.add_argument("--export-lp", help="write the last level's LP in text form")
    sp = cmd(g, "keisler", cre_keisler)
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("--level", type=int, default=3)
    sp.add_argument("--max-size", type=int)
    sp = cmd(g, "mc", cre_mc)
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("--size-cap", type=int)

    g = groups.add_parser("kaygraph").add_subparsers(dest="cmd", required=True)
    sp = cmd(g, "reduct", kay_reduct)
    sp.add_argument("--in", dest="input", required=True)
    sp = cmd(g, "count", kay_count)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("-k", type=int, default=2)
    sp.add_argument("--size", type=int)
    sp = cmd(g, "fraction", kay_fraction)
    sp.add_argument("--A", required=True)
    sp.add_argument("--Astar", required=True)
    sp.add_argument("--B", required=True)
    sp.add_argument("--mode", default="fixed", choices=["fixed", "all"])
    sp = cmd(g, "concentrate", kay_concentrate)
    sp.add_argument("-k", type=int, default=2)
    sp.add_argument("--A", required=True)
    sp.add_argument("--n-grid", default="10,20,40")
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--seed", type=int)
    return p


def run(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result, ok, summary = args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = {"command": f"{args.group} {args.command}",
              "argv": list(argv) if argv is not None else sys.argv[1:],
              "verdict": "ok" if ok else "negative",
              "result": result,
              "metadata": {"timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                           "version": __version__}}
    if hasattr(args, "seed"):
        report["seed"] = _seed(args)
    text = dumps(report)
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
            return 2
    if args.json:
        stdout.write(text)
    else:
        stdout.write(summary + "\n")
    return 0 if ok else 1


def main(argv=None):
    sys.exit(run(argv))
