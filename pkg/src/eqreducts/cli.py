"""The `eq` command line tool.

Exit codes: 0 success, 1 negative verdict when --fail-on-violates is given,
2 usage or input errors, 3 resource caps exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import __version__
from .classify import classify_language, csp_verdict
from .config import DEFAULT_BUDGET, partition_cap
from .continuum import continuum_report
from .eqcore import OrbitRelation
from .eqcsp import brute_solve, load_instance, solve
from .eqformula import (
    SearchLimits,
    classify_formula,
    expand_horn,
    horn_to_extended,
    parse_formula,
    parse_pp,
    pp_evaluate,
    pp_search_bounded,
    reduce,
    to_cnf,
)
from .errors import CrossValidationError, EqError, ParseError, ResourceError, ValidationError
from .langfile import LanguageFile, load_language
from .preserve import preserves_exact, preserves_sampled
from .unilattice import format_tuple, monoid_of_relation, parse_tuple, seq_leq

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _meta(args, seed: Optional[int] = None) -> dict:
    return {
        "version": __version__,
        "seed": seed,
        "caps": {"partition_cap": partition_cap(), "budget": getattr(args, "budget", DEFAULT_BUDGET)},
    }


def _emit(args, report: dict, text: str, seed: Optional[int] = None) -> None:
    if args.json:
        report = dict(report)
        report["meta"] = _meta(args, seed)
        print(dumps(report))
    else:
        print(text)


def _language(args) -> LanguageFile:
    path = getattr(args, "lang", None)
    return load_language(path) if path else LanguageFile()


def _resolve(spec: str, lang: LanguageFile, kind: str):
    """NAME, FILE.lang (single definition) or FILE.lang:NAME."""
    path, name = spec, ""
    if ".lang:" in spec:
        path, name = spec.rsplit(":", 1)
    if path.endswith(".lang"):
        lf = load_language(path)
        table = lf.relations if kind == "rel" else lf.operations
        if not name:
            if len(table) != 1:
                raise ValidationError(f"{path} defines {len(table)} {kind}s; use {path}:NAME")
            name = next(iter(table))
        if name not in table:
            raise ValidationError(f"{path} has no {kind} {name!r}")
        return name, table[name]
    return spec, (lang.relation(spec) if kind == "rel" else lang.operation(spec))


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args) -> int:
    lang = load_language(args.file)
    if not lang.relations:
        raise ValidationError("the language file defines no relations")
    pos = classify_language(lang.relations, budget=args.budget, rchain_max=args.rchain)
    report = pos.as_dict()
    lines = [f"monoid: {pos.monoid.name}", f"case: {pos.interval_case}"]
    if pos.flags is not None:
        lines.append("flags: " + ", ".join(f"{k}={v}" for k, v in pos.flags.as_dict().items()))
    if pos.landmark:
        lines.append(f"position: {pos.landmark}")
    if pos.level:
        lines.append(f"level: {pos.level}")
    if pos.k is not None:
        lines.append(f"k: {'w' if pos.k == float('inf') else pos.k}")
    for ev in pos.evidence:
        for name, entry in ev.detail.get("relations", {}).items():
            lines.append(f"  {ev.claim} [{name}]: {entry}")
        if "witness" in ev.detail:
            lines.append(f"  {ev.claim}: violated on {ev.detail['relation']}: {ev.detail['witness']}")
    _emit(args, report, "\n".join(lines))
    return EXIT_OK


def cmd_preserve(args) -> int:
    lang = _language(args)
    op_name, op = _resolve(args.op, lang, "op")
    rel_name, rel = _resolve(args.rel, lang, "rel")
    if args.samples is not None:
        v = preserves_sampled(op, rel, samples=args.samples, seed=args.seed)
        report = {"mode": "sampled", "verdict": v.verdict, "samples": v.samples, "seed": v.seed}
        seed = args.seed
    else:
        v = preserves_exact(op, rel, budget=args.budget)
        report = {"mode": "exact", "verdict": v.verdict}
        seed = None
    if v.witness is not None:
        report["witness"] = v.witness.as_dict()
    text = report["verdict"]
    if v.witness is not None:
        w = v.witness
        text += f"\n  inputs: {list(w.inputs)}\n  output: {w.output} pattern {w.pattern.literal()}"
    _emit(args, report, text, seed)
    if args.fail_on_violates and report["verdict"] == "Violates":
        return EXIT_NEGATIVE
    return EXIT_OK


def _rel_report(rel: OrbitRelation) -> dict:
    return {"arity": rel.arity, "orbits": [p.literal() for p in rel.sorted_orbits()]}


def cmd_ppeval(args) -> int:
    lang = _language(args)
    rel = pp_evaluate(parse_pp(args.formula), lang.relations)
    _emit(args, _rel_report(rel), rel.literal())
    return EXIT_OK


def cmd_ppsearch(args) -> int:
    lang = _language(args)
    _, target = _resolve(args.target, lang, "rel")
    base = {}
    for spec in args.base:
        name, rel = _resolve(spec, lang, "rel")
        base[name] = rel
    found = pp_search_bounded(target, base, SearchLimits(args.max_bound, args.max_atoms))
    report = {"found": found is not None, "formula": None if found is None else str(found),
              "limits": {"max_bound_vars": args.max_bound, "max_atoms": args.max_atoms}}
    _emit(args, report, str(found) if found is not None else "no definition within the search limits")
    if found is None and args.fail_on_violates:
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_order_cmp(args) -> int:
    a, b = parse_tuple(args.a), parse_tuple(args.b)
    result = seq_leq(a, b)
    _emit(args, {"a": format_tuple(a), "b": format_tuple(b), "leq": result}, "true" if result else "false")
    return EXIT_OK


def cmd_monoid_of(args) -> int:
    lang = _language(args)
    _, rel = _resolve(args.rel, lang, "rel")
    M = monoid_of_relation(rel)
    _emit(args, {"monoid": M.as_json(), "name": M.name}, M.name)
    return EXIT_OK


def cmd_continuum(args) -> int:
    ks = args.k or []
    report = continuum_report(args.n, ks, samples=args.samples, seed=args.seed)
    lines = [f"H{args.n}: arity m = {report['m']}",
             f"violates C{args.n}: {report['violation']['ok']} (output pattern {report['violation']['witness']['pattern']})"]
    for c in report["cross"]:
        lines.append(f"C{c['k']}: {c['verdict']} ({c['samples']} samples, seed {c['seed']})")
    _emit(args, report, "\n".join(lines), args.seed)
    ok = report["violation"]["ok"] and all(c["verdict"] != "Violates" for c in report["cross"])
    return EXIT_NEGATIVE if args.fail_on_violates and not ok else EXIT_OK


def cmd_csp_solve(args) -> int:
    inst = load_instance(args.file)
    if args.brute:
        sol, verdict = brute_solve(inst), None
    else:
        verdict = csp_verdict(inst.language()) if inst.constraints else None
        sol = solve(inst, verdict)
    report = {"sat": sol.sat, "assignment": sol.assignment, "solver": "brute" if args.brute else "polynomial"}
    if verdict is not None:
        report["verdict"] = str(verdict)
    _emit(args, report, str(sol))
    return EXIT_NEGATIVE if args.fail_on_violates and not sol.sat else EXIT_OK


def cmd_formula(args) -> int:
    f = parse_formula(args.formula)
    cnf = to_cnf(f)
    if args.action == "reduce":
        red = reduce(cnf)
        _emit(args, {"reduced": str(red)}, str(red))
    elif args.action == "classify":
        red = reduce(cnf)
        flags = classify_formula(red).as_dict()
        _emit(args, {"reduced": str(red), "flags": flags}, "\n".join(f"{k}: {v}" for k, v in flags.items()))
    else:
        red = reduce(cnf)
        if not classify_formula(red).horn:
            raise ValidationError("expansion needs a Horn formula")
        ext = expand_horn(horn_to_extended(red))
        flags = classify_formula(ext).as_dict()
        _emit(args, {"expanded": str(ext), "flags": flags}, str(ext))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a canonical JSON report")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="node budget of the exact search")
    common.add_argument("--lang", help="language file for name resolution")
    common.add_argument("--fail-on-violates", action="store_true", help="exit 1 on a negative verdict")

    p = argparse.ArgumentParser(prog="eq", description="Equality constraint language toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common], help="locate a language in the clone lattice")
    s.add_argument("file")
    s.add_argument("--rchain", type=int, default=0, help="also test f_3..f_K (K >= 3)")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("preserve", parents=[common], help="does an operation preserve a relation")
    s.add_argument("--op", required=True)
    s.add_argument("--rel", required=True)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exhaustive symbolic search (default)")
    mode.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_preserve)

    s = sub.add_parser("ppeval", parents=[common], help="relation defined by a pp formula")
    s.add_argument("formula")
    s.set_defaults(func=cmd_ppeval)

    s = sub.add_parser("ppsearch", parents=[common], help="bounded search for a pp definition")
    s.add_argument("--target", required=True)
    s.add_argument("--base", nargs="+", required=True)
    s.add_argument("--max-bound", type=int, default=2)
    s.add_argument("--max-atoms", type=int, default=2)
    s.set_defaults(func=cmd_ppsearch)

    s = sub.add_parser("order", help="kernel tuple order")
    osub = s.add_subparsers(dest="order_cmd", required=True)
    c = osub.add_parser("cmp", parents=[common], help="is A below B")
    c.add_argument("a")
    c.add_argument("b")
    c.set_defaults(func=cmd_order_cmp)

    s = sub.add_parser("monoid", help="unary polymorphism monoids")
    msub = s.add_subparsers(dest="monoid_cmd", required=True)
    c = msub.add_parser("of", parents=[common], help="monoid of a relation")
    c.add_argument("rel")
    c.set_defaults(func=cmd_monoid_of)

    s = sub.add_parser("continuum", parents=[common], help="Hubie-violator report")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, action="append")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=42)
    s.set_defaults(func=cmd_continuum)

    s = sub.add_parser("csp", help="constraint satisfaction")
    csub = s.add_subparsers(dest="csp_cmd", required=True)
    c = csub.add_parser("solve", parents=[common], help="solve an instance file")
    c.add_argument("file")
    c.add_argument("--brute", action="store_true")
    c.set_defaults(func=cmd_csp_solve)

    s = sub.add_parser("formula", parents=[common], help="formula utilities")
    s.add_argument("action", choices=["reduce", "classify", "expand"])
    s.add_argument("formula")
    s.set_defaults(func=cmd_formula)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CrossValidationError as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (EqError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
