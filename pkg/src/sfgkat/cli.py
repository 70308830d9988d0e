"""Command-line interface.

Exit codes: 0 success / equivalent, 1 negative answer (inequivalent, rejected
proof, failed verification, fuzz discrepancy), 2 usage or input error,
3 internal soundness error reported by ``prove``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .bool_algebra import atom_of_tests
from .config import ATOM_CAP_ENV
from .equivalence import bisim_exprs, bisim_gkat, bisim_lts, gkat_lang_equiv, lang_equiv, prune_automaton, prune_expr
from .errors import SfgkatError
from .fuzz import CHECKS, fuzz
from .proofcheck import check_script, load_script
from .small_step import derive, derive_gkat, derive_skipfree, derive_star, from_json, grph_star
from .solve import LayeredLts, canonical_solution, check_well_layered, find_layering
from .syntax import KINDS, Program, Signature, read_program, render
from .syntax.common import split_header
from .translate import gtr, rtg

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

_EXTENSIONS = {".sf": "skipfree", ".skipfree": "skipfree", ".star": "star", ".gkat": "gkat"}


@dataclass
class RunConfig:
    kind: str | None = None
    tests: tuple | None = None
    actions: tuple | None = None
    max_tests: int | None = None
    format: str = "text"
    seed: int = 0
    count: int = 100

    def signature(self) -> Signature | None:
        if self.tests is None and self.actions is None:
            return None
        return Signature.of(self.tests or (), self.actions or ())


class UsageError(Exception):
    pass


def _names(raw: str | None):
    if raw is None:
        return None
    return tuple(n.strip() for n in raw.split(",") if n.strip())


def _config(args) -> RunConfig:
    cfg = RunConfig(
        kind=getattr(args, "kind", None),
        tests=_names(getattr(args, "tests", None)),
        actions=_names(getattr(args, "actions", None)),
        max_tests=args.max_tests,
        format=getattr(args, "format", None) or "text",
        seed=getattr(args, "seed", 0),
        count=getattr(args, "count", 100),
    )
    if cfg.max_tests is not None:
        os.environ[ATOM_CAP_ENV] = str(cfg.max_tests)
    return cfg


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None


def _kind(path: str, cfg: RunConfig, default: str = "skipfree") -> str:
    if cfg.kind:
        return cfg.kind
    return _EXTENSIONS.get(Path(path).suffix, default)


def _load(path: str, cfg: RunConfig, kind: str | None = None) -> Program:
    kind = kind or _kind(path, cfg)
    try:
        return read_program(_read(path), kind, cfg.signature())
    except SfgkatError as exc:
        raise UsageError(f"{path}:{exc}") from None


def _load_pair(p1: str, p2: str, cfg: RunConfig) -> tuple[Program, Program]:
    kind = _kind(p1, cfg)
    if _kind(p2, cfg) != kind:
        raise UsageError("files are in different expression languages")
    t1, t2 = _read(p1), _read(p2)
    d1, d2 = split_header(t1)[0], split_header(t2)[0]
    if d1 or d2:
        if d1 != d2:
            raise UsageError("mismatched headers: both files must declare the same tests and actions")
        sig = None
    else:
        sig = cfg.signature()
    def parse_one(path, text, sig):
        try:
            return read_program(text, kind, sig)
        except SfgkatError as exc:
            raise UsageError(f"{path}:{exc}") from None

    if sig is None and not d1:
        # no declarations anywhere: infer a joint universe
        s1, s2 = parse_one(p1, t1, None).sig, parse_one(p2, t2, None).sig
        sig = Signature.of(tuple(dict.fromkeys(s1.tests + s2.tests)), tuple(dict.fromkeys(s1.actions + s2.actions)))
    return parse_one(p1, t1, sig), parse_one(p2, t2, sig)


def _emit(cfg: RunConfig, obj: dict, text: str):
    if cfg.format == "json":
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print(text)


def _trace_text(cx) -> str:
    steps = " ".join(f"a{a}.{p}" for a, p in cx.steps) or "(start)"
    out = f"  after {steps}\n  at atom a{cx.atom}: {cx.kind}"
    if cx.word is not None:
        word = " ".join(f"a{a}.{p}" for a, p in cx.word)
        out += f"\n  word {word} accepted only by side {cx.accepted_by}"
    return out


def cmd_check(args) -> int:
    cfg = _config(args)
    pr1, pr2 = _load_pair(args.file1, args.file2, cfg)
    sig, kind = pr1.sig, pr1.kind
    if kind == "skipfree":
        v = (bisim_exprs if args.semantics == "bisim" else lang_equiv)(pr1.expr, pr2.expr, sig)
    elif kind == "gkat":
        if args.semantics == "bisim":
            v = bisim_gkat(derive_gkat(pr1.expr, sig), 0, derive_gkat(pr2.expr, sig), 0)
        else:
            v = gkat_lang_equiv(pr1.expr, pr2.expr, sig)
    else:
        if args.semantics != "bisim":
            raise UsageError("star expressions are compared up to bisimilarity only")
        v = bisim_lts(derive_star(pr1.expr, sig), 0, derive_star(pr2.expr, sig), 0)
    text = "equivalent" if v.equivalent else "inequivalent\n" + _trace_text(v.counterexample)
    _emit(cfg, v.to_json(), text)
    return EXIT_OK if v.equivalent else EXIT_NO


def cmd_translate(args) -> int:
    cfg = _config(args)
    src_kind = "skipfree" if args.to == "star" else "star"
    pr = _load(args.file, cfg, cfg.kind or src_kind)
    if pr.kind != src_kind:
        raise UsageError(f"--to {args.to} expects a {src_kind} expression")
    sig = pr.sig
    try:
        out = gtr(pr.expr, sig) if args.to == "star" else rtg(pr.expr, sig)
    except SfgkatError as exc:
        raise UsageError(str(exc)) from None
    ok = True
    if args.verify:
        if args.to == "star":
            ok = bisim_lts(derive_star(out, sig), 0, grph_star(derive_skipfree(pr.expr, sig)), 0).equivalent
        else:
            ok = bisim_lts(derive_star(pr.expr, sig), 0, grph_star(derive_skipfree(out, sig)), 0).equivalent
    result = Program(args.to, sig, out)
    if cfg.format == "json":
        obj = {"kind": args.to, "tests": list(sig.tests), "actions": list(sig.actions), "expression": render(out)}
        if args.verify:
            obj["verified"] = ok
        _emit(cfg, obj, "")
    else:
        sys.stdout.write(result.text())
        if args.verify:
            print("verified" if ok else "verification FAILED", file=sys.stderr)
    return EXIT_OK if ok else EXIT_NO


def cmd_prune(args) -> int:
    cfg = _config(args)
    pr = _load(args.file, cfg, "skipfree")
    out = prune_expr(pr.expr, pr.sig)
    if cfg.format == "json":
        _emit(cfg, {"tests": list(pr.sig.tests), "actions": list(pr.sig.actions), "expression": render(out)}, "")
    else:
        sys.stdout.write(Program("skipfree", pr.sig, out).text() if args.header else render(out) + "\n")
    return EXIT_OK


def _lts_input(path: str, cfg: RunConfig):
    text = _read(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = None
    try:
        if isinstance(data, dict):
            lts = from_json(data, "lts")
            ids = [s["id"] if isinstance(s, dict) else s for s in data.get("states", [])]
            return lts, ids
        pr = read_program(text, cfg.kind or "star", cfg.signature())
        if pr.kind != "star":
            raise UsageError("solve expects an LTS in JSON or a star expression")
        lts = derive_star(pr.expr, pr.sig)
        return lts, list(range(lts.n_states))
    except SfgkatError as exc:
        raise UsageError(f"{path}:{exc}") from None


def _entries(path: str, lts, ids) -> frozenset:
    try:
        data = json.loads(_read(path))
        index = {i: n for n, i in enumerate(ids)}
        out = set()
        for e in data["entries"]:
            atom = e["atom"]
            if not isinstance(atom, int):
                atom = atom_of_tests(lts.sig.universe, atom)
            out.add((index[e["from"]], atom, e["action"], index[e["to"]]))
        return frozenset(out)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: malformed labelling ({exc})") from None


def cmd_solve(args) -> int:
    cfg = _config(args)
    lts, ids = _lts_input(args.file, cfg)
    if args.labelling:
        lay = LayeredLts(lts, _entries(args.labelling, lts, ids))
        bad = check_well_layered(lay)
        if bad is not None:
            obj = {"well_layered": False, "condition": bad.condition, "message": bad.message}
            _emit(cfg, obj, f"not well-layered ({bad.condition}): {bad.message}")
            return EXIT_NO
    else:
        try:
            lay = find_layering(lts)
        except SfgkatError as exc:
            raise UsageError(str(exc)) from None
        if lay is None:
            _emit(cfg, {"well_layered": False}, "no well-layered labelling found")
            return EXIT_NO
    sol = canonical_solution(lay, verify=True)
    ok = all(sol.verified.values())
    entries = sorted(lay.entries)
    obj = {
        "well_layered": True,
        "tests": list(lts.sig.tests),
        "actions": list(lts.sig.actions),
        "entries": [{"from": ids[x], "atom": a, "action": p, "to": ids[y]} for x, a, p, y in entries],
        "solutions": [
            {"state": ids[x], "expression": render(sol[x]), "verified": sol.verified.get(x, False)}
            for x in range(lts.n_states)
        ],
    }
    text = "\n".join(f"{ids[x]}: {render(sol[x])}" for x in range(lts.n_states))
    _emit(cfg, obj, text)
    return EXIT_OK if ok else EXIT_NO


def cmd_prove(args) -> int:
    cfg = _config(args)
    try:
        data = json.loads(_read(args.script))
        script = load_script(data)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.script}: invalid JSON ({exc})") from None
    except SfgkatError as exc:
        raise UsageError(f"{args.script}: {exc}") from None
    res = check_script(script)
    text = "ok" if res.ok else f"{res.status}: {res.message}" + (f"\n  at {res.subterm}" if res.subterm else "")
    _emit(cfg, res.to_json(), text)
    return {"ok": EXIT_OK, "rejected": EXIT_NO}.get(res.status, EXIT_INTERNAL)


def cmd_automaton(args) -> int:
    cfg = _config(args)
    pr = _load(args.file, cfg)
    try:
        a = derive(pr.expr, pr.sig)
    except SfgkatError as exc:
        raise UsageError(str(exc)) from None
    if args.prune:
        if pr.kind == "star":
            raise UsageError("--prune applies to skip-free and GKAT automata")
        a = prune_automaton(a)
    if cfg.format == "dot":
        sys.stdout.write(a.to_dot())
    else:
        print(json.dumps(a.to_json(), indent=2))
    return EXIT_OK


def cmd_fuzz(args) -> int:
    cfg = _config(args)
    unknown = [c for c in args.check or () if c not in CHECKS]
    if unknown:
        raise UsageError(f"unknown check {unknown[0]!r}; choose from {', '.join(CHECKS)}")
    report = fuzz(cfg.seed, cfg.count, args.check)
    if cfg.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for r in report["results"]:
            print(f"{r['check']:24s} {r['cases']:6d} cases  {r['failures']} failures")
        if report["first_discrepancy"]:
            print("first discrepancy: " + json.dumps(report["first_discrepancy"], sort_keys=True))
    return EXIT_NO if report["first_discrepancy"] else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sfgkat",
        description="Skip-free GKAT: equivalence checking, translations, pruning, solving and proof checking.",
        epilog=f"Exit codes: 0 ok/equivalent, 1 negative answer, 2 usage or input error, 3 internal error. "
        f"The atom cap (maximum number of tests) can be raised with ${ATOM_CAP_ENV} or --max-tests.",
    )
    ap.add_argument("--max-tests", type=int, help=f"override the test cap (also ${ATOM_CAP_ENV})")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p, formats=("text", "json"), kind=True):
        if kind:
            p.add_argument("--kind", choices=KINDS, help="expression language (default from extension, else skipfree)")
        p.add_argument("--tests", help="comma-separated tests when files carry no header")
        p.add_argument("--actions", help="comma-separated actions when files carry no header")
        p.add_argument("--format", choices=formats, default=formats[0])

    p = sub.add_parser("check", help="decide equivalence of two expression files")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--semantics", choices=("bisim", "lang"), default="bisim")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("translate", help="translate between skip-free and star expressions")
    p.add_argument("file")
    p.add_argument("--to", choices=("star", "skipfree"), required=True)
    p.add_argument("--verify", action="store_true", help="check the result is bisimilar to the input")
    common(p)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("prune", help="remove dead subterms of a skip-free expression")
    p.add_argument("file")
    p.add_argument("--header", action="store_true", help="print the tests/actions header")
    common(p, kind=False)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("solve", help="canonical solution of a well-layered LTS (JSON) or star expression")
    p.add_argument("file")
    p.add_argument("--labelling", help="JSON file listing entry transitions; searched for when omitted")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("prove", help="check an equational proof script")
    p.add_argument("script")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("automaton", help="export the derivative automaton")
    p.add_argument("file")
    p.add_argument("--prune", action="store_true", help="reroute transitions into dead states to rejection")
    common(p, formats=("json", "dot"))
    p.set_defaults(func=cmd_automaton)

    p = sub.add_parser("fuzz", help="seeded cross-oracle property checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--check", action="append", help=f"restrict to a check (repeatable): {', '.join(CHECKS)}")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_fuzz)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sfgkat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SfgkatError as exc:
        print(f"sfgkat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
