"""Parsers and printers for the three expression languages.

Files may start with ``tests: t,s;`` and ``actions: p,q;`` declarations.
Without them the universe is inferred from the order in which names first
appear (tests from guard brackets, actions from everything else).
"""
from __future__ import annotations

from dataclasses import dataclass

from ..bool_algebra import TestUniverse, atom_of_tests
from ..errors import ParseError, UniverseError
from . import gkat, skipfree, star
from .common import Expr, Signature, parse_bexp, positions, replace_at, size, split_header, subterm, tokenize
from .gkat import GkatExp, embed_syntax
from .skipfree import SkipFreeExp
from .star import StarExp

KINDS = ("skipfree", "star", "gkat")


@dataclass(frozen=True)
class Program:
    kind: str
    sig: Signature
    expr: Expr

    def text(self) -> str:
        return self.sig.header() + render(self.expr) + "\n"


def _dedupe(names):
    return tuple(dict.fromkeys(names))


def _make_sig(tests, actions) -> Signature:
    try:
        return Signature(TestUniverse(tuple(tests)), tuple(actions))
    except UniverseError as exc:
        raise ParseError(str(exc)) from None


def _check(seen, allowed, what):
    for tok in seen:
        if tok.text not in allowed:
            raise ParseError(f"unknown {what} {tok.text!r}", tok.line, tok.col)


def read_program(text: str, kind: str, sig: Signature | None = None) -> Program:
    if kind not in KINDS:
        raise ValueError(f"unknown expression kind {kind!r}")
    decl, body, offset = split_header(text)
    if decl:
        tests, actions = decl.get("tests"), decl.get("actions")
    elif sig is not None:
        tests, actions = sig.tests, sig.actions
    else:
        tests = actions = None

    if kind == "skipfree":
        p = skipfree.SkipFreeParser(body, offset)
        e = p.parse()
        if tests is None:
            tests = _dedupe(t.text for t in p.tests_seen)
        if actions is None:
            actions = _dedupe(t.text for t in p.actions_seen)
        _check(p.tests_seen, set(tests), "test")
        _check(p.actions_seen, set(actions), "action")
        return Program(kind, _make_sig(tests, actions), e)

    if kind == "gkat":
        if tests is None:
            tests = _bracket_idents(tokenize(body))
        p = gkat.GkatParser(body, set(tests), offset)
        e = p.parse()
        if actions is None:
            actions = _dedupe(t.text for t in p.actions_seen)
        _check(p.tests_seen, set(tests), "test")
        _check(p.actions_seen, set(actions), "action")
        return Program(kind, _make_sig(tests, actions), e)

    p = star.StarParser(body, offset)
    r = p.parse()
    if tests is None:
        tests = _dedupe(t.text for t in p.brace_tests)
    if actions is None:
        actions = _dedupe(t.text for t in p.actions_seen)
    _check(p.brace_tests, set(tests), "test")
    _check(p.actions_seen, set(actions), "action")
    s = _make_sig(tests, actions)
    for tok, spec in p.atoms_seen:
        if isinstance(spec, int) and spec >= s.n_atoms:
            raise ParseError(f"atom a{spec} out of range for {len(s.tests)} tests", tok.line, tok.col)

    def convert(spec):
        return spec if isinstance(spec, int) else atom_of_tests(s.universe, spec)

    return Program(kind, s, star.resolve_atoms(r, convert))


def _bracket_idents(toks) -> tuple[str, ...]:
    out = []
    depth = 0
    for t in toks:
        if t.kind == "sym" and t.text == "[":
            depth += 1
        elif t.kind == "sym" and t.text == "]":
            depth -= 1
        elif depth > 0 and t.kind == "ident":
            out.append(t.text)
    return _dedupe(out)


def parse_skipfree(text: str, sig: Signature | None = None) -> SkipFreeExp:
    return read_program(text, "skipfree", sig).expr


def parse_star(text: str, sig: Signature | None = None) -> StarExp:
    return read_program(text, "star", sig).expr


def parse_gkat(text: str, sig: Signature | None = None) -> GkatExp:
    return read_program(text, "gkat", sig).expr


def parse(text: str, kind: str, sig: Signature | None = None) -> Expr:
    return read_program(text, kind, sig).expr


def kind_of(e: Expr) -> str:
    if isinstance(e, SkipFreeExp):
        return "skipfree"
    if isinstance(e, StarExp):
        return "star"
    if isinstance(e, GkatExp):
        return "gkat"
    raise TypeError(f"not an expression: {e!r}")


def render(e: Expr) -> str:
    return {"skipfree": skipfree.render, "star": star.render, "gkat": gkat.render}[kind_of(e)](e)


__all__ = [
    "KINDS", "Program", "Signature", "SkipFreeExp", "StarExp", "GkatExp", "embed_syntax", "gkat", "kind_of",
    "parse", "parse_bexp", "parse_gkat", "parse_skipfree", "parse_star", "positions", "read_program", "render",
    "replace_at", "size", "skipfree", "star", "subterm",
]
