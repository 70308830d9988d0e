"""One-free star expressions over the alphabet of atom/action pairs."""
from __future__ import annotations

import re

from .common import Expr, Parser


class StarExp(Expr):
    __slots__ = ()


class Zero(StarExp):
    __slots__ = ()


class Lit(StarExp):
    """An atom paired with an action, written ``a<index>.p``."""

    __slots__ = ("atom", "action")
    fields = ("atom", "action")


class Plus(StarExp):
    __slots__ = ("left", "right")
    fields = ("left", "right")
    kids = ("left", "right")


class Seq(StarExp):
    __slots__ = ("left", "right")
    fields = ("left", "right")
    kids = ("left", "right")


class Star(StarExp):
    """Binary star ``left * right``: iterate left, then finish with right."""

    __slots__ = ("left", "right")
    fields = ("left", "right")
    kids = ("left", "right")


ZERO = Zero()

_ATOM = re.compile(r"a([0-9]+)")


class StarParser(Parser):
    """``+`` binds loosest, then juxtaposition, then ``*``."""

    def __init__(self, text, line_offset=0):
        super().__init__(text, line_offset)
        self.actions_seen: list = []
        self.brace_tests: list = []
        # (token, atom spec) in order of appearance; spec is an int or a tuple of test names
        self.atoms_seen: list = []

    def parse(self) -> StarExp:
        r = self.plus()
        self.finish()
        return r

    def plus(self):
        r = self.seq()
        while self.at("+"):
            self.advance()
            r = Plus(r, self.seq())
        return r

    def starts_primary(self) -> bool:
        t = self.tok
        return t.kind == "ident" or (t.kind == "num" and t.text == "0") or self.at("(") or self.at("{")

    def seq(self):
        r = self.star()
        while self.starts_primary():
            r = Seq(r, self.star())
        return r

    def star(self):
        r = self.primary()
        while self.at("*"):
            self.advance()
            r = Star(r, self.primary())
        return r

    def primary(self):
        t = self.tok
        if t.kind == "num" and t.text == "0":
            self.advance()
            return ZERO
        if self.at("("):
            self.advance()
            r = self.plus()
            self.expect(")")
            return r
        if t.kind == "ident" or self.at("{"):
            atom = self.atom()
            self.expect(".")
            act = self.tok
            if act.kind != "ident":
                self.error("expected an action name after '.'")
            self.advance()
            self.actions_seen.append(act)
            return Lit(atom, act.text)
        self.error(f"expected a star expression, found {t.text or 'end of input'!r}")

    def atom(self):
        t = self.tok
        if t.kind == "ident":
            m = _ATOM.fullmatch(t.text)
            if m is None:
                self.error(f"expected an atom like a0 or {{t,s}}, found {t.text!r}")
            self.advance()
            spec = int(m.group(1))
        else:
            self.expect("{")
            names = []
            while not self.at("}"):
                n = self.tok
                if n.kind != "ident":
                    self.error("expected a test name inside braces")
                self.advance()
                names.append(n.text)
                self.brace_tests.append(n)
                if not self.at("}"):
                    self.expect(",")
            self.expect("}")
            spec = tuple(names)
        self.atoms_seen.append((t, spec))
        return spec


def resolve_atoms(r: StarExp, convert) -> StarExp:
    if isinstance(r, Lit):
        return Lit(convert(r.atom), r.action)
    if isinstance(r, Zero):
        return r
    return r.with_children([resolve_atoms(c, convert) for c in r.children])


def render(r: StarExp) -> str:
    return _r(r, 0)


def _r(r, ctx: int) -> str:
    if isinstance(r, Zero):
        return "0"
    if isinstance(r, Lit):
        return f"a{r.atom}.{r.action}"
    if isinstance(r, Plus):
        s = f"{_r(r.left, 1)} + {_r(r.right, 2)}"
        return f"({s})" if ctx > 1 else s
    if isinstance(r, Seq):
        s = f"{_r(r.left, 2)} {_r(r.right, 3)}"
        return f"({s})" if ctx > 2 else s
    if isinstance(r, Star):
        s = f"{_r(r.left, 3)} * {_r(r.right, 4)}"
        return f"({s})" if ctx > 3 else s
    raise TypeError(f"not a star expression: {r!r}")


def actions_in(r: StarExp) -> list[str]:
    out: dict[str, None] = {}
    stack = [r]
    while stack:
        x = stack.pop()
        if isinstance(x, Lit):
            out[x.action] = None
        stack.extend(reversed(x.children))
    return list(out)


def max_atom(r: StarExp) -> int:
    if isinstance(r, Lit):
        return r.atom
    return max((max_atom(c) for c in r.children), default=-1)
