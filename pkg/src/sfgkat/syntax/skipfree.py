"""Skip-free GKAT expressions: 0, actions, guarded choice, sequencing, binary loops."""
from __future__ import annotations

from ..bool_algebra import BExp, render_bexp
from .common import Expr, Parser


class SkipFreeExp(Expr):
    __slots__ = ()


class Zero(SkipFreeExp):
    __slots__ = ()


class Act(SkipFreeExp):
    __slots__ = ("name",)
    fields = ("name",)


class Guard(SkipFreeExp):
    """``left +[b] right``"""

    __slots__ = ("b", "left", "right")
    fields = ("b", "left", "right")
    kids = ("left", "right")


class Seq(SkipFreeExp):
    __slots__ = ("left", "right")
    fields = ("left", "right")
    kids = ("left", "right")


class While(SkipFreeExp):
    """``body *[b] exit``: repeat body while b holds, then run exit."""

    __slots__ = ("body", "b", "exit")
    fields = ("body", "b", "exit")
    kids = ("body", "exit")


ZERO = Zero()


def guarded(b: BExp, e: SkipFreeExp) -> SkipFreeExp:
    """The shorthand ``[b] e``, i.e. ``e +[b] 0``."""
    return Guard(b, e, ZERO)


class SkipFreeParser(Parser):
    def __init__(self, text, line_offset=0):
        super().__init__(text, line_offset)
        self.tests_seen: list = []
        self.actions_seen: list = []

    def note_test(self, tok):
        self.tests_seen.append(tok)

    def parse(self) -> SkipFreeExp:
        e = self.plus()
        self.finish()
        return e

    def plus(self):
        e = self.star()
        while self.at("+"):
            self.advance()
            b = self.bracket()
            e = Guard(b, e, self.star())
        return e

    def star(self):
        e = self.seq()
        while self.at("*"):
            self.advance()
            b = self.bracket()
            e = While(e, b, self.seq())
        return e

    def seq(self):
        e = self.unary()
        while self.at("."):
            self.advance()
            e = Seq(e, self.unary())
        return e

    def unary(self):
        if self.at("["):
            b = self.bracket()
            return Guard(b, self.unary(), ZERO)
        return self.primary()

    def bracket(self) -> BExp:
        self.expect("[")
        b = self.bexp()
        self.expect("]")
        return b

    def primary(self):
        t = self.tok
        if t.kind == "num" and t.text == "0":
            self.advance()
            return ZERO
        if t.kind == "ident":
            self.advance()
            self.actions_seen.append(t)
            return Act(t.text)
        if self.at("("):
            self.advance()
            e = self.plus()
            self.expect(")")
            return e
        self.error(f"expected an expression, found {t.text or 'end of input'!r}")


def render(e: SkipFreeExp) -> str:
    return _r(e, 0)


def _r(e, ctx: int) -> str:
    if isinstance(e, Zero):
        return "0"
    if isinstance(e, Act):
        return e.name
    if isinstance(e, Guard):
        s = f"{_r(e.left, 1)} +[{render_bexp(e.b)}] {_r(e.right, 2)}"
        return f"({s})" if ctx > 1 else s
    if isinstance(e, While):
        s = f"{_r(e.body, 2)} *[{render_bexp(e.b)}] {_r(e.exit, 3)}"
        return f"({s})" if ctx > 2 else s
    if isinstance(e, Seq):
        s = f"{_r(e.left, 3)} . {_r(e.right, 4)}"
        return f"({s})" if ctx > 3 else s
    raise TypeError(f"not a skip-free expression: {e!r}")


def actions_in(e: SkipFreeExp) -> list[str]:
    out: dict[str, None] = {}
    _walk_actions(e, out)
    return list(out)


def _walk_actions(e, out):
    if isinstance(e, Act):
        out[e.name] = None
    for c in e.children:
        _walk_actions(c, out)


def guards_in(e: SkipFreeExp) -> list[BExp]:
    out = []
    if isinstance(e, (Guard, While)):
        out.append(e.b)
    for c in e.children:
        out.extend(guards_in(c))
    return out


