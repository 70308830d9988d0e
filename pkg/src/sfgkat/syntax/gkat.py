"""Full GKAT expressions, with tests usable as assertions and unary loops."""
from __future__ import annotations

from ..bool_algebra import ONE, ZERO as BZERO, And, BExp, BOne, BZero, Not, Or, Test, render_bexp
from . import skipfree as sf
from .common import Expr, Parser


class GkatExp(Expr):
    __slots__ = ()


class Bool(GkatExp):
    __slots__ = ("b",)
    fields = ("b",)


class Act(GkatExp):
    __slots__ = ("name",)
    fields = ("name",)


class Guard(GkatExp):
    __slots__ = ("b", "left", "right")
    fields = ("b", "left", "right")
    kids = ("left", "right")


class Seq(GkatExp):
    __slots__ = ("left", "right")
    fields = ("left", "right")
    kids = ("left", "right")


class Loop(GkatExp):
    """``body^[b]``"""

    __slots__ = ("body", "b")
    fields = ("body", "b")
    kids = ("body",)


ZERO = Bool(BZERO)
ONE_EXP = Bool(ONE)


class GkatParser(Parser):
    """Precedence, loosest first: ``+[b]``, ``.``, ``|``, ``&``, ``!``, postfix ``^[b]``."""

    def __init__(self, text, tests: set[str], line_offset=0):
        super().__init__(text, line_offset)
        self.tests = tests
        self.actions_seen: list = []
        self.tests_seen: list = []

    def note_test(self, tok):
        self.tests_seen.append(tok)

    def parse(self) -> GkatExp:
        e = self.plus()
        self.finish()
        return e

    def bracket(self) -> BExp:
        self.expect("[")
        b = self.bexp()
        self.expect("]")
        return b

    def plus(self):
        e = self.seq()
        while self.at("+"):
            self.advance()
            b = self.bracket()
            e = Guard(b, e, self.seq())
        return e

    def seq(self):
        e = self.g_or()
        while self.at("."):
            self.advance()
            e = Seq(e, self.g_or())
        return e

    def _bool(self, e, op_tok):
        if not isinstance(e, Bool):
            self.error(f"operands of {op_tok.text!r} must be tests", op_tok)
        return e.b

    def g_or(self):
        e = self.g_and()
        while self.at("|"):
            op = self.advance()
            rhs = self.g_and()
            e = Bool(Or(self._bool(e, op), self._bool(rhs, op)))
        return e

    def g_and(self):
        e = self.g_not()
        while self.at("&"):
            op = self.advance()
            rhs = self.g_not()
            e = Bool(And(self._bool(e, op), self._bool(rhs, op)))
        return e

    def g_not(self):
        if self.at("!"):
            op = self.advance()
            return Bool(Not(self._bool(self.g_not(), op)))
        return self.postfix()

    def postfix(self):
        e = self.primary()
        while self.at("^"):
            self.advance()
            e = Loop(e, self.bracket())
        return e

    def primary(self):
        t = self.tok
        if t.kind == "num" and t.text in ("0", "1"):
            self.advance()
            return ZERO if t.text == "0" else ONE_EXP
        if t.kind == "ident":
            self.advance()
            if t.text in self.tests:
                self.tests_seen.append(t)
                return Bool(Test(t.text))
            self.actions_seen.append(t)
            return Act(t.text)
        if self.at("("):
            self.advance()
            e = self.plus()
            self.expect(")")
            return e
        self.error(f"expected an expression, found {t.text or 'end of input'!r}")


def render(e: GkatExp) -> str:
    return _r(e, 0)


def _rb(b: BExp, ctx: int) -> str:
    if isinstance(b, (BZero, BOne, Test)):
        return render_bexp(b)
    if isinstance(b, Or):
        s = f"{_rb(b.left, 3)} | {_rb(b.right, 4)}"
        return f"({s})" if ctx > 3 else s
    if isinstance(b, And):
        s = f"{_rb(b.left, 4)} & {_rb(b.right, 5)}"
        return f"({s})" if ctx > 4 else s
    if isinstance(b, Not):
        s = "!" + _rb(b.arg, 5)
        return f"({s})" if ctx > 5 else s
    raise TypeError(f"not a Boolean expression: {b!r}")


def _r(e, ctx: int) -> str:
    if isinstance(e, Bool):
        return _rb(e.b, ctx)
    if isinstance(e, Act):
        return e.name
    if isinstance(e, Guard):
        s = f"{_r(e.left, 1)} +[{render_bexp(e.b)}] {_r(e.right, 2)}"
        return f"({s})" if ctx > 1 else s
    if isinstance(e, Seq):
        s = f"{_r(e.left, 2)} . {_r(e.right, 3)}"
        return f"({s})" if ctx > 2 else s
    if isinstance(e, Loop):
        s = f"{_r(e.body, 6)}^[{render_bexp(e.b)}]"
        return f"({s})" if ctx > 6 else s
    raise TypeError(f"not a GKAT expression: {e!r}")


def embed_syntax(e: sf.SkipFreeExp) -> GkatExp:
    if isinstance(e, sf.Zero):
        return ZERO
    if isinstance(e, sf.Act):
        return Act(e.name)
    if isinstance(e, sf.Guard):
        return Guard(e.b, embed_syntax(e.left), embed_syntax(e.right))
    if isinstance(e, sf.Seq):
        return Seq(embed_syntax(e.left), embed_syntax(e.right))
    if isinstance(e, sf.While):
        return Seq(Loop(embed_syntax(e.body), e.b), embed_syntax(e.exit))
    raise TypeError(f"not a skip-free expression: {e!r}")


def actions_in(e: GkatExp) -> list[str]:
    out: dict[str, None] = {}
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Act):
            out[x.name] = None
        stack.extend(reversed(x.children))
    return list(out)
