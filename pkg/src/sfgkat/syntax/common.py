from __future__ import annotations

import re
from dataclasses import dataclass

from ..bool_algebra import ONE, ZERO, And, BExp, Not, Or, Test, TestUniverse, tests_in
from ..errors import ParseError, UniverseError
from ..terms import Node


@dataclass(frozen=True)
class Signature:
    universe: TestUniverse
    actions: tuple[str, ...]

    def __post_init__(self):
        actions = tuple(self.actions)
        object.__setattr__(self, "actions", actions)
        if any(not a for a in actions) or len(set(actions)) != len(actions):
            raise UniverseError(f"bad action list {list(actions)}")
        clash = set(actions) & set(self.universe.tests)
        if clash:
            raise UniverseError(f"names used both as tests and actions: {sorted(clash)}")

    @classmethod
    def of(cls, tests=(), actions=()) -> "Signature":
        return cls(TestUniverse(tuple(tests)), tuple(actions))

    @property
    def tests(self) -> tuple[str, ...]:
        return self.universe.tests

    @property
    def n_atoms(self) -> int:
        return self.universe.n_atoms

    def header(self) -> str:
        return f"tests: {','.join(self.tests)};\nactions: {','.join(self.actions)};\n"


class Expr(Node):
    __slots__ = ()
    # names of fields holding subexpressions, in child-index order
    kids: tuple = ()

    @property
    def children(self) -> tuple:
        return tuple(getattr(self, k) for k in self.kids)

    def with_children(self, new) -> "Expr":
        new = list(new)
        args = []
        for f in self.fields:
            args.append(new.pop(0) if f in self.kids else getattr(self, f))
        return type(self)(*args)


def subterm(e: Expr, path) -> Expr:
    for i in path:
        kids = e.children
        if not 0 <= i < len(kids):
            raise IndexError(f"no child {i} in {type(e).__name__}")
        e = kids[i]
    return e


def replace_at(e: Expr, path, new: Expr) -> Expr:
    path = list(path)
    if not path:
        return new
    kids = list(e.children)
    i = path[0]
    if not 0 <= i < len(kids):
        raise IndexError(f"no child {i} in {type(e).__name__}")
    kids[i] = replace_at(kids[i], path[1:], new)
    return e.with_children(kids)


def size(e: Expr) -> int:
    return 1 + sum(size(c) for c in e.children)


def positions(e: Expr, prefix=()):
    yield prefix
    for i, c in enumerate(e.children):
        yield from positions(c, prefix + (i,))


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<num>[0-9]+)|(?P<sym>[()\[\]{},.+*^!&|;:])"
)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            toks.append(Tok(kind, m.group(), line, m.start() - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = m.start() + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


_HEADER = re.compile(r"\s*(?:#[^\n]*\s*)*(tests|actions)\s*:\s*([^;]*);")


def split_header(text: str) -> tuple[dict, str, int]:
    """Strip leading ``tests:`` / ``actions:`` declarations.

    Returns the declarations, the remaining text, and the number of newlines
    consumed (to keep error positions meaningful).
    """
    decl: dict[str, tuple[str, ...]] = {}
    pos = 0
    while True:
        m = _HEADER.match(text, pos)
        if m is None:
            break
        key = m.group(1)
        if key in decl:
            raise ParseError(f"duplicate {key} declaration", text.count("\n", 0, m.start(1)) + 1, 1)
        names = tuple(n.strip() for n in m.group(2).split(",") if n.strip())
        for n in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", n):
                raise ParseError(f"bad name {n!r} in {key} declaration", text.count("\n", 0, m.start(1)) + 1, 1)
        decl[key] = names
        pos = m.end()
    return decl, text[pos:], text.count("\n", 0, pos)


class Parser:
    """Recursive-descent helpers shared by the three expression grammars."""

    def __init__(self, text: str, line_offset: int = 0):
        self.toks = tokenize(text)
        for t in self.toks:
            t.line += line_offset
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, tok: Tok | None = None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind == "sym" and self.tok.text == text

    def advance(self) -> Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def finish(self):
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")

    # Boolean expressions: | < & < !
    def bexp(self) -> BExp:
        b = self.b_and()
        while self.at("|"):
            self.advance()
            b = Or(b, self.b_and())
        return b

    def b_and(self) -> BExp:
        b = self.b_not()
        while self.at("&"):
            self.advance()
            b = And(b, self.b_not())
        return b

    def b_not(self) -> BExp:
        if self.at("!"):
            self.advance()
            return Not(self.b_not())
        return self.b_atom()

    def b_atom(self) -> BExp:
        t = self.tok
        if t.kind == "num" and t.text in ("0", "1"):
            self.advance()
            return ZERO if t.text == "0" else ONE
        if t.kind == "ident":
            self.advance()
            self.note_test(t)
            return Test(t.text)
        if self.at("("):
            self.advance()
            b = self.bexp()
            self.expect(")")
            return b
        self.error(f"expected a Boolean expression, found {t.text or 'end of input'!r}")

    def note_test(self, tok: Tok):
        """Hook for symbol checking; subclasses override."""


def parse_bexp(text: str, universe: TestUniverse | None = None) -> BExp:
    p = Parser(text)
    b = p.bexp()
    p.finish()
    if universe is not None:
        unknown = tests_in(b) - set(universe.tests)
        if unknown:
            raise ParseError(f"unknown test {sorted(unknown)[0]!r}")
    return b
