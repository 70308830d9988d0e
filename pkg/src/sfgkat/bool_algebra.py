"""Free Boolean algebra over a finite set of tests.

Atoms are plain ints: bit ``i`` of atom ``a`` says whether test ``i`` holds.
An :class:`AtomSet` is a bitmask over atoms, so bit ``a`` of ``AtomSet.bits``
is set iff atom ``a`` is a member.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .config import max_tests
from .errors import CapacityError, UniverseError
from .terms import Node

Atom = int


class BExp(Node):
    __slots__ = ()


class BZero(BExp):
    __slots__ = ()


class BOne(BExp):
    __slots__ = ()


class Test(BExp):
    __slots__ = ("name",)
    fields = ("name",)


class Or(BExp):
    __slots__ = ("left", "right")
    fields = ("left", "right")


class And(BExp):
    __slots__ = ("left", "right")
    fields = ("left", "right")


class Not(BExp):
    __slots__ = ("arg",)
    fields = ("arg",)


ZERO = BZero()
ONE = BOne()


@dataclass(frozen=True)
class TestUniverse:
    tests: tuple[str, ...] = ()

    def __post_init__(self):
        tests = tuple(self.tests)
        object.__setattr__(self, "tests", tests)
        if any(not isinstance(t, str) or not t for t in tests):
            raise UniverseError("test names must be nonempty strings")
        if len(set(tests)) != len(tests):
            raise UniverseError(f"duplicate test names in {list(tests)}")
        cap = max_tests()
        if len(tests) > cap:
            raise CapacityError(f"{len(tests)} tests exceed the configured maximum of {cap}")

    @property
    def capacity(self) -> int:
        return len(self.tests)

    @property
    def n_atoms(self) -> int:
        return 1 << len(self.tests)

    @property
    def full_bits(self) -> int:
        return (1 << self.n_atoms) - 1

    def index(self, name: str) -> int:
        try:
            return self.tests.index(name)
        except ValueError:
            raise UniverseError(f"unknown test {name!r}") from None

    def full(self) -> "AtomSet":
        return AtomSet(self.full_bits, self.n_atoms)

    def empty(self) -> "AtomSet":
        return AtomSet(0, self.n_atoms)


@dataclass(frozen=True)
class AtomSet:
    bits: int
    n_atoms: int

    def _check(self, other: "AtomSet"):
        if self.n_atoms != other.n_atoms:
            raise UniverseError("atom sets over different universes")

    def __or__(self, other):
        self._check(other)
        return AtomSet(self.bits | other.bits, self.n_atoms)

    def __and__(self, other):
        self._check(other)
        return AtomSet(self.bits & other.bits, self.n_atoms)

    def __sub__(self, other):
        self._check(other)
        return AtomSet(self.bits & ~other.bits, self.n_atoms)

    def __invert__(self):
        return AtomSet(((1 << self.n_atoms) - 1) ^ self.bits, self.n_atoms)

    def __contains__(self, atom: Atom) -> bool:
        return 0 <= atom < self.n_atoms and bool(self.bits >> atom & 1)

    def __iter__(self) -> Iterator[Atom]:
        return iter_bits(self.bits)

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __bool__(self) -> bool:
        return self.bits != 0

    def issubset(self, other: "AtomSet") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def is_full(self) -> bool:
        return self.bits == (1 << self.n_atoms) - 1

    def lowest(self) -> Atom:
        if not self.bits:
            raise ValueError("empty atom set")
        return lowest_bit(self.bits)


def lowest_bit(bits: int) -> int:
    return (bits & -bits).bit_length() - 1


def iter_bits(bits: int) -> Iterator[int]:
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


@lru_cache(maxsize=None)
def test_mask(n_tests: int, i: int) -> int:
    """Atoms (as a bitmask over 2**n_tests atoms) in which test ``i`` holds."""
    n_atoms = 1 << n_tests
    half = 1 << i
    period = half << 1
    block = ((1 << half) - 1) << half
    return block * (((1 << n_atoms) - 1) // ((1 << period) - 1))


def all_atoms(u: TestUniverse) -> list[Atom]:
    cap = max_tests()
    if u.capacity > cap:
        raise CapacityError(f"{u.capacity} tests exceed the configured maximum of {cap}")
    return list(range(u.n_atoms))


def atom_tests(u: TestUniverse, atom: Atom) -> tuple[str, ...]:
    """The tests that hold under ``atom``."""
    return tuple(t for i, t in enumerate(u.tests) if atom >> i & 1)


def atom_of_tests(u: TestUniverse, names) -> Atom:
    atom = 0
    for name in names:
        atom |= 1 << u.index(name)
    return atom


@lru_cache(maxsize=65536)
def _bits(b: BExp, u: TestUniverse) -> int:
    if isinstance(b, BZero):
        return 0
    if isinstance(b, BOne):
        return u.full_bits
    if isinstance(b, Test):
        return test_mask(u.capacity, u.index(b.name))
    if isinstance(b, Or):
        return _bits(b.left, u) | _bits(b.right, u)
    if isinstance(b, And):
        return _bits(b.left, u) & _bits(b.right, u)
    if isinstance(b, Not):
        return u.full_bits ^ _bits(b.arg, u)
    raise TypeError(f"not a Boolean expression: {b!r}")


def bits_of(b: BExp, u: TestUniverse) -> int:
    return _bits(b, u)


def atoms_of(b: BExp, u: TestUniverse) -> AtomSet:
    return AtomSet(_bits(b, u), u.n_atoms)


def entails(atom: Atom, b: BExp, u: TestUniverse) -> bool:
    if not 0 <= atom < u.n_atoms:
        raise UniverseError(f"atom {atom} out of range for {u.capacity} tests")
    return evaluate(b, u, atom)


def evaluate(b: BExp, u: TestUniverse, atom: Atom) -> bool:
    """Direct evaluation under one truth assignment (independent of the bitmask path)."""
    if isinstance(b, BZero):
        return False
    if isinstance(b, BOne):
        return True
    if isinstance(b, Test):
        return bool(atom >> u.index(b.name) & 1)
    if isinstance(b, Or):
        return evaluate(b.left, u, atom) or evaluate(b.right, u, atom)
    if isinstance(b, And):
        return evaluate(b.left, u, atom) and evaluate(b.right, u, atom)
    if isinstance(b, Not):
        return not evaluate(b.arg, u, atom)
    raise TypeError(f"not a Boolean expression: {b!r}")


def ba_equiv(b: BExp, c: BExp, u: TestUniverse) -> bool:
    return _bits(b, u) == _bits(c, u)


def tests_in(b: BExp) -> set[str]:
    if isinstance(b, Test):
        return {b.name}
    if isinstance(b, (Or, And)):
        return tests_in(b.left) | tests_in(b.right)
    if isinstance(b, Not):
        return tests_in(b.arg)
    return set()


def minterm(u: TestUniverse, atom: Atom) -> BExp:
    if not u.tests:
        return ONE
    out = None
    for i, t in enumerate(u.tests):
        lit = Test(t) if atom >> i & 1 else Not(Test(t))
        out = lit if out is None else And(out, lit)
    return out


def to_bexp(s: AtomSet | int, u: TestUniverse) -> BExp:
    """Canonical rendering: 0, 1, or minterms in ascending atom order."""
    bits = s.bits if isinstance(s, AtomSet) else s
    if bits == 0:
        return ZERO
    if bits == u.full_bits:
        return ONE
    out = None
    for atom in iter_bits(bits):
        m = minterm(u, atom)
        out = m if out is None else Or(out, m)
    return out


def render_bexp(b: BExp) -> str:
    return _render(b, 0)


# precedence levels: | = 1, & = 2, ! = 3
def _render(b: BExp, ctx: int) -> str:
    if isinstance(b, BZero):
        return "0"
    if isinstance(b, BOne):
        return "1"
    if isinstance(b, Test):
        return b.name
    if isinstance(b, Not):
        return "!" + _render(b.arg, 3)
    if isinstance(b, Or):
        text = f"{_render(b.left, 1)} | {_render(b.right, 2)}"
        return f"({text})" if ctx > 1 else text
    if isinstance(b, And):
        text = f"{_render(b.left, 2)} & {_render(b.right, 3)}"
        return f"({text})" if ctx > 2 else text
    raise TypeError(f"not a Boolean expression: {b!r}")
