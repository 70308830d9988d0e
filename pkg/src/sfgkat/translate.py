"""Translations between skip-free GKAT and deterministic one-free star expressions."""
from __future__ import annotations

from dataclasses import dataclass

from .bool_algebra import AtomSet, bits_of, minterm, to_bexp
from .equivalence import bisim_lts
from .errors import DeterminismError
from .small_step import derive_star, star_derivative
from .syntax import Signature, render
from .syntax import skipfree as sf
from .syntax import star as st


def _bits(b, n_atoms: int) -> int:
    if isinstance(b, AtomSet):
        return b.bits
    return b & ((1 << n_atoms) - 1) if n_atoms else b


def guard_star(b: AtomSet | int, r: st.StarExp) -> st.StarExp:
    """``b·r``: keep exactly the initial transitions whose atom lies in ``b``."""
    bits = b.bits if isinstance(b, AtomSet) else b
    return _guard(bits, r)


def _guard(bits: int, r: st.StarExp) -> st.StarExp:
    if isinstance(r, st.Zero):
        return r
    if isinstance(r, st.Lit):
        return r if bits >> r.atom & 1 else st.ZERO
    if isinstance(r, st.Plus):
        return st.Plus(_guard(bits, r.left), _guard(bits, r.right))
    if isinstance(r, st.Seq):
        return st.Seq(_guard(bits, r.left), r.right)
    if isinstance(r, st.Star):
        return st.Plus(st.Seq(_guard(bits, r.left), r), _guard(bits, r.right))
    raise TypeError(f"not a star expression: {r!r}")


def sum_right(terms: list) -> st.StarExp:
    """Right-nested sum; the empty sum is 0."""
    if not terms:
        return st.ZERO
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = st.Plus(t, out)
    return out


def gtr(e: sf.SkipFreeExp, sig: Signature) -> st.StarExp:
    u = sig.universe
    full = u.full_bits
    if isinstance(e, sf.Zero):
        return st.ZERO
    if isinstance(e, sf.Act):
        return sum_right([st.Lit(a, e.name) for a in range(sig.n_atoms)])
    if isinstance(e, sf.Guard):
        b = bits_of(e.b, u)
        return st.Plus(_guard(b, gtr(e.left, sig)), _guard(full & ~b, gtr(e.right, sig)))
    if isinstance(e, sf.Seq):
        return st.Seq(gtr(e.left, sig), gtr(e.right, sig))
    if isinstance(e, sf.While):
        b = bits_of(e.b, u)
        return st.Star(_guard(b, gtr(e.body, sig)), _guard(full & ~b, gtr(e.exit, sig)))
    raise TypeError(f"not a skip-free expression: {e!r}")


def initial_bits(r: st.StarExp) -> int:
    out = 0
    for bits, _, _ in star_derivative(r):
        out |= bits
    return out


def initial_atoms(r: st.StarExp, sig: Signature) -> AtomSet:
    return AtomSet(initial_bits(r), sig.n_atoms)


@dataclass(frozen=True)
class SeparationWitness:
    test: AtomSet
    maximal: bool = True


def separates(test: int, r1: st.StarExp, r2: st.StarExp, sig: Signature) -> bool:
    """Semantic check that ``test·r1 ↔ r1`` and ``¬test·r2 ↔ r2``."""
    full = sig.universe.full_bits
    for bits, r in ((test, r1), (full & ~test, r2)):
        g = _guard(bits, r)
        if not bisim_lts(derive_star(g, sig), 0, derive_star(r, sig), 0).equivalent:
            return False
    return True


def separation(r1: st.StarExp, r2: st.StarExp, sig: Signature, verify: bool = True) -> SeparationWitness | None:
    i1, i2 = initial_bits(r1), initial_bits(r2)
    if i1 & i2:
        return None
    test = sig.universe.full_bits & ~i2
    if verify and not separates(test, r1, r2, sig):
        raise AssertionError(f"separation witness failed verification for {render(r1)} and {render(r2)}")
    return SeparationWitness(AtomSet(test, sig.n_atoms), True)


def is_deterministic_star(r: st.StarExp, sig: Signature, verify: bool = False) -> bool:
    return _nondeterministic_subterm(r, sig, verify) is None


def _nondeterministic_subterm(r, sig, verify):
    if isinstance(r, (st.Zero, st.Lit)):
        return None
    for c in r.children:
        bad = _nondeterministic_subterm(c, sig, verify)
        if bad is not None:
            return bad
    if isinstance(r, (st.Plus, st.Star)) and separation(r.left, r.right, sig, verify) is None:
        return r
    return None


def rtg(r: st.StarExp, sig: Signature) -> sf.SkipFreeExp:
    bad = _nondeterministic_subterm(r, sig, False)
    if bad is not None:
        raise DeterminismError(f"not a deterministic star expression: the operands of {render(bad)} are not separated")
    return _rtg(r, sig)


def _rtg(r, sig):
    u = sig.universe
    if isinstance(r, st.Zero):
        return sf.ZERO
    if isinstance(r, st.Lit):
        return sf.Guard(minterm(u, r.atom), sf.Act(r.action), sf.ZERO)
    if isinstance(r, st.Seq):
        return sf.Seq(_rtg(r.left, sig), _rtg(r.right, sig))
    w = separation(r.left, r.right, sig, verify=False)
    b = to_bexp(w.test, u)
    if isinstance(r, st.Plus):
        return sf.Guard(b, _rtg(r.left, sig), _rtg(r.right, sig))
    if isinstance(r, st.Star):
        return sf.While(_rtg(r.left, sig), b, _rtg(r.right, sig))
    raise TypeError(f"not a star expression: {r!r}")
