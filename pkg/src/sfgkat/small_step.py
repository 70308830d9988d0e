"""Transition systems built from expressions by syntactic derivatives.

Every automaton stores, per state, a tuple of transition families
``(bits, action, target)``: ``bits`` is a bitmask over atoms, ``target`` is a
state index or ``ACCEPT``.  Skip-free and GKAT automata have pairwise disjoint
families per state; LTS families may overlap.  A GKAT acceptance is the family
``(bits, None, ACCEPT)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterator

from . import config
from .bool_algebra import Atom, atom_of_tests, bits_of, iter_bits, lowest_bit, render_bexp, to_bexp
from .errors import ExplosionError, NondeterminismError, ParseError
from .syntax import Signature, render
from .syntax import gkat as gk
from .syntax import skipfree as sf
from .syntax import star as st

ACCEPT = -1

Family = tuple  # (bits, action | None, target)


@dataclass(frozen=True)
class TransitionSystem:
    sig: Signature
    labels: tuple
    start: int
    trans: tuple

    kind = "abstract"

    @property
    def n_states(self) -> int:
        return len(self.labels)

    @property
    def n_atoms(self) -> int:
        return self.sig.n_atoms

    def families(self, x: int) -> tuple:
        return self.trans[x]

    def label_text(self, x: int) -> str:
        lab = self.labels[x]
        return lab if isinstance(lab, str) else render(lab)

    def edges(self) -> Iterator[tuple[int, int, str | None, int]]:
        for x, fams in enumerate(self.trans):
            for bits, p, t in fams:
                yield x, bits, p, t

    def to_json(self) -> dict:
        def ref(t):
            return "accept" if t == ACCEPT else t

        return {
            "kind": self.kind,
            "tests": list(self.sig.tests),
            "actions": list(self.sig.actions),
            "states": [{"id": i, "label": self.label_text(i)} for i in range(self.n_states)],
            "start": self.start,
            "transitions": [
                {"from": x, "atoms": list(iter_bits(bits)), "action": p, "to": ref(t)} for x, bits, p, t in self.edges()
            ],
        }

    def to_dot(self) -> str:
        u = self.sig.universe
        lines = [f"digraph {self.kind.replace('-', '_')} {{", "  rankdir=LR;", '  __start [shape=point];']
        for i in range(self.n_states):
            lines.append(f"  s{i} [label={json.dumps(self.label_text(i))}];")
        lines.append('  accept [label="✓", shape=doublecircle];')
        lines.append(f"  __start -> s{self.start};")
        for x, bits, p, t in self.edges():
            guard = render_bexp(to_bexp(bits, u))
            label = guard if p is None else f"{guard} | {p}"
            dst = "accept" if t == ACCEPT else f"s{t}"
            lines.append(f"  s{x} -> {dst} [label={json.dumps(label)}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


class SkipFreeAutomaton(TransitionSystem):
    kind = "skipfree"

    def step(self, x: int, atom: Atom):
        """``None`` for rejection, else ``(action, target)``."""
        for bits, p, t in self.trans[x]:
            if bits >> atom & 1:
                return p, t
        return None


class Lts(TransitionSystem):
    kind = "lts"

    def successors(self, x: int) -> set[tuple[Atom, str, int]]:
        return {(a, p, t) for bits, p, t in self.trans[x] for a in iter_bits(bits)}

    def is_deterministic(self) -> bool:
        for fams in self.trans:
            seen = 0
            for bits, _, _ in fams:
                if seen & bits:
                    return False
                seen |= bits
        return True


class GkatAutomaton(TransitionSystem):
    kind = "gkat"

    def step(self, x: int, atom: Atom):
        """``None`` for rejection, ``ACCEPT``, or ``(action, target)``."""
        for bits, p, t in self.trans[x]:
            if bits >> atom & 1:
                return ACCEPT if p is None else (p, t)
        return None


def merge_families(fams) -> tuple:
    """Join families sharing (action, target); order by lowest atom."""
    acc: dict = {}
    for bits, p, t in fams:
        if bits:
            acc[(p, t)] = acc.get((p, t), 0) | bits
    out = [(bits, p, t) for (p, t), bits in acc.items()]
    out.sort(key=lambda f: (lowest_bit(f[0]), f[1] or "", f[2]))
    return tuple(out)


def _closure(start, derive: Callable, sig: Signature, cls, accept_marker):
    index = {start: 0}
    labels = [start]
    trans = []
    i = 0
    while i < len(labels):
        fams = []
        for bits, p, t in derive(labels[i]):
            if t is accept_marker:
                fams.append((bits, p, ACCEPT))
                continue
            j = index.get(t)
            if j is None:
                if len(labels) >= config.MAX_STATES:
                    raise ExplosionError(f"more than {config.MAX_STATES} states reachable")
                j = index[t] = len(labels)
                labels.append(t)
            fams.append((bits, p, j))
        trans.append(merge_families(fams))
        i += 1
    return cls(sig, tuple(labels), 0, tuple(trans))


class _Check:
    def __repr__(self):
        return "✓"


CHECK = _Check()


def skipfree_derivative(e: sf.SkipFreeExp, sig: Signature, memo: dict | None = None) -> list:
    """Families ``(bits, action, target-expression | CHECK)`` of one expression."""
    if memo is not None and e in memo:
        return memo[e]
    u = sig.universe
    full = u.full_bits
    if isinstance(e, sf.Zero):
        out = []
    elif isinstance(e, sf.Act):
        out = [(full, e.name, CHECK)]
    elif isinstance(e, sf.Guard):
        b = bits_of(e.b, u)
        out = [(bits & b, p, t) for bits, p, t in skipfree_derivative(e.left, sig, memo)]
        out += [(bits & ~b & full, p, t) for bits, p, t in skipfree_derivative(e.right, sig, memo)]
    elif isinstance(e, sf.Seq):
        out = [
            (bits, p, e.right if t is CHECK else sf.Seq(t, e.right))
            for bits, p, t in skipfree_derivative(e.left, sig, memo)
        ]
    elif isinstance(e, sf.While):
        b = bits_of(e.b, u)
        out = [
            (bits & b, p, e if t is CHECK else sf.Seq(t, e))
            for bits, p, t in skipfree_derivative(e.body, sig, memo)
        ]
        out += [(bits & ~b & full, p, t) for bits, p, t in skipfree_derivative(e.exit, sig, memo)]
    else:
        raise TypeError(f"not a skip-free expression: {e!r}")
    out = [f for f in out if f[0]]
    if memo is not None:
        memo[e] = out
    return out


def star_derivative(r: st.StarExp, memo: dict | None = None) -> list:
    if memo is not None and r in memo:
        return memo[r]
    if isinstance(r, st.Zero):
        out = []
    elif isinstance(r, st.Lit):
        out = [(1 << r.atom, r.action, CHECK)]
    elif isinstance(r, st.Plus):
        out = star_derivative(r.left, memo) + star_derivative(r.right, memo)
    elif isinstance(r, st.Seq):
        out = [(bits, p, r.right if t is CHECK else st.Seq(t, r.right)) for bits, p, t in star_derivative(r.left, memo)]
    elif isinstance(r, st.Star):
        out = [(bits, p, r if t is CHECK else st.Seq(t, r)) for bits, p, t in star_derivative(r.left, memo)]
        out += star_derivative(r.right, memo)
    else:
        raise TypeError(f"not a star expression: {r!r}")
    if memo is not None:
        memo[r] = out
    return out


def semi(e1: gk.GkatExp, e2: gk.GkatExp) -> gk.GkatExp:
    """Sequencing that drops a leading structural 1 and nothing else."""
    return e2 if e1 == gk.ONE_EXP else gk.Seq(e1, e2)


def gkat_delta(e: gk.GkatExp, sig: Signature, memo: dict | None = None) -> tuple[int, list]:
    """(accepting atoms, families ``(bits, action, target)``) of one expression."""
    if memo is not None and e in memo:
        return memo[e]
    u = sig.universe
    full = u.full_bits
    if isinstance(e, gk.Bool):
        out = (bits_of(e.b, u), [])
    elif isinstance(e, gk.Act):
        out = (0, [(full, e.name, gk.ONE_EXP)])
    elif isinstance(e, gk.Guard):
        b = bits_of(e.b, u)
        nb = full & ~b
        acc_l, fam_l = gkat_delta(e.left, sig, memo)
        acc_r, fam_r = gkat_delta(e.right, sig, memo)
        fams = [(bits & b, p, t) for bits, p, t in fam_l] + [(bits & nb, p, t) for bits, p, t in fam_r]
        out = ((acc_l & b) | (acc_r & nb), fams)
    elif isinstance(e, gk.Seq):
        acc_l, fam_l = gkat_delta(e.left, sig, memo)
        acc_r, fam_r = gkat_delta(e.right, sig, memo)
        fams = [(bits, p, semi(t, e.right)) for bits, p, t in fam_l]
        fams += [(bits & acc_l, p, t) for bits, p, t in fam_r]
        out = (acc_l & acc_r, fams)
    elif isinstance(e, gk.Loop):
        b = bits_of(e.b, u)
        _, fam = gkat_delta(e.body, sig, memo)
        out = (full & ~b, [(bits & b, p, semi(t, e)) for bits, p, t in fam])
    else:
        raise TypeError(f"not a GKAT expression: {e!r}")
    out = (out[0], [f for f in out[1] if f[0]])
    if memo is not None:
        memo[e] = out
    return out


def derive_skipfree(e: sf.SkipFreeExp, sig: Signature) -> SkipFreeAutomaton:
    memo: dict = {}
    return _closure(e, lambda x: skipfree_derivative(x, sig, memo), sig, SkipFreeAutomaton, CHECK)


def derive_star(r: st.StarExp, sig: Signature) -> Lts:
    memo: dict = {}
    return _closure(r, lambda x: star_derivative(x, memo), sig, Lts, CHECK)


def derive_gkat(e: gk.GkatExp, sig: Signature) -> GkatAutomaton:
    memo: dict = {}

    def derive(x):
        acc, fams = gkat_delta(x, sig, memo)
        out = [(acc, None, CHECK)] if acc else []
        return out + fams

    return _closure(e, derive, sig, GkatAutomaton, CHECK)


def grph_star(a: SkipFreeAutomaton) -> Lts:
    return Lts(a.sig, a.labels, a.start, a.trans)


def func_star(l: Lts) -> SkipFreeAutomaton:
    for x, fams in enumerate(l.trans):
        for i, (b1, p1, t1) in enumerate(fams):
            for b2, p2, t2 in fams[i + 1 :]:
                both = b1 & b2
                if both:
                    raise NondeterminismError(
                        f"state {x} ({l.label_text(x)}) has two transitions on atom {lowest_bit(both)}: "
                        f"{p1} -> {_ref(t1)} and {p2} -> {_ref(t2)}"
                    )
    return SkipFreeAutomaton(l.sig, l.labels, l.start, l.trans)


def _ref(t: int) -> str:
    return "accept" if t == ACCEPT else str(t)


def embed_automaton(a: SkipFreeAutomaton) -> GkatAutomaton:
    top = a.n_states
    trans = [tuple((bits, p, top if t == ACCEPT else t) for bits, p, t in fams) for fams in a.trans]
    trans = [merge_families(f) for f in trans]
    trans.append(((a.sig.universe.full_bits, None, ACCEPT),) if a.n_atoms else ())
    return GkatAutomaton(a.sig, a.labels + ("⊤",), a.start, tuple(trans))


def restrict_reachable(a: TransitionSystem) -> TransitionSystem:
    """Keep only states reachable from the start, renumbered in BFS order."""
    order = [a.start]
    index = {a.start: 0}
    i = 0
    while i < len(order):
        for _, _, t in a.trans[order[i]]:
            if t != ACCEPT and t not in index:
                index[t] = len(order)
                order.append(t)
        i += 1
    trans = tuple(
        merge_families((bits, p, ACCEPT if t == ACCEPT else index[t]) for bits, p, t in a.trans[x]) for x in order
    )
    return type(a)(a.sig, tuple(a.labels[x] for x in order), 0, trans)


_KINDS = {"skipfree": SkipFreeAutomaton, "lts": Lts, "gkat": GkatAutomaton}


def from_json(data: dict, kind: str | None = None, sig: Signature | None = None) -> TransitionSystem:
    """Build a transition system from the exported JSON layout.

    State ids may be any JSON scalars; atoms may be indices or lists of test names.
    """
    kind = kind or data.get("kind", "lts")
    if kind not in _KINDS:
        raise ParseError(f"unknown automaton kind {kind!r}")
    if sig is None:
        sig = Signature.of(data.get("tests", ()), data.get("actions", ()))
    try:
        states = data["states"]
        ids = [s["id"] if isinstance(s, dict) else s for s in states]
        labels = [str(s.get("label", s["id"])) if isinstance(s, dict) else str(s) for s in states]
        index = {i: n for n, i in enumerate(ids)}
        if len(index) != len(ids):
            raise ParseError("duplicate state ids")
        start = index[data.get("start", ids[0] if ids else None)]
        per_state: list[list] = [[] for _ in ids]
        for tr in data.get("transitions", []):
            src = index[tr["from"]]
            dst = ACCEPT if tr["to"] == "accept" else index[tr["to"]]
            bits = 0
            for a in tr["atoms"]:
                atom = a if isinstance(a, int) else atom_of_tests(sig.universe, a)
                if not 0 <= atom < sig.n_atoms:
                    raise ParseError(f"atom {a} out of range")
                bits |= 1 << atom
            action = tr.get("action")
            if action is not None and action not in sig.actions:
                raise ParseError(f"unknown action {action!r}")
            if action is None and (kind != "gkat" or dst != ACCEPT):
                raise ParseError("only GKAT acceptances may omit the action")
            per_state[src].append((bits, action, dst))
    except KeyError as exc:
        raise ParseError(f"malformed automaton JSON: missing or unknown {exc}") from None
    cls = _KINDS[kind]
    trans = tuple(merge_families(f) if kind == "lts" else tuple(f) for f in per_state)
    if kind != "lts":
        for x, fams in enumerate(trans):
            seen = 0
            for bits, _, _ in fams:
                if seen & bits:
                    raise NondeterminismError(f"state {ids[x]} has overlapping transitions on atom {lowest_bit(seen & bits)}")
                seen |= bits
        trans = tuple(merge_families(f) for f in trans)
    return cls(sig, tuple(labels), start, trans)


def derive(e, sig: Signature) -> TransitionSystem:
    if isinstance(e, sf.SkipFreeExp):
        return derive_skipfree(e, sig)
    if isinstance(e, st.StarExp):
        return derive_star(e, sig)
    if isinstance(e, gk.GkatExp):
        return derive_gkat(e, sig)
    raise TypeError(f"not an expression: {e!r}")
