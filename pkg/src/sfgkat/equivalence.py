"""Bisimilarity, dead states, pruning, language equivalence and semantic oracles."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

from .bool_algebra import Atom, Not, bits_of, evaluate, iter_bits, lowest_bit
from .errors import InterpretationError, UniverseError
from .small_step import (
    ACCEPT,
    GkatAutomaton,
    Lts,
    SkipFreeAutomaton,
    TransitionSystem,
    derive_gkat,
    derive_skipfree,
)
from .syntax import Signature
from .syntax import gkat as gk
from .syntax import skipfree as sf

KINDS = ("accept-vs-reject", "accept-vs-step", "reject-vs-step", "action-mismatch")


@dataclass(frozen=True)
class Trace:
    """A distinguishing run: ``steps`` are followed by both sides, then at
    ``atom`` they disagree as described by ``kind``.

    For language counterexamples ``word`` is a complete guarded trace accepted
    by exactly one side (``accepted_by`` is 1 or 2).
    """

    steps: tuple[tuple[Atom, str], ...]
    atom: Atom
    kind: str
    word: tuple[tuple[Atom, str], ...] | None = None
    accepted_by: int | None = None

    def to_json(self) -> dict:
        out = {"steps": [{"atom": a, "action": p} for a, p in self.steps], "atom": self.atom, "kind": self.kind}
        if self.word is not None:
            out["word"] = [{"atom": a, "action": p} for a, p in self.word]
            out["accepted_by"] = self.accepted_by
        return out


@dataclass(frozen=True)
class EquivVerdict:
    equivalent: bool
    witness: frozenset = field(default_factory=frozenset)
    counterexample: Trace | None = None

    def __bool__(self):
        return self.equivalent

    def to_json(self) -> dict:
        if self.equivalent:
            return {"result": "equivalent", "witness": sorted([list(p) for p in self.witness], key=_pair_key)}
        return {"result": "inequivalent", "counterexample": self.counterexample.to_json()}


def _pair_key(p):
    return tuple((0, x) if isinstance(x, int) else (1, str(x)) for x in p)


def _same_universe(a1: TransitionSystem, a2: TransitionSystem):
    if a1.sig.universe != a2.sig.universe:
        raise UniverseError(f"different test universes: {list(a1.sig.tests)} vs {list(a2.sig.tests)}")


def _one_sided_kind(target: int) -> str:
    return "accept-vs-reject" if target == ACCEPT else "reject-vs-step"


def _local(f1: tuple, f2: tuple):
    """Compare one state of each deterministic system.

    Returns ``(disagreement, successors)`` where ``disagreement`` is
    ``(atom, kind)`` for the smallest disagreeing atom or None, and
    ``successors`` lists ``(atom, action, x', y')`` in ascending atom order.
    """
    best = None
    cov1 = cov2 = 0
    for b, _, _ in f1:
        cov1 |= b
    for b, _, _ in f2:
        cov2 |= b
    only1, only2 = cov1 & ~cov2, cov2 & ~cov1
    for fams, only in ((f1, only1), (f2, only2)):
        if only:
            for b, _, t in fams:
                if b & only:
                    cand = (lowest_bit(b & only), _one_sided_kind(t))
                    if best is None or cand[0] < best[0]:
                        best = cand
    succ = []
    for b1, p1, t1 in f1:
        for b2, p2, t2 in f2:
            both = b1 & b2
            if not both:
                continue
            kind = None
            if p1 != p2:
                kind = "accept-vs-step" if p1 is None or p2 is None else "action-mismatch"
            elif (t1 == ACCEPT) != (t2 == ACCEPT):
                kind = "accept-vs-step"
            if kind is not None:
                cand = (lowest_bit(both), kind)
                if best is None or cand[0] < best[0]:
                    best = cand
            elif t1 != ACCEPT:
                succ.append((lowest_bit(both), p1, t1, t2))
    succ.sort()
    return best, succ


def _hopcroft_karp(a1: TransitionSystem, s1: int, a2: TransitionSystem, s2: int) -> EquivVerdict:
    _same_universe(a1, a2)
    n1 = a1.n_states
    parent = list(range(n1 + a2.n_states))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    pred = {(s1, s2): None}
    queue = deque([(s1, s2)])
    while queue:
        x, y = queue.popleft()
        rx, ry = find(x), find(n1 + y)
        if rx == ry:
            continue
        bad, succ = _local(a1.trans[x], a2.trans[y])
        if bad is not None:
            steps = []
            node = (x, y)
            while pred[node] is not None:
                node, atom, action = pred[node]
                steps.append((atom, action))
            steps.reverse()
            return EquivVerdict(False, counterexample=Trace(tuple(steps), bad[0], bad[1]))
        parent[rx] = ry
        for atom, action, tx, ty in succ:
            if (tx, ty) not in pred:
                pred[(tx, ty)] = ((x, y), atom, action)
                queue.append((tx, ty))
    return EquivVerdict(True, witness=_product_pairs(a1, s1, a2, s2))


def _product_pairs(a1, s1, a2, s2) -> frozenset:
    seen = {(s1, s2)}
    queue = deque(seen)
    while queue:
        x, y = queue.popleft()
        _, succ = _local(a1.trans[x], a2.trans[y])
        for _, _, tx, ty in succ:
            if (tx, ty) not in seen:
                seen.add((tx, ty))
                queue.append((tx, ty))
    return frozenset(seen)


def bisim_skipfree(a1: SkipFreeAutomaton, s1: int, a2: SkipFreeAutomaton, s2: int) -> EquivVerdict:
    return _hopcroft_karp(a1, s1, a2, s2)


def bisim_gkat(g1: GkatAutomaton, s1: int, g2: GkatAutomaton, s2: int) -> EquivVerdict:
    return _hopcroft_karp(g1, s1, g2, s2)


def is_bisimulation(a1: TransitionSystem, a2: TransitionSystem, rel: Iterable) -> bool:
    """Check the bisimulation clauses for deterministic systems directly."""
    rel = set(rel)
    for x, y in rel:
        bad, succ = _local(a1.trans[x], a2.trans[y])
        if bad is not None:
            return False
        if any((tx, ty) not in rel for _, _, tx, ty in succ):
            return False
    return True


# labelled transition systems: partition refinement on the disjoint union


def _lts_signature(fams, block, offset):
    sig: dict = {}
    for bits, p, t in fams:
        key = (p, "acc" if t == ACCEPT else block[offset + t])
        sig[key] = sig.get(key, 0) | bits
    return sig


def bisim_lts(l1: Lts, s1: int, l2: Lts, s2: int) -> EquivVerdict:
    _same_universe(l1, l2)
    n1 = l1.n_states
    systems = [(l1, 0, x) for x in range(n1)] + [(l2, n1, y) for y in range(l2.n_states)]
    block = [0] * len(systems)
    history = [block]
    while True:
        ids: dict = {}
        new = []
        for i, (l, off, x) in enumerate(systems):
            sig = _lts_signature(l.trans[x], block, off)
            key = (block[i], frozenset(sig.items()))
            new.append(ids.setdefault(key, len(ids)))
        stable = len(ids) == len(set(block))
        block = new
        history.append(block)
        if stable:
            break
    if block[s1] == block[n1 + s2]:
        witness = frozenset(
            (x, y) for x in range(n1) for y in range(l2.n_states) if block[x] == block[n1 + y]
        )
        return EquivVerdict(True, witness=witness)
    return EquivVerdict(False, counterexample=_lts_counterexample(l1, s1, l2, s2, history))


def _lts_counterexample(l1, s1, l2, s2, history) -> Trace:
    """Walk down the refinement history: at each pair, pick the smallest
    (atom, action) on which the previous partition tells the sides apart."""
    n1 = l1.n_states
    steps = []
    x, y = s1, s2
    while True:
        k = next(k for k, blk in enumerate(history) if blk[x] != blk[n1 + y])
        prev = history[k - 1]
        d1 = _lts_signature(l1.trans[x], prev, 0)
        d2 = _lts_signature(l2.trans[y], prev, n1)
        cands = []
        for key in set(d1) | set(d2):
            diff = d1.get(key, 0) ^ d2.get(key, 0)
            if diff:
                atom = lowest_bit(diff)
                side = 1 if d1.get(key, 0) >> atom & 1 else 2
                cands.append((atom, side, str(key), key))
        atom, side, _, (action, target_block) = min(cands)
        if side == 1:
            here, hx, there, tx, off_here = l1, x, l2, y, 0
        else:
            here, hx, there, tx, off_here = l2, y, l1, x, n1
        at_atom = [(p, t) for b, p, t in there.trans[tx] if b >> atom & 1]
        theirs = [t for p, t in at_atom if p == action]
        if not at_atom:
            kind = "accept-vs-reject" if target_block == "acc" else "reject-vs-step"
            return Trace(tuple(steps), atom, kind)
        if not theirs:
            return Trace(tuple(steps), atom, "action-mismatch")
        their_states = sorted(t for t in theirs if t != ACCEPT)
        if target_block == "acc" or not their_states:
            return Trace(tuple(steps), atom, "accept-vs-step")
        mine = min(
            t for b, p, t in here.trans[hx]
            if p == action and b >> atom & 1 and t != ACCEPT and prev[off_here + t] == target_block
        )
        steps.append((atom, action))
        if side == 1:
            x, y = mine, their_states[0]
        else:
            x, y = their_states[0], mine


# dead states and pruning


def dead_states(a: TransitionSystem) -> frozenset:
    """States from which no accepting transition is reachable."""
    preds: list[set] = [set() for _ in range(a.n_states)]
    live = set()
    for x, fams in enumerate(a.trans):
        for _, _, t in fams:
            if t == ACCEPT:
                live.add(x)
            else:
                preds[t].add(x)
    queue = deque(live)
    while queue:
        y = queue.popleft()
        for x in preds[y]:
            if x not in live:
                live.add(x)
                queue.append(x)
    return frozenset(range(a.n_states)) - live


def prune_automaton(a: TransitionSystem) -> TransitionSystem:
    dead = dead_states(a)
    trans = tuple(tuple(f for f in fams if f[2] == ACCEPT or f[2] not in dead) for fams in a.trans)
    return type(a)(a.sig, a.labels, a.start, trans)


def is_dead(e: sf.SkipFreeExp, sig: Signature) -> bool:
    return _is_dead(e, sig)


@lru_cache(maxsize=65536)
def _is_dead(e, sig) -> bool:
    a = derive_skipfree(e, sig)
    return a.start in dead_states(a)


def prune_expr(e: sf.SkipFreeExp, sig: Signature) -> sf.SkipFreeExp:
    if isinstance(e, (sf.Zero, sf.Act)):
        return e
    if isinstance(e, sf.Guard):
        return sf.Guard(e.b, prune_expr(e.left, sig), prune_expr(e.right, sig))
    if isinstance(e, sf.Seq):
        if is_dead(e.right, sig):
            return sf.ZERO
        return sf.Seq(prune_expr(e.left, sig), prune_expr(e.right, sig))
    if isinstance(e, sf.While):
        if is_dead(sf.Guard(e.b, sf.ZERO, e.exit), sig):
            return sf.ZERO
        return sf.While(prune_expr(e.body, sig), e.b, prune_expr(e.exit, sig))
    raise TypeError(f"not a skip-free expression: {e!r}")


# language equivalence


def shortest_accepted(a: TransitionSystem, x: int) -> tuple | None:
    """A shortest accepted trace from ``x`` (smallest atoms first), or None."""
    pred = {x: None}
    queue = deque([x])
    while queue:
        y = queue.popleft()
        fams = sorted(a.trans[y], key=lambda f: lowest_bit(f[0]))
        for bits, p, t in fams:
            if t == ACCEPT:
                word = [(lowest_bit(bits), p)]
                node = y
                while pred[node] is not None:
                    node, atom, action = pred[node]
                    word.append((atom, action))
                word.reverse()
                return tuple(word)
        for bits, p, t in fams:
            if t not in pred:
                pred[t] = (y, lowest_bit(bits), p)
                queue.append(t)
    return None


def run(a: TransitionSystem, x: int, steps) -> int | None:
    """State reached by following ``steps`` deterministically, None if stuck."""
    for atom, action in steps:
        out = a.step(x, atom)
        if out is None or out == ACCEPT or out[0] != action or out[1] == ACCEPT:
            return None
        x = out[1]
    return x


def accepts(a: SkipFreeAutomaton, x: int, word) -> bool:
    if not word:
        return False
    y = run(a, x, word[:-1])
    if y is None:
        return False
    atom, action = word[-1]
    return a.step(y, atom) == (action, ACCEPT)


def lang_equiv_automata(a1: SkipFreeAutomaton, s1: int, a2: SkipFreeAutomaton, s2: int) -> EquivVerdict:
    p1, p2 = prune_automaton(a1), prune_automaton(a2)
    v = bisim_skipfree(p1, s1, p2, s2)
    if v.equivalent:
        return v
    cx = v.counterexample
    x, y = run(p1, s1, cx.steps), run(p2, s2, cx.steps)
    o1, o2 = p1.step(x, cx.atom), p2.step(y, cx.atom)
    # extend with the side that can still accept; prefer the first system
    for side, out, sys_ in ((1, o1, p1), (2, o2, p2)):
        if out is None:
            continue
        action, target = out
        tail = () if target == ACCEPT else shortest_accepted(sys_, target)
        word = cx.steps + ((cx.atom, action),) + tail
        return EquivVerdict(False, counterexample=Trace(cx.steps, cx.atom, cx.kind, word, side))
    raise AssertionError("pruned counterexample without an accepting side")


def lang_equiv(e1: sf.SkipFreeExp, e2: sf.SkipFreeExp, sig: Signature) -> EquivVerdict:
    return lang_equiv_automata(derive_skipfree(e1, sig), 0, derive_skipfree(e2, sig), 0)


def bisim_exprs(e1: sf.SkipFreeExp, e2: sf.SkipFreeExp, sig: Signature) -> EquivVerdict:
    return bisim_skipfree(derive_skipfree(e1, sig), 0, derive_skipfree(e2, sig), 0)


def gkat_lang_equiv(e1: gk.GkatExp, e2: gk.GkatExp, sig: Signature) -> EquivVerdict:
    """Language equivalence of full GKAT expressions: bisimilarity after
    rerouting transitions into dead states to rejection."""
    g1, g2 = derive_gkat(e1, sig), derive_gkat(e2, sig)
    return bisim_gkat(prune_automaton(g1), 0, prune_automaton(g2), 0)


# trace oracles


def traces_automaton(a: SkipFreeAutomaton, x: int, max_len: int) -> set:
    out: set = set()

    def go(y, prefix, budget):
        if budget == 0:
            return
        for bits, p, t in a.trans[y]:
            for atom in iter_bits(bits):
                w = prefix + ((atom, p),)
                if t == ACCEPT:
                    out.add(w)
                else:
                    go(t, w, budget - 1)

    go(x, (), max_len)
    return out


def traces(e: sf.SkipFreeExp, sig: Signature, max_len: int) -> set:
    if max_len < 1:
        raise ValueError("maxLen must be at least 1")
    return traces_automaton(derive_skipfree(e, sig), 0, max_len)


def bounded_trace_equal(a1: SkipFreeAutomaton, s1: int, a2: SkipFreeAutomaton, s2: int, k: int) -> bool:
    """Whether the accepted traces with at most ``k`` actions coincide.

    Independent of pruning and bisimulation: a direct recursion on the
    bounded languages of both systems.
    """
    n_atoms = a1.n_atoms
    empty_memo: dict = {}
    eq_memo: dict = {}

    def empty(a, x, k):
        if k == 0:
            return True
        key = (id(a), x, k)
        if key not in empty_memo:
            empty_memo[key] = all(
                t != ACCEPT and empty(a, t, k - 1) for _, _, t in a.trans[x]
            )
        return empty_memo[key]

    def eq(x, y, k):
        if k == 0:
            return True
        key = (x, y, k)
        if key in eq_memo:
            return eq_memo[key]
        ok = True
        for atom in range(n_atoms):
            o1, o2 = a1.step(x, atom), a2.step(y, atom)
            if o1 is None and o2 is None:
                continue
            if o1 is None or o2 is None:
                p, t = o1 or o2
                a = a1 if o1 is not None else a2
                ok = t != ACCEPT and empty(a, t, k - 1)
            else:
                (p, t), (q, u) = o1, o2
                if t == ACCEPT or u == ACCEPT:
                    ok = p == q and t == u
                elif p != q:
                    ok = empty(a1, t, k - 1) and empty(a2, u, k - 1)
                else:
                    ok = eq(t, u, k - 1)
            if not ok:
                break
        eq_memo[key] = ok
        return ok

    return eq(s1, s2, k)


# guarded strings of full GKAT: tuples (a0, p1, a1, ..., pn, an)


def n_actions(w: tuple) -> int:
    return len(w) // 2


def diamond(left: set, right: set, budget: int) -> set:
    by_first: dict = {}
    for w in right:
        by_first.setdefault(w[0], []).append(w)
    out = set()
    for u in left:
        nu = n_actions(u)
        for v in by_first.get(u[-1], ()):
            if nu + n_actions(v) <= budget:
                out.add(u + v[1:])
    return out


def _atoms_set(bits: int) -> set:
    return {(a,) for a in iter_bits(bits)}


def guarded_lang_gkat(e: gk.GkatExp, sig: Signature, max_actions: int) -> set:
    if max_actions < 0:
        raise ValueError("maxActions must be nonnegative")
    u = sig.universe
    full = u.full_bits
    atoms = list(range(sig.n_atoms))

    def go(e):
        if isinstance(e, gk.Bool):
            return _atoms_set(bits_of(e.b, u))
        if isinstance(e, gk.Act):
            if max_actions < 1:
                return set()
            return {(a, e.name, b) for a in atoms for b in atoms}
        if isinstance(e, gk.Guard):
            b = bits_of(e.b, u)
            return diamond(_atoms_set(b), go(e.left), max_actions) | diamond(
                _atoms_set(full & ~b), go(e.right), max_actions
            )
        if isinstance(e, gk.Seq):
            return diamond(go(e.left), go(e.right), max_actions)
        if isinstance(e, gk.Loop):
            b = bits_of(e.b, u)
            body = diamond(_atoms_set(b), go(e.body), max_actions)
            acc = _atoms_set(full)
            frontier = acc
            while frontier:
                frontier = diamond(frontier, body, max_actions) - acc
                acc |= frontier
            return diamond(acc, _atoms_set(full & ~b), max_actions)
        raise TypeError(f"not a GKAT expression: {e!r}")

    return go(e)


def traces_times_atoms(trs: Iterable, n_atoms: int) -> set:
    out = set()
    for t in trs:
        flat = tuple(x for step in t for x in step)
        for b in range(n_atoms):
            out.add(flat + (b,))
    return out


# relational interpretations


@dataclass(frozen=True)
class Interpretation:
    n_states: int
    sat: dict
    eval: dict

    def __post_init__(self):
        for t, states in self.sat.items():
            if any(not 0 <= s < self.n_states for s in states):
                raise InterpretationError(f"sat({t}) mentions a state outside 0..{self.n_states - 1}")
        for p, rel in self.eval.items():
            if any(not (0 <= s < self.n_states and 0 <= s2 < self.n_states) for s, s2 in rel):
                raise InterpretationError(f"eval({p}) mentions a state outside 0..{self.n_states - 1}")


Relation = frozenset


def _rows(rel, n) -> list[int]:
    rows = [0] * n
    for s, t in rel:
        rows[s] |= 1 << t
    return rows


def _compose(r, q) -> list[int]:
    out = []
    for row in r:
        acc = 0
        for t in iter_bits(row):
            acc |= q[t]
        out.append(acc)
    return out


def _star(r, n) -> list[int]:
    closure = [1 << s for s in range(n)]
    while True:
        nxt = [c | a for c, a in zip(closure, _compose(closure, r))]
        if nxt == closure:
            return closure
        closure = nxt


def eval_relational(e: gk.GkatExp | sf.SkipFreeExp, sigma: Interpretation, sig: Signature) -> frozenset:
    if isinstance(e, sf.SkipFreeExp):
        e = gk.embed_syntax(e)
    n = sigma.n_states
    u = sig.universe
    for t in u.tests:
        if t not in sigma.sat:
            raise InterpretationError(f"no interpretation for test {t!r}")
    state_atom = []
    for s in range(n):
        state_atom.append(sum(1 << i for i, t in enumerate(u.tests) if s in sigma.sat[t]))

    def test(b):
        return [(1 << s) if evaluate(b, u, state_atom[s]) else 0 for s in range(n)]

    def go(e):
        if isinstance(e, gk.Bool):
            return test(e.b)
        if isinstance(e, gk.Act):
            if e.name not in sigma.eval:
                raise InterpretationError(f"no interpretation for action {e.name!r}")
            return _rows(sigma.eval[e.name], n)
        if isinstance(e, gk.Guard):
            l = _compose(test(e.b), go(e.left))
            r = _compose(test(Not(e.b)), go(e.right))
            return [a | b for a, b in zip(l, r)]
        if isinstance(e, gk.Seq):
            return _compose(go(e.left), go(e.right))
        if isinstance(e, gk.Loop):
            step = _compose(test(e.b), go(e.body))
            return _compose(_star(step, n), test(Not(e.b)))
        raise TypeError(f"not a GKAT expression: {e!r}")

    rows = go(e)
    return frozenset((s, t) for s in range(n) for t in iter_bits(rows[s]))
