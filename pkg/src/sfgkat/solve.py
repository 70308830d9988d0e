"""Entry/body layerings of labelled transition systems and their canonical solutions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .bool_algebra import AtomSet, iter_bits
from .equivalence import bisim_lts
from .errors import CapacityError, LayeringError
from .small_step import ACCEPT, CHECK, Lts, derive_star, star_derivative
from .syntax import Signature, render
from .syntax import star as st
from .translate import is_deterministic_star, sum_right

MAX_SEARCH_EDGES = 14


@dataclass(frozen=True)
class LayeredLts:
    """An LTS together with the set of its entry transitions ``(x, atom, action, y)``.

    Every other transition between states is a body transition.
    """

    lts: Lts
    entries: frozenset = frozenset()

    def transitions(self, x: int):
        """Per-atom transitions of ``x`` as ``(atom, action, target, is_entry)``."""
        out = []
        for bits, p, t in self.lts.trans[x]:
            for a in iter_bits(bits):
                out.append((a, p, t, t != ACCEPT and (x, a, p, t) in self.entries))
        out.sort(key=lambda tr: (tr[0], tr[1], tr[2]))
        return out


@dataclass(frozen=True)
class Violation:
    condition: str
    message: str
    path: tuple = ()


@dataclass
class _Graph:
    n: int
    entry: list
    body: list
    succ: list
    checks: set


def _graph(l: LayeredLts) -> _Graph:
    n = l.lts.n_states
    entry = [set() for _ in range(n)]
    body = [set() for _ in range(n)]
    succ = [set() for _ in range(n)]
    checks = set()
    for x in range(n):
        for _, _, t, is_entry in l.transitions(x):
            if t == ACCEPT:
                checks.add(x)
                continue
            (entry if is_entry else body)[x].add(t)
            succ[x].add(t)
    return _Graph(n, entry, body, succ, checks)


def _find_cycle(n: int, adj) -> tuple | None:
    color = [0] * n
    stack_path: list = []

    def dfs(v):
        color[v] = 1
        stack_path.append(v)
        for w in sorted(adj[v]):
            if color[w] == 1:
                return tuple(stack_path[stack_path.index(w):]) + (w,)
            if color[w] == 0:
                cyc = dfs(w)
                if cyc:
                    return cyc
        stack_path.pop()
        color[v] = 2
        return None

    for v in range(n):
        if color[v] == 0:
            cyc = dfs(v)
            if cyc:
                return cyc
    return None


def _reaches(g: _Graph, src: int, dst: int) -> bool:
    """Whether dst is reachable from src in one or more steps."""
    seen = set()
    stack = list(g.succ[src])
    while stack:
        v = stack.pop()
        if v == dst:
            return True
        if v not in seen:
            seen.add(v)
            stack.extend(g.succ[v])
    return False


def loop_entries(g: _Graph) -> list[dict]:
    """``x ↷ y`` as, for each x, a map from y to a witness path starting at x."""
    out = []
    for x in range(g.n):
        paths: dict = {}
        frontier = []
        for y in sorted(g.entry[x]):
            if y != x and y not in paths:
                paths[y] = (x, y)
                frontier.append(y)
        while frontier:
            v = frontier.pop()
            for w in sorted(g.body[v]):
                if w != x and w not in paths:
                    paths[w] = paths[v] + (w,)
                    frontier.append(w)
        out.append(paths)
    return out


def check_well_layered(l: LayeredLts) -> Violation | None:
    """None when the labelling is a layering witness, else the first violated condition."""
    g = _graph(l)
    for x in range(g.n):
        both = g.entry[x] & g.body[x]
        if both:
            y = min(both)
            return Violation("flatness", f"state {x} has both entry and body transitions to {y}", (x, y))
    cyc = _find_cycle(g.n, g.body)
    if cyc:
        return Violation("no body loops", f"body transitions form a cycle {list(cyc)}", cyc)
    for x in range(g.n):
        for y in sorted(g.entry[x]):
            if y != x and not _reaches(g, y, x):
                return Violation(
                    "full specification", f"entry transition {x} -> {y} is not a loop entry: {x} is unreachable from {y}", (x, y)
                )
    arrows = loop_entries(g)
    cyc = _find_cycle(g.n, [set(a) for a in arrows])
    if cyc:
        return Violation("layeredness", f"loop-entry relation has a cycle {list(cyc)}", cyc)
    for x in range(g.n):
        for y, path in sorted(arrows[x].items()):
            if y in g.checks:
                return Violation("goto-free", f"state {y} is entered from the loop at {x} but can terminate", path)
    return None


def _longest(n: int, adj) -> list[int]:
    memo: dict = {}

    def go(v):
        if v not in memo:
            memo[v] = max((1 + go(w) for w in adj[v]), default=0)
        return memo[v]

    return [go(v) for v in range(n)]


# layering search


def star_entry_hints(r: st.StarExp) -> list:
    """Initial transitions of ``r`` as ``(bits, action, target, is_entry)``.

    A transition is an entry candidate when it comes from the left operand of
    a star at the head of ``r`` (looking through the left side of sequencing).
    """
    if isinstance(r, st.Zero):
        return []
    if isinstance(r, st.Lit):
        return [(1 << r.atom, r.action, CHECK, False)]
    if isinstance(r, st.Plus):
        return [(b, p, t, False) for b, p, t, _ in star_entry_hints(r.left) + star_entry_hints(r.right)]
    if isinstance(r, st.Seq):
        return [(b, p, r.right if t is CHECK else st.Seq(t, r.right), e) for b, p, t, e in star_entry_hints(r.left)]
    if isinstance(r, st.Star):
        out = [(b, p, r if t is CHECK else st.Seq(t, r), True) for b, p, t, _ in star_entry_hints(r.left)]
        return out + [(b, p, t, False) for b, p, t, _ in star_entry_hints(r.right)]
    raise TypeError(f"not a star expression: {r!r}")


def _hinted_layering(l: Lts) -> LayeredLts | None:
    if not all(isinstance(lab, st.StarExp) for lab in l.labels):
        return None
    index = {lab: i for i, lab in enumerate(l.labels)}
    entries = set()
    for x, lab in enumerate(l.labels):
        for bits, p, t, is_entry in star_entry_hints(lab):
            if is_entry and t is not CHECK:
                y = index.get(t)
                if y is None:
                    return None
                entries.update((x, a, p, y) for a in iter_bits(bits))
    cand = LayeredLts(l, frozenset(entries))
    return cand if check_well_layered(cand) is None else None


def _sccs(n: int, adj) -> list[int]:
    index = 0
    idx = [-1] * n
    low = [0] * n
    on = [False] * n
    stack: list = []
    comp = [-1] * n
    c = 0

    def strong(v):
        nonlocal index, c
        idx[v] = low[v] = index
        index += 1
        stack.append(v)
        on[v] = True
        for w in adj[v]:
            if idx[w] == -1:
                strong(w)
                low[v] = min(low[v], low[w])
            elif on[w]:
                low[v] = min(low[v], idx[w])
        if low[v] == idx[v]:
            while True:
                w = stack.pop()
                on[w] = False
                comp[w] = c
                if w == v:
                    break
            c += 1

    for v in range(n):
        if idx[v] == -1:
            strong(v)
    return comp


def find_layering(l: Lts, max_edges: int = MAX_SEARCH_EDGES) -> LayeredLts | None:
    hinted = _hinted_layering(l)
    if hinted is not None:
        return hinted
    n = l.n_states
    adj = [sorted({t for _, _, t in l.trans[x] if t != ACCEPT}) for x in range(n)]
    comp = _sccs(n, adj)
    forced, free = [], []
    for x in range(n):
        for y in adj[x]:
            if y == x:
                forced.append((x, y))
            elif comp[x] == comp[y]:
                free.append((x, y))
    if len(free) > max_edges:
        raise CapacityError(f"layering search over {len(free)} cyclic edges exceeds the limit of {max_edges}")

    def expand(edges):
        out = set()
        for x, y in edges:
            for bits, p, t in l.trans[x]:
                if t == y:
                    out.update((x, a, p, y) for a in iter_bits(bits))
        return frozenset(out)

    for k in range(len(free) + 1):
        for chosen in itertools.combinations(free, k):
            cand = LayeredLts(l, expand(forced + list(chosen)))
            if check_well_layered(cand) is None:
                return cand
    return None


# canonical solutions


@dataclass
class SolutionMap:
    assignment: dict
    annotations: dict = field(default_factory=dict)
    verified: dict = field(default_factory=dict)

    def __getitem__(self, x):
        return self.assignment[x]


def _lit_seq(a, p, tail):
    return st.Seq(st.Lit(a, p), tail)


def canonical_solution(l: LayeredLts, verify: bool = True) -> SolutionMap:
    bad = check_well_layered(l)
    if bad is not None:
        raise LayeringError(f"not a layering witness ({bad.condition}): {bad.message}")
    g = _graph(l)
    n = g.n
    arrows = loop_entries(g)
    en = _longest(n, [set(a) for a in arrows])
    bo = _longest(n, g.body)
    trans = [l.transitions(x) for x in range(n)]
    nb = l.lts.sig.n_atoms
    phi_memo: dict = {}
    t_memo: dict = {}
    annotations: dict = {}

    def phi(x):
        if x in phi_memo:
            return phi_memo[x]
        loops, enter, done, step = [], [], [], []
        a = b = c = 0
        for atom, p, t, is_entry in trans[x]:
            if t == ACCEPT:
                done.append(st.Lit(atom, p))
                c |= 1 << atom
            elif t == x:
                loops.append(st.Lit(atom, p))
                b |= 1 << atom
                a |= 1 << atom
            elif is_entry:
                enter.append(_lit_seq(atom, p, tr(t, x)))
                a |= 1 << atom
            else:
                if not bo[t] < bo[x]:
                    raise LayeringError(f"body recursion does not decrease at {x} -> {t}")
                step.append(_lit_seq(atom, p, phi(t)))
        annotations[x] = {k: AtomSet(v, nb) for k, v in (("a", a), ("b", b), ("c", c))}
        out = st.Star(st.Plus(sum_right(loops), sum_right(enter)), st.Plus(sum_right(done), sum_right(step)))
        phi_memo[x] = out
        return out

    def tr(y, x):
        key = (y, x)
        if key in t_memo:
            return t_memo[key]
        if y not in arrows[x]:
            raise LayeringError(f"t({y},{x}) requested but {x} does not enter the loop at {y}")
        loops, enter, back, step = [], [], [], []
        for atom, p, z, is_entry in trans[y]:
            if z == ACCEPT:
                raise LayeringError(f"state {y} inside the loop of {x} can terminate")
            if z == y:
                loops.append(st.Lit(atom, p))
            elif is_entry:
                if not en[y] < en[x]:
                    raise LayeringError(f"entry recursion does not decrease at t({z},{y})")
                enter.append(_lit_seq(atom, p, tr(z, y)))
            elif z == x:
                back.append(st.Lit(atom, p))
            else:
                if not bo[z] < bo[y]:
                    raise LayeringError(f"body recursion does not decrease at t({z},{x})")
                step.append(_lit_seq(atom, p, tr(z, x)))
        out = st.Star(st.Plus(sum_right(loops), sum_right(enter)), st.Plus(sum_right(back), sum_right(step)))
        t_memo[key] = out
        return out

    sol = SolutionMap({x: phi(x) for x in range(n)}, annotations)
    if verify:
        sig = l.lts.sig
        for x in range(n):
            sol.verified[x] = bisim_lts(derive_star(sol.assignment[x], sig), 0, l.lts, x).equivalent
    return sol


def solutions_deterministic(sol: SolutionMap, sig: Signature) -> bool:
    return all(is_deterministic_star(r, sig) for r in sol.assignment.values())


def expand_fundamental(r: st.StarExp, sig: Signature) -> st.StarExp:
    done, step = [], []
    for bits, p, t in star_derivative(r):
        for a in iter_bits(bits):
            if t is CHECK:
                done.append((a, p, "", st.Lit(a, p)))
            else:
                step.append((a, p, render(t), _lit_seq(a, p, t)))
    done.sort(key=lambda x: x[:3])
    step.sort(key=lambda x: x[:3])
    return st.Plus(sum_right([x[3] for x in done]), sum_right([x[3] for x in step]))
