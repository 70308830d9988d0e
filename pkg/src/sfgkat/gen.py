"""Seeded random generation of tests, expressions, interpretations and rewrites.

Every function takes an explicit ``random.Random`` so that a seed fully
determines the output.
"""
from __future__ import annotations

import random

from .bool_algebra import ONE, ZERO, And, BExp, Not, Or, Test, ba_equiv, bits_of, to_bexp
from .equivalence import Interpretation
from .proofcheck import AXIOMS, BA, SYSTEMS, Axiom, ProofScript, Step, Var, check_step, instantiate
from .syntax import Signature, positions, replace_at, subterm
from .syntax import gkat as gk
from .syntax import skipfree as sf
from .syntax import star as st
from .syntax.common import Expr


def signature(rng: random.Random, max_tests: int = 2, max_actions: int = 3) -> Signature:
    nt = rng.randint(1, max_tests)
    na = rng.randint(1, max_actions)
    return Signature.of(tuple("tsuvw"[:nt]), tuple("pqrxyz"[:na]))


def bexp(rng: random.Random, tests, depth: int = 2) -> BExp:
    if depth <= 0 or rng.random() < 0.35:
        r = rng.random()
        if r < 0.08:
            return ZERO
        if r < 0.16:
            return ONE
        return Test(rng.choice(tests))
    k = rng.randrange(3)
    if k == 0:
        return Not(bexp(rng, tests, depth - 1))
    op = And if k == 1 else Or
    return op(bexp(rng, tests, depth - 1), bexp(rng, tests, depth - 1))


def _split(rng, n):
    a = rng.randint(1, n - 2) if n > 2 else 1
    return a, max(1, n - 1 - a)


def skipfree(rng: random.Random, sig: Signature, size: int = 8, zero_rate: float = 0.1) -> sf.SkipFreeExp:
    if size <= 1:
        if rng.random() < zero_rate:
            return sf.ZERO
        return sf.Act(rng.choice(sig.actions))
    a, b = _split(rng, size)
    k = rng.randrange(3)
    left = skipfree(rng, sig, a, zero_rate)
    right = skipfree(rng, sig, b, zero_rate)
    if k == 0:
        return sf.Seq(left, right)
    g = bexp(rng, sig.tests, 1)
    return sf.Guard(g, left, right) if k == 1 else sf.While(left, g, right)


def star(rng: random.Random, sig: Signature, size: int = 8, zero_rate: float = 0.05) -> st.StarExp:
    if size <= 1:
        if rng.random() < zero_rate:
            return st.ZERO
        return st.Lit(rng.randrange(sig.n_atoms), rng.choice(sig.actions))
    a, b = _split(rng, size)
    cls = rng.choice((st.Plus, st.Seq, st.Star))
    return cls(star(rng, sig, a, zero_rate), star(rng, sig, b, zero_rate))


def gkat(rng: random.Random, sig: Signature, size: int = 8) -> gk.GkatExp:
    if size <= 1:
        if rng.random() < 0.3:
            return gk.Bool(bexp(rng, sig.tests, 1))
        return gk.Act(rng.choice(sig.actions))
    k = rng.randrange(3)
    if k == 2:
        return gk.Loop(gkat(rng, sig, size - 1), bexp(rng, sig.tests, 1))
    a, b = _split(rng, size)
    left, right = gkat(rng, sig, a), gkat(rng, sig, b)
    if k == 0:
        return gk.Seq(left, right)
    return gk.Guard(bexp(rng, sig.tests, 1), left, right)


def interpretation(rng: random.Random, sig: Signature, max_states: int = 5) -> Interpretation:
    n = rng.randint(1, max_states)
    sat = {t: frozenset(s for s in range(n) if rng.random() < 0.5) for t in sig.tests}
    ev = {}
    for p in sig.actions:
        ev[p] = frozenset((s, s2) for s in range(n) for s2 in range(n) if rng.random() < 1.5 / n)
    return Interpretation(n, sat, ev)


def expr(rng: random.Random, lang: str, sig: Signature, size: int) -> Expr:
    if lang == "skipfree":
        return skipfree(rng, sig, size)
    if lang == "star":
        return star(rng, sig, size)
    return gkat(rng, sig, size)


# matching axiom sides against terms


def _bvars(b: BExp, out: set):
    if isinstance(b, Test):
        out.add(b.name)
    elif isinstance(b, (And, Or)):
        _bvars(b.left, out)
        _bvars(b.right, out)
    elif isinstance(b, Not):
        _bvars(b.arg, out)


def match(pattern: Expr, term: Expr, sig: Signature) -> dict | None:
    """First-order match of an axiom side; guards are solved modulo BA."""
    subst: dict = {}
    guards: list = []

    def go(p, t) -> bool:
        if isinstance(p, Var):
            if p.name in subst:
                return subst[p.name] == t
            subst[p.name] = t
            return True
        if type(p) is not type(t):
            return False
        kids = set(p.kids)
        for f in p.fields:
            pv, tv = getattr(p, f), getattr(t, f)
            if f in kids:
                if not go(pv, tv):
                    return False
            elif isinstance(pv, BExp):
                guards.append((pv, tv))
            elif pv != tv:
                return False
        return True

    if not go(pattern, term):
        return None
    pending = list(guards)
    progress = True
    while pending and progress:
        progress = False
        for pair in list(pending):
            pv, tv = pair
            if isinstance(pv, Test) and pv.name not in subst:
                subst[pv.name] = tv
            elif isinstance(pv, Not) and isinstance(pv.arg, Test) and pv.arg.name not in subst:
                subst[pv.arg.name] = Not(tv)
            else:
                free: set = set()
                _bvars(pv, free)
                if free - set(subst):
                    continue
            pending.remove(pair)
            progress = True
    for pv, tv in pending:
        # remaining disjunctions such as b | c with b known: take c to be the whole guard
        free: set = set()
        _bvars(pv, free)
        for v in sorted(free - set(subst)):
            subst[v] = tv
    for pv, tv in guards:
        if not ba_equiv(_inst_guard(pv, subst), tv, sig.universe):
            return None
    return subst


def _inst_guard(b: BExp, subst: dict) -> BExp:
    if isinstance(b, Test):
        return subst[b.name]
    if isinstance(b, (And, Or)):
        return type(b)(_inst_guard(b.left, subst), _inst_guard(b.right, subst))
    if isinstance(b, Not):
        return Not(_inst_guard(b.arg, subst))
    return b


def _fresh(rng, ax: Axiom, subst: dict, lang: str, sig: Signature):
    for v in sorted(ax.guard_vars - set(subst)):
        subst[v] = bexp(rng, sig.tests, 1)
    for v in sorted(ax.expr_vars - set(subst)):
        subst[v] = expr(rng, lang, sig, rng.randint(1, 3))
    return subst


def equivalent_guard(rng: random.Random, b: BExp, sig: Signature) -> BExp:
    k = rng.randrange(5)
    if k == 0:
        return Not(Not(b))
    if k == 1:
        return Or(b, ZERO)
    if k == 2:
        return And(ONE, b)
    if k == 3:
        return Or(And(b, Test(sig.tests[0])), And(b, Not(Test(sig.tests[0]))))
    return to_bexp(bits_of(b, sig.universe), sig.universe)


def random_step(rng: random.Random, e: Expr, system: str, sig: Signature) -> Step | None:
    """A random applicable non-RSP step on ``e``, or None if nothing applies.

    The axiom and direction are drawn first so that rare shapes are not
    drowned out by the sides consisting of a bare variable.
    """
    lang = SYSTEMS[system]
    choices = [(ax, d) for ax in AXIOMS[system].values() if ax.rule != "rsp" for d in ("ltr", "rtl")]
    if lang != "star":
        choices.append((None, "ltr"))
    rng.shuffle(choices)
    poss = list(positions(e))
    for ax, d in choices:
        rng.shuffle(poss)
        for pos in poss:
            here = subterm(e, pos)
            if ax is None:
                if isinstance(here, gk.Bool) or isinstance(getattr(here, "b", None), BExp):
                    return Step(BA, pos, "ltr", {"b": equivalent_guard(rng, here.b, sig)})
                continue
            m = match(ax.lhs if d == "ltr" else ax.rhs, here, sig)
            if m is not None:
                return Step(ax.id, pos, d, _fresh(rng, ax, m, lang, sig))
    return None


def rsp_instance(rng: random.Random, system: str, sig: Signature, size: int = 3) -> tuple[Expr, Step]:
    """A loop ``x^(b) y`` together with an RSP step (and unrolling premise) rewriting it."""
    lang = SYSTEMS[system]
    b = bexp(rng, sig.tests, 1)
    if lang == "skipfree":
        x, y = skipfree(rng, sig, size), skipfree(rng, sig, size)
        z = sf.While(x, b, y)
        premise = [Step("FP", (), "ltr", {"x": x, "b": b, "y": y})]
        rhs = sf.Guard(b, sf.Seq(x, z), y)
        axiom, subst = "RSP", {"x": x, "b": b, "y": y, "z": z}
    elif lang == "star":
        x, y = star(rng, sig, size), star(rng, sig, size)
        z = st.Star(x, y)
        premise = [Step("star-fp", (), "ltr", {"x": x, "y": y})]
        rhs = st.Plus(st.Seq(x, z), y)
        axiom, subst = "star-rsp", {"x": x, "y": y, "z": z}
    else:
        x = gk.embed_syntax(skipfree(rng, sig, size))
        y = gkat(rng, sig, size)
        z = gk.Seq(gk.Loop(x, b), y)
        loop = gk.Loop(x, b)
        premise = [
            Step("gkat-unroll", (0,), "rtl", {"x": x, "b": b}),
            Step("gkat-dist", (), "ltr", {"x": gk.Seq(x, loop), "y": gk.ONE_EXP, "z": y, "b": b}),
            Step("gkat-seq-assoc", (0,), "rtl", {"x": x, "y": loop, "z": y}),
            Step("gkat-one-seq", (1,), "ltr", {"x": y}),
        ]
        rhs = gk.Guard(b, gk.Seq(x, z), y)
        axiom, subst = "gkat-rsp", {"x": x, "b": b, "y": y, "z": z}
    p = ProofScript(system, sig, z, rhs, premise)
    return z, Step(axiom, (), "ltr", subst, p)


def single_axiom_script(rng: random.Random, system: str, sig: Signature, size: int = 6) -> ProofScript:
    """A one-step script on a random term, built from a random applicable axiom."""
    lang = SYSTEMS[system]
    if rng.random() < 0.15:
        z, step = rsp_instance(rng, system, sig)
        ctx = expr(rng, lang, sig, size)
        pos = rng.choice(list(positions(ctx)))
        lhs = replace_at(ctx, pos, z)
        step = Step(step.axiom, tuple(pos), step.direction, step.subst, step.premise)
    else:
        while True:
            lhs = expr(rng, lang, sig, size)
            step = random_step(rng, lhs, system, sig)
            if step is not None:
                break
    rhs = check_step(lhs, step, system, sig)
    return ProofScript(system, sig, lhs, rhs, [step])


def rewrite(rng: random.Random, e: Expr, system: str, sig: Signature, n: int) -> tuple[Expr, list]:
    """Apply ``n`` random sound steps; returns the final term and the steps."""
    steps = []
    for _ in range(n):
        s = random_step(rng, e, system, sig)
        if s is None:
            break
        e = check_step(e, s, system, sig)
        steps.append(s)
    return e, steps


def instance(rng: random.Random, ax: Axiom, lang: str, sig: Signature, size: int = 4) -> tuple[Expr, Expr]:
    subst = {v: expr(rng, lang, sig, rng.randint(1, size)) for v in sorted(ax.expr_vars)}
    _fresh(rng, ax, subst, lang, sig)
    return instantiate(ax.lhs, subst), instantiate(ax.rhs, subst)

