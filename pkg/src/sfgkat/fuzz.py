"""Cross-oracle property checks over seeded random inputs.

Each check takes a ``random.Random`` and returns ``None`` when every oracle
agrees, or a dict describing the discrepancy.  Case ``i`` of check ``name``
under seed ``s`` always uses ``Random(f"{s}:{name}:{i}")``, so reports are
reproducible and independent of evaluation order.
"""
from __future__ import annotations

import random
from typing import Callable

from . import gen
from .equivalence import (
    accepts,
    bisim_exprs,
    bisim_gkat,
    bisim_lts,
    bisim_skipfree,
    bounded_trace_equal,
    eval_relational,
    gkat_lang_equiv,
    guarded_lang_gkat,
    is_dead,
    lang_equiv,
    lang_equiv_automata,
    prune_automaton,
    prune_expr,
    traces,
    traces_times_atoms,
)
from .proofcheck import AXIOMS, SYSTEMS, check_script
from .small_step import derive_gkat, derive_skipfree, derive_star, embed_automaton, grph_star
from .solve import canonical_solution, find_layering, solutions_deterministic
from .syntax import Signature, render
from .syntax import gkat as gk
from .syntax import skipfree as sf
from .translate import gtr, is_deterministic_star, rtg

Check = Callable[[random.Random], "dict | None"]

FIG2 = [a for a in AXIOMS["skipfree-lang"].values()]


def _fail(reason: str, sig: Signature, **exprs) -> dict:
    out = {"reason": reason, "tests": list(sig.tests), "actions": list(sig.actions)}
    for k, v in exprs.items():
        out[k] = render(v) if hasattr(v, "fields") else v
    return out


def axiom_instance(rng: random.Random, axiom: str | None = None, stats: dict | None = None) -> dict | None:
    """One instance of a skip-free axiom: sound for bisimilarity unless it is
    the dagger axiom, sound for language equivalence always.

    For RSP, candidates whose premise fails are skipped; ``stats`` (if given)
    counts them under ``"vacuous"``.
    """
    sig = gen.signature(rng, 3, 3)
    ax = AXIOMS["skipfree-lang"][axiom] if axiom else rng.choice(FIG2)
    if ax.rule == "rsp":
        x, y = gen.skipfree(rng, sig, rng.randint(1, 4)), gen.skipfree(rng, sig, rng.randint(1, 4))
        b = gen.bexp(rng, sig.tests, 1)
        loop = sf.While(x, b, y)
        if rng.random() < 0.7:
            z, _ = gen.rewrite(rng, loop, "skipfree-bisim", sig, rng.randint(1, 3))
        else:
            z = gen.skipfree(rng, sig, rng.randint(1, 6))
        if not bisim_exprs(z, sf.Guard(b, sf.Seq(x, z), y), sig):
            if stats is not None:
                stats["vacuous"] = stats.get("vacuous", 0) + 1
            return None
        if not bisim_exprs(z, loop, sig):
            return _fail("RSP conclusion not bisimilar", sig, z=z, loop=loop)
        if not lang_equiv(z, loop, sig):
            return _fail("RSP conclusion not language equivalent", sig, z=z, loop=loop)
        return None
    lhs, rhs = gen.instance(rng, ax, "skipfree", sig)
    if not ax.dagger and not bisim_exprs(lhs, rhs, sig):
        return _fail(f"{ax.id} instance not bisimilar", sig, lhs=lhs, rhs=rhs)
    if not lang_equiv(lhs, rhs, sig):
        return _fail(f"{ax.id} instance not language equivalent", sig, lhs=lhs, rhs=rhs)
    return None


def _pair(rng, sig, system="skipfree-bisim", size=6):
    e1 = gen.skipfree(rng, sig, rng.randint(1, size))
    if rng.random() < 0.5:
        e2, _ = gen.rewrite(rng, e1, system, sig, rng.randint(1, 3))
    else:
        e2 = gen.skipfree(rng, sig, rng.randint(1, size))
    return e1, e2


def bisim_refines_lang(rng: random.Random) -> dict | None:
    sig = gen.signature(rng, 2, 3)
    e1, e2 = _pair(rng, sig)
    if bisim_exprs(e1, e2, sig) and traces(e1, sig, 6) != traces(e2, sig, 6):
        return _fail("bisimilar but traces differ at bound 6", sig, e1=e1, e2=e2)
    return None


def translation_roundtrip(rng: random.Random) -> dict | None:
    sig = gen.signature(rng, 2, 3)
    e = gen.skipfree(rng, sig, rng.randint(1, 10))
    r = gtr(e, sig)
    if not bisim_lts(derive_star(r, sig), 0, grph_star(derive_skipfree(e, sig)), 0):
        return _fail("gtr(e) not LTS-bisimilar to the graph of e", sig, e=e, star=r)
    if not bisim_exprs(rtg(r, sig), e, sig):
        return _fail("rtg(gtr(e)) not bisimilar to e", sig, e=e, star=r)
    if not is_deterministic_star(r, sig):
        return _fail("gtr(e) not deterministic", sig, e=e, star=r)
    return None


def pruning(rng: random.Random) -> dict | None:
    sig = gen.signature(rng, 2, 3)
    e = gen.skipfree(rng, sig, rng.randint(1, 10), zero_rate=0.25)
    p = prune_expr(e, sig)
    if not lang_equiv(p, e, sig):
        return _fail("pruned expression not language equivalent", sig, e=e, pruned=p)
    if is_dead(e, sig) and not lang_equiv(e, sf.ZERO, sig):
        return _fail("dead expression not language equivalent to 0", sig, e=e)
    a = derive_skipfree(e, sig)
    pa = prune_automaton(a)
    for x in range(a.n_states):
        px = prune_expr(a.labels[x], sig)
        if not bisim_skipfree(pa, x, derive_skipfree(px, sig), 0):
            return _fail("pruned derivative disagrees with derivative of pruned state", sig, e=e, state=a.labels[x])
    return None


def lang_vs_oracle(rng: random.Random) -> dict | None:
    sig = gen.signature(rng, 2, 2)
    while True:
        e1, e2 = _pair(rng, sig, "skipfree-lang", 5)
        a1, a2 = derive_skipfree(e1, sig), derive_skipfree(e2, sig)
        if a1.n_states * a2.n_states <= 64:
            break
    v = lang_equiv_automata(a1, 0, a2, 0)
    k = a1.n_states * a2.n_states + 1
    if v.equivalent != bounded_trace_equal(a1, 0, a2, 0, k):
        return _fail(f"decision disagrees with bounded traces at {k}", sig, e1=e1, e2=e2)
    if not v.equivalent:
        cx = v.counterexample
        hit1, hit2 = accepts(a1, 0, cx.word), accepts(a2, 0, cx.word)
        if hit1 == hit2 or (1 if hit1 else 2) != cx.accepted_by:
            return _fail("counterexample does not replay", sig, e1=e1, e2=e2, word=[list(s) for s in cx.word])
    return None


def embedding(rng: random.Random) -> dict | None:
    sig = gen.signature(rng, 2, 2)
    e = gen.skipfree(rng, sig, rng.randint(1, 8))
    g = gk.embed_syntax(e)
    if not bisim_gkat(embed_automaton(derive_skipfree(e, sig)), 0, derive_gkat(g, sig), 0):
        return _fail("embedded automaton not bisimilar to derivative of embedding", sig, e=e)
    if guarded_lang_gkat(g, sig, 4) != traces_times_atoms(traces(e, sig, 4), sig.n_atoms):
        return _fail("guarded strings of embedding differ from traces extended by atoms", sig, e=e)
    return None


def _lang_pair(rng, sig):
    e1 = gen.skipfree(rng, sig, rng.randint(1, 8), zero_rate=0.2)
    k = rng.randrange(3)
    if k == 0:
        e2 = prune_expr(e1, sig)
    elif k == 1:
        e2 = rtg(gtr(e1, sig), sig)
    else:
        e2, _ = gen.rewrite(rng, e1, "skipfree-lang", sig, rng.randint(1, 4))
    return e1, e2


def relational(rng: random.Random, interpretations: int = 50) -> dict | None:
    sig = gen.signature(rng, 2, 3)
    if rng.random() < 0.75:
        e1, e2 = _lang_pair(rng, sig)
        if not lang_equiv(e1, e2, sig):
            return _fail("generated pair not language equivalent", sig, e1=e1, e2=e2)
    else:
        e1 = gen.gkat(rng, sig, rng.randint(1, 7))
        e2, _ = gen.rewrite(rng, e1, "gkat-lang", sig, rng.randint(1, 4))
        if not gkat_lang_equiv(e1, e2, sig):
            return _fail("generated pair not language equivalent", sig, e1=e1, e2=e2)
    for _ in range(interpretations):
        sigma = gen.interpretation(rng, sig, 5)
        if eval_relational(e1, sigma, sig) != eval_relational(e2, sigma, sig):
            return _fail("relational semantics differ", sig, e1=e1, e2=e2)
    return None


def canonical(rng: random.Random) -> dict | None:
    sig = gen.signature(rng, 2, 2)
    r = gen.star(rng, sig, rng.randint(1, 12))
    lts = derive_star(r, sig)
    lay = find_layering(lts)
    if lay is None:
        return _fail("no well-layered labelling found", sig, r=r)
    sol = canonical_solution(lay, verify=True)
    bad = [x for x, ok in sol.verified.items() if not ok]
    if bad:
        return _fail(f"solution for state {bad[0]} not bisimilar", sig, r=r)
    if lts.is_deterministic() and not solutions_deterministic(sol, sig):
        return _fail("solution of a deterministic system is not deterministic", sig, r=r)
    return None


def proof_audit(rng: random.Random) -> dict | None:
    system = rng.choice(sorted(SYSTEMS))
    sig = gen.signature(rng, 2, 2)
    p = gen.single_axiom_script(rng, system, sig)
    res = check_script(p)
    if not res.ok:
        return _fail(f"{system}: {res.status}: {res.message}", sig, lhs=p.lhs, rhs=p.rhs)
    return None


CHECKS: dict[str, Check] = {
    "axiom-soundness": axiom_instance,
    "bisim-refines-lang": bisim_refines_lang,
    "translation-roundtrip": translation_roundtrip,
    "pruning": pruning,
    "lang-vs-oracle": lang_vs_oracle,
    "embedding": embedding,
    "relational": relational,
    "canonical-solution": canonical,
    "proof-audit": proof_audit,
}


def case_rng(seed, name: str, i: int) -> random.Random:
    return random.Random(f"{seed}:{name}:{i}")


def run_check(name: str, seed, count: int, fn: Check | None = None) -> tuple[int, dict | None]:
    """Run ``count`` cases; returns the failure count and the first failure."""
    fn = fn or CHECKS[name]
    failures, first = 0, None
    for i in range(count):
        out = fn(case_rng(seed, name, i))
        if out is not None:
            failures += 1
            if first is None:
                first = {"check": name, "case": i, **out}
    return failures, first


def fuzz(seed: int, count: int, checks=None) -> dict:
    names = list(checks or CHECKS)
    results = []
    first = None
    for name in names:
        n_fail, f = run_check(name, seed, count)
        results.append({"check": name, "cases": count, "failures": n_fail})
        if first is None:
            first = f
    return {"seed": seed, "count": count, "results": results, "first_discrepancy": first}
