import itertools

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import SIG, SIG1, gkat_exprs, skipfree_exprs, star_exprs
from sfgkat.bool_algebra import ONE, ZERO, Test, atoms_of
from sfgkat.equivalence import (
    Interpretation,
    KINDS,
    accepts,
    bisim_exprs,
    bisim_gkat,
    bisim_lts,
    bisim_skipfree,
    bounded_trace_equal,
    dead_states,
    eval_relational,
    gkat_lang_equiv,
    guarded_lang_gkat,
    is_bisimulation,
    lang_equiv,
    prune_automaton,
    prune_expr,
    traces,
    traces_times_atoms,
)
from sfgkat.errors import InterpretationError, UniverseError
from sfgkat.small_step import ACCEPT, Lts, SkipFreeAutomaton, derive_gkat, derive_skipfree, derive_star
from sfgkat.syntax import Signature, embed_syntax, parse
from sfgkat.syntax import gkat as gk
from sfgkat.syntax import skipfree as sf
from sfgkat.syntax import star as sx

p, q = sf.Act("p"), sf.Act("q")
t = Test("t")


def sfe(text, sig=SIG):
    return parse(text, "skipfree", sig)


# independent oracles


def lang_oracle(e, sig, n):
    """Accepted traces with at most ``n`` actions, by structural induction."""
    u = sig.universe
    atoms = range(sig.n_atoms)

    def cat(xs, ys):
        return {a + b for a in xs for b in ys if len(a) + len(b) <= n}

    def go(e):
        if isinstance(e, sf.Zero):
            return set()
        if isinstance(e, sf.Act):
            return {((a, e.name),) for a in atoms} if n >= 1 else set()
        if isinstance(e, sf.Guard):
            yes = atoms_of(e.b, u)
            return {w for w in go(e.left) if w[0][0] in yes} | {w for w in go(e.right) if w[0][0] not in yes}
        if isinstance(e, sf.Seq):
            return cat(go(e.left), go(e.right))
        yes = atoms_of(e.b, u)
        body = {w for w in go(e.body) if w[0][0] in yes}
        prefixes = {()}
        while True:
            grown = prefixes | cat(prefixes, body)
            if grown == prefixes:
                break
            prefixes = grown
        return cat(prefixes, {w for w in go(e.exit) if w[0][0] not in yes})

    return go(e)


def dead_oracle(a):
    def live(x):
        seen, todo = set(), [x]
        while todo:
            y = todo.pop()
            if y in seen:
                continue
            seen.add(y)
            for _, _, tgt in a.trans[y]:
                if tgt == ACCEPT:
                    return True
                todo.append(tgt)
        return False

    return frozenset(x for x in range(a.n_states) if not live(x))


def relational_oracle(e, sigma, sig):
    """Pairs of states, computed on plain Python sets."""
    states = range(sigma.n_states)
    tests = sig.universe.tests

    def holds(b, s):
        atom = sum(1 << i for i, name in enumerate(tests) if s in sigma.sat[name])
        return atom in atoms_of(b, sig.universe)

    def comp(r1, r2):
        return {(a, c) for a, b in r1 for b2, c in r2 if b == b2}

    def go(e):
        if isinstance(e, sf.Zero):
            return set()
        if isinstance(e, sf.Act):
            return set(sigma.eval[e.name])
        if isinstance(e, sf.Guard):
            return {(a, c) for a, c in go(e.left) if holds(e.b, a)} | {
                (a, c) for a, c in go(e.right) if not holds(e.b, a)
            }
        if isinstance(e, sf.Seq):
            return comp(go(e.left), go(e.right))
        body, ex = go(e.body), go(e.exit)
        x: set = set()
        while True:
            nxt = {(a, c) for a, c in comp(body, x) if holds(e.b, a)} | {(a, c) for a, c in ex if not holds(e.b, a)}
            if nxt == x:
                return frozenset(x)
            x = nxt

    assert all(s in states for s in range(sigma.n_states))
    return frozenset(go(e))


@st.composite
def interpretations(draw, sig=SIG, max_states=4):
    n = draw(st.integers(1, max_states))
    pairs = list(itertools.product(range(n), repeat=2))
    sat = {name: frozenset(draw(st.sets(st.integers(0, n - 1)))) for name in sig.tests}
    ev = {a: frozenset(draw(st.sets(st.sampled_from(pairs), max_size=4))) for a in sig.actions}
    return Interpretation(n, sat, ev)


# bisimilarity


def two_state_example():
    sig = Signature.of(("a",), ("p", "q"))
    row = ((0b10, "p", 1), (0b01, "q", ACCEPT))
    return SkipFreeAutomaton(sig, ("x1", "x2"), 0, (row, row))


def test_two_state_example_bisimilar():
    a = two_state_example()
    v = bisim_skipfree(a, 0, a, 1)
    assert v.equivalent
    assert v.witness == frozenset({(0, 1), (1, 1)})
    assert is_bisimulation(a, a, v.witness)


def test_diverging_loop_vs_zero():
    v = bisim_exprs(sfe("p *[1] q"), sf.ZERO, SIG)
    assert not v.equivalent
    assert v.counterexample.kind == "reject-vs-step"
    assert v.counterexample.steps == ()
    assert v.counterexample.atom == 0


def test_action_mismatch_kind():
    v = bisim_exprs(p, q, SIG)
    assert v.counterexample.kind == "action-mismatch"


def test_accept_vs_step_kind():
    v = bisim_exprs(p, sfe("p . q"), SIG)
    assert v.counterexample.kind == "accept-vs-step"
    assert bisim_exprs(p, sf.ZERO, SIG).counterexample.kind == "accept-vs-reject"


def test_counterexample_after_common_prefix():
    v = bisim_exprs(sfe("p . q"), sfe("p . r"), SIG)
    cx = v.counterexample
    assert cx.steps == ((0, "p"),)
    assert cx.kind == "action-mismatch"


def test_universe_mismatch_raises():
    with pytest.raises(UniverseError):
        bisim_skipfree(derive_skipfree(p, SIG), 0, derive_skipfree(p, SIG1), 0)


def test_lts_duplicate_transition_is_bisimilar():
    l1 = derive_star(sx.Lit(0, "p"), SIG)
    l2 = derive_star(sx.Plus(sx.Lit(0, "p"), sx.Lit(0, "p")), SIG)
    assert bisim_lts(l1, 0, l2, 0)


def test_lts_different_atoms():
    assert not bisim_lts(derive_star(sx.Lit(0, "p"), SIG), 0, derive_star(sx.Lit(1, "p"), SIG), 0)


def test_lts_nondeterministic_branching():
    # a0.p.a0.q + a0.p.a1.q  vs  a0.p.(a0.q + a1.q)
    l = parse("a0.p a0.q + a0.p a1.q", "star", SIG)
    r = parse("a0.p (a0.q + a1.q)", "star", SIG)
    assert not bisim_lts(derive_star(l, SIG), 0, derive_star(r, SIG), 0)


def test_lts_counterexample_kinds():
    v = bisim_lts(derive_star(sx.Lit(0, "p"), SIG), 0, derive_star(sx.Lit(1, "p"), SIG), 0)
    assert (v.counterexample.steps, v.counterexample.atom) == ((), 0)
    assert v.counterexample.kind == "accept-vs-reject"
    v = bisim_lts(derive_star(parse("a0.p a0.q", "star", SIG), SIG), 0, derive_star(parse("a0.p a0.r", "star", SIG), SIG), 0)
    assert v.counterexample.steps == ((0, "p"),)
    assert v.counterexample.kind == "action-mismatch"


@given(star_exprs(), star_exprs())
def test_lts_counterexample_is_well_formed(r, s):
    v = bisim_lts(derive_star(r, SIG), 0, derive_star(s, SIG), 0)
    if not v.equivalent:
        assert v.counterexample.kind in KINDS
        assert 0 <= v.counterexample.atom < SIG.n_atoms


def test_lts_witness_is_a_bisimulation():
    l = Lts(SIG1, ("x", "y"), 0, (((1, "p", 1),), ((1, "p", 1),)))
    v = bisim_lts(l, 0, l, 1)
    assert v.equivalent
    assert is_bisimulation(l, l, v.witness)


def test_gkat_bisim_examples():
    one = gk.Bool(ONE)
    assert bisim_gkat(derive_gkat(one, SIG), 0, derive_gkat(gk.Seq(one, one), SIG), 0)
    zero = gk.Bool(ZERO)
    pz = gk.Seq(gk.Act("p"), zero)
    assert not bisim_gkat(derive_gkat(zero, SIG), 0, derive_gkat(pz, SIG), 0)
    assert gkat_lang_equiv(zero, pz, SIG)


@given(skipfree_exprs())
def test_bisim_is_reflexive_with_diagonal_witness(e):
    a = derive_skipfree(e, SIG)
    v = bisim_skipfree(a, 0, a, 0)
    assert v.equivalent
    assert all(x == y for x, y in v.witness)


@given(skipfree_exprs(), skipfree_exprs())
def test_bisim_is_symmetric(e, f):
    assert bisim_exprs(e, f, SIG).equivalent == bisim_exprs(f, e, SIG).equivalent


@given(skipfree_exprs(), skipfree_exprs(), skipfree_exprs())
def test_bisim_is_transitive(e, f, g):
    if bisim_exprs(e, f, SIG) and bisim_exprs(f, g, SIG):
        assert bisim_exprs(e, g, SIG)


@given(skipfree_exprs(), skipfree_exprs())
def test_bisim_witness_checks_out(e, f):
    a, b = derive_skipfree(e, SIG), derive_skipfree(f, SIG)
    v = bisim_skipfree(a, 0, b, 0)
    if v.equivalent:
        assert (0, 0) in v.witness
        assert is_bisimulation(a, b, v.witness)


@given(star_exprs())
def test_lts_plus_zero(r):
    assert bisim_lts(derive_star(r, SIG), 0, derive_star(sx.Plus(r, sx.ZERO), SIG), 0)


@given(star_exprs(), star_exprs())
def test_lts_plus_commutes(r, s):
    assert bisim_lts(derive_star(sx.Plus(r, s), SIG), 0, derive_star(sx.Plus(s, r), SIG), 0)


# dead states and pruning


def test_dead_state_examples():
    assert dead_states(derive_skipfree(sfe("p *[1] q"), SIG)) == {0}
    assert dead_states(derive_skipfree(p, SIG)) == frozenset()
    assert dead_states(derive_skipfree(sf.ZERO, SIG)) == {0}


def test_prune_automaton_drops_edges_into_dead_states():
    a = derive_skipfree(sfe("p . (q *[1] r) +[t] q"), SIG)
    pa = prune_automaton(a)
    assert dead_states(pa) == dead_states(a)
    for fams in pa.trans:
        assert all(tgt == ACCEPT or tgt not in dead_states(a) for _, _, tgt in fams)


def test_prune_expr_examples():
    assert prune_expr(p, SIG) == p
    assert prune_expr(sfe("p . (q . 0)"), SIG) == sf.ZERO
    assert prune_expr(sfe("p +[t] q"), SIG) == sfe("p +[t] q")
    assert prune_expr(sfe("p *[1] q"), SIG) == sf.ZERO
    assert prune_expr(sfe("(p . 0) *[t] q"), SIG) == sfe("0 *[t] q")


@given(skipfree_exprs())
def test_dead_states_match_reachability_oracle(e):
    a = derive_skipfree(e, SIG)
    assert dead_states(a) == dead_oracle(a)


@given(skipfree_exprs())
def test_pruning_preserves_language(e):
    assert lang_equiv(e, prune_expr(e, SIG), SIG)


@given(skipfree_exprs())
def test_pruned_expression_matches_pruned_automaton(e):
    pe = derive_skipfree(prune_expr(e, SIG), SIG)
    assert bisim_skipfree(pe, 0, prune_automaton(derive_skipfree(e, SIG)), 0)


def test_prune_automaton_without_dead_states_is_identity():
    a = derive_skipfree(sfe("p . q +[t] r"), SIG)
    assert prune_automaton(a) == a


def test_prune_diverging_loop_rejects_everything():
    a = prune_automaton(derive_skipfree(sfe("p *[1] q"), SIG))
    assert all(a.step(0, alpha) is None for alpha in range(SIG.n_atoms))


# language equivalence


def test_lang_equiv_examples():
    assert lang_equiv(sfe("p *[1] q"), sf.ZERO, SIG)
    assert lang_equiv(sfe("p . 0"), sf.ZERO, SIG)
    v = lang_equiv(p, q, SIG)
    assert not v
    cx = v.counterexample
    assert cx.word == ((0, "p"),)
    assert cx.accepted_by == 1


def test_lang_counterexample_word_is_accepted_by_one_side():
    e, f = sfe("p . (q +[t] r)"), sfe("p . q")
    v = lang_equiv(e, f, SIG)
    a, b = derive_skipfree(e, SIG), derive_skipfree(f, SIG)
    w = v.counterexample.word
    assert accepts(a, 0, w) != accepts(b, 0, w)
    assert accepts((a, b)[v.counterexample.accepted_by - 1], 0, w)


@given(skipfree_exprs(), skipfree_exprs())
def test_bisimilar_implies_language_equivalent(e, f):
    if bisim_exprs(e, f, SIG):
        assert lang_equiv(e, f, SIG)


@given(skipfree_exprs(SIG1, max_leaves=6), skipfree_exprs(SIG1, max_leaves=6))
def test_lang_equiv_agrees_with_bounded_traces(e, f):
    a, b = derive_skipfree(e, SIG1), derive_skipfree(f, SIG1)
    bound = a.n_states * b.n_states + 1
    v = lang_equiv(e, f, SIG1)
    assert v.equivalent == bounded_trace_equal(a, 0, b, 0, bound)
    if not v.equivalent:
        w = v.counterexample.word
        assert accepts(a, 0, w) != accepts(b, 0, w)


# traces


def test_traces_examples():
    assert traces(p, SIG1, 1) == {((0, "p"),), ((1, "p"),)}
    assert traces(sf.ZERO, SIG1, 3) == set()
    assert traces(sfe("p . q", SIG1), SIG1, 1) == set()
    assert len(traces(sfe("p . q", SIG1), SIG1, 2)) == 4
    with pytest.raises(ValueError):
        traces(p, SIG1, 0)


@given(skipfree_exprs(SIG1, max_leaves=6), st.integers(1, 4))
def test_traces_match_inductive_oracle(e, n):
    assert traces(e, SIG1, n) == lang_oracle(e, SIG1, n)


def test_guarded_lang_examples():
    assert guarded_lang_gkat(gk.Bool(t), SIG1, 0) == {(1,)}
    assert guarded_lang_gkat(gk.Act("p"), SIG1, 1) == {(a, "p", b) for a in (0, 1) for b in (0, 1)}
    assert guarded_lang_gkat(gk.Act("p"), SIG1, 0) == set()
    loop = gk.Loop(gk.Act("p"), t)
    assert guarded_lang_gkat(loop, SIG1, 1) == {(0,), (1, "p", 0)}


@given(skipfree_exprs(SIG1, max_leaves=6), st.integers(1, 3))
def test_embedding_lifts_traces(e, n):
    expected = traces_times_atoms(traces(e, SIG1, n), SIG1.n_atoms)
    assert guarded_lang_gkat(embed_syntax(e), SIG1, n) == expected


@given(gkat_exprs(SIG1, max_leaves=6), gkat_exprs(SIG1, max_leaves=6))
def test_gkat_lang_equiv_agrees_with_guarded_strings(e, f):
    if gkat_lang_equiv(e, f, SIG1):
        n = derive_gkat(e, SIG1).n_states * derive_gkat(f, SIG1).n_states + 1
        assert guarded_lang_gkat(e, SIG1, n) == guarded_lang_gkat(f, SIG1, n)


# relational semantics


def test_relational_identity_and_empty():
    sigma = Interpretation(3, {"t": frozenset(), "s": frozenset()}, {a: frozenset() for a in SIG.actions})
    assert eval_relational(gk.Bool(ONE), sigma, SIG) == {(0, 0), (1, 1), (2, 2)}
    assert eval_relational(sf.ZERO, sigma, SIG) == frozenset()


def test_relational_guard_example():
    sigma = Interpretation(2, {"t": frozenset({0})}, {"p": frozenset({(0, 1)}), "q": frozenset()})
    assert eval_relational(sfe("p +[t] 0", SIG1), sigma, SIG1) == {(0, 1)}
    assert eval_relational(sfe("0 +[t] p", SIG1), sigma, SIG1) == frozenset()


def test_relational_loop_example():
    # p moves 0 -> 1 -> 2; t holds at 0 and 1; q is the identity
    sigma = Interpretation(
        3, {"t": frozenset({0, 1})}, {"p": frozenset({(0, 1), (1, 2)}), "q": frozenset({(0, 0), (1, 1), (2, 2)})}
    )
    assert eval_relational(sfe("p *[t] q", SIG1), sigma, SIG1) == {(0, 2), (1, 2), (2, 2)}


def test_interpretation_validation():
    with pytest.raises(InterpretationError):
        Interpretation(1, {"t": frozenset({3})}, {})
    sigma = Interpretation(1, {"t": frozenset()}, {"p": frozenset()})
    with pytest.raises(InterpretationError, match="action 'q'"):
        eval_relational(q, sigma, SIG1)


@given(skipfree_exprs(), interpretations())
def test_relational_matches_set_oracle(e, sigma):
    assert eval_relational(e, sigma, SIG) == relational_oracle(e, sigma, SIG)


@given(skipfree_exprs(max_leaves=6), skipfree_exprs(max_leaves=6), interpretations())
def test_language_equivalence_is_relationally_sound(e, f, sigma):
    assume(lang_equiv(e, f, SIG))
    assert eval_relational(e, sigma, SIG) == eval_relational(f, sigma, SIG)


@given(skipfree_exprs(), interpretations())
def test_pruning_is_relationally_invisible(e, sigma):
    assert eval_relational(e, sigma, SIG) == eval_relational(prune_expr(e, SIG), sigma, SIG)
