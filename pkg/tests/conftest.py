import os

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from sfgkat.bool_algebra import ONE, ZERO, And, Not, Or, Test
from sfgkat.syntax import Signature
from sfgkat.syntax import gkat as gk
from sfgkat.syntax import skipfree as sf
from sfgkat.syntax import star as sx

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SIG = Signature.of(("t", "s"), ("p", "q", "r"))
SIG1 = Signature.of(("t",), ("p", "q"))


def bexps(tests=SIG.tests):
    leaves = st.sampled_from([ZERO, ONE] + [Test(t) for t in tests])
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            inner.map(Not),
            st.builds(And, inner, inner),
            st.builds(Or, inner, inner),
        ),
        max_leaves=6,
    )


def skipfree_exprs(sig=SIG, max_leaves=8):
    leaves = st.one_of(st.just(sf.ZERO), st.sampled_from([sf.Act(p) for p in sig.actions]))
    guards = bexps(sig.tests)
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.builds(sf.Guard, guards, inner, inner),
            st.builds(sf.Seq, inner, inner),
            st.builds(lambda e, b, f: sf.While(e, b, f), inner, guards, inner),
        ),
        max_leaves=max_leaves,
    )


def star_exprs(sig=SIG, max_leaves=8):
    lits = st.builds(sx.Lit, st.integers(0, sig.n_atoms - 1), st.sampled_from(sig.actions))
    leaves = st.one_of(st.just(sx.ZERO), lits, lits)
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.builds(sx.Plus, inner, inner),
            st.builds(sx.Seq, inner, inner),
            st.builds(sx.Star, inner, inner),
        ),
        max_leaves=max_leaves,
    )


def gkat_exprs(sig=SIG, max_leaves=8):
    guards = bexps(sig.tests)
    leaves = st.one_of(guards.map(gk.Bool), st.sampled_from([gk.Act(p) for p in sig.actions]))
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.builds(gk.Guard, guards, inner, inner),
            st.builds(gk.Seq, inner, inner),
            st.builds(gk.Loop, inner, guards),
        ),
        max_leaves=max_leaves,
    )


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
