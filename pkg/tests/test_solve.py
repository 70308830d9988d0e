import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SIG, SIG1, star_exprs
from sfgkat.equivalence import bisim_lts
from sfgkat.errors import CapacityError, LayeringError
from sfgkat.small_step import ACCEPT, Lts, derive_star, merge_families
from sfgkat.solve import (
    LayeredLts,
    canonical_solution,
    check_well_layered,
    expand_fundamental,
    find_layering,
    solutions_deterministic,
)
from sfgkat.syntax import parse
from sfgkat.syntax import star as sx

a0p, a1q = sx.Lit(0, "p"), sx.Lit(1, "q")


def lts(rows, sig=SIG1):
    """Build an LTS from per-state lists of (atom, action, target)."""
    trans = tuple(merge_families([(1 << a, p, t) for a, p, t in row]) for row in rows)
    return Lts(sig, tuple(f"x{i}" for i in range(len(rows))), 0, trans)


def layered(l, edges):
    """Tag every transition along the given (x, y) pairs as entry."""
    out = set()
    for x, y in edges:
        for a, p, t in l.successors(x):
            if t == y:
                out.add((x, a, p, y))
    return LayeredLts(l, frozenset(out))


def any_layering_exists(l):
    """Brute force over every subset of state-to-state edges."""
    edges = sorted({(x, t) for x in range(l.n_states) for _, _, t in l.successors(x) if t != ACCEPT})
    for k in range(len(edges) + 1):
        for chosen in itertools.combinations(edges, k):
            if check_well_layered(layered(l, chosen)) is None:
                return True
    return False


@st.composite
def small_ltss(draw):
    n = draw(st.integers(1, 3))
    step = st.tuples(st.integers(0, 1), st.sampled_from(["p", "q"]), st.integers(-1, n - 1))
    return lts([draw(st.lists(step, max_size=3)) for _ in range(n)])


# well-layeredness


def test_body_self_loop_is_rejected():
    l = lts([[(0, "p", 0)]])
    v = check_well_layered(LayeredLts(l))
    assert v.condition == "no body loops"


def test_acyclic_all_body_is_fine():
    l = lts([[(0, "p", 1)], [(1, "q", ACCEPT)]])
    assert check_well_layered(LayeredLts(l)) is None


def test_entry_without_return_path():
    l = lts([[(0, "p", 1)], [(1, "q", ACCEPT)]])
    v = check_well_layered(layered(l, [(0, 1)]))
    assert v.condition == "full specification"
    assert v.path == (0, 1)


def test_entered_loop_cannot_terminate():
    l = lts([[(0, "p", 1), (1, "q", ACCEPT)], [(0, "p", 0), (1, "q", ACCEPT)]])
    v = check_well_layered(layered(l, [(0, 1)]))
    assert v.condition == "goto-free"


def test_flatness():
    l = lts([[(0, "p", 0), (1, "q", 0)]])
    lab = LayeredLts(l, frozenset({(0, 0, "p", 0)}))
    assert check_well_layered(lab).condition == "flatness"


# layering search


def test_single_accepting_state_needs_no_entries():
    l = lts([[(0, "p", ACCEPT)]])
    lab = find_layering(l)
    assert lab is not None and lab.entries == frozenset()


def test_two_terminating_states_in_a_cycle_have_no_layering():
    l = lts([[(0, "p", 1), (1, "q", ACCEPT)], [(0, "p", 0), (1, "q", ACCEPT)]])
    assert find_layering(l) is None
    assert not any_layering_exists(l)


def test_search_size_guard():
    n = 5
    rows = [[(0, "p", (x + 1) % n), (1, "q", (x + 2) % n), (0, "q", (x + 3) % n), (1, "p", (x + 4) % n)] for x in range(n)]
    with pytest.raises(CapacityError):
        find_layering(lts(rows), max_edges=4)


@given(star_exprs(max_leaves=6))
def test_expression_ltss_are_layered(r):
    l = derive_star(r, SIG)
    lab = find_layering(l)
    assert lab is not None
    assert check_well_layered(lab) is None


@given(small_ltss())
def test_search_agrees_with_brute_force(l):
    lab = find_layering(l)
    if lab is None:
        assert not any_layering_exists(l)
    else:
        assert check_well_layered(lab) is None


# canonical solutions


def test_solution_of_single_accepting_transition():
    l = Lts(SIG1, ("x",), 0, (((1, "p", ACCEPT),),))
    sol = canonical_solution(LayeredLts(l))
    assert sol[0] == sx.Star(sx.Plus(sx.ZERO, sx.ZERO), sx.Plus(a0p, sx.ZERO))
    assert sol.verified[0]


def test_solution_of_empty_lts():
    l = derive_star(sx.ZERO, SIG1)
    sol = canonical_solution(find_layering(l))
    assert sol[0] == sx.Star(sx.Plus(sx.ZERO, sx.ZERO), sx.Plus(sx.ZERO, sx.ZERO))
    assert sol.verified[0]


def test_solution_of_star_literal_loop():
    r = sx.Star(a0p, a1q)
    l = derive_star(r, SIG1)
    sol = canonical_solution(find_layering(l))
    assert all(sol.verified.values())
    assert bisim_lts(derive_star(sol[0], SIG1), 0, derive_star(r, SIG1), 0)
    assert solutions_deterministic(sol, SIG1)


def test_ill_layered_input_is_refused():
    l = lts([[(0, "p", 0)]])
    with pytest.raises(LayeringError, match="no body loops"):
        canonical_solution(LayeredLts(l))


def test_annotations_record_atom_joins():
    l = lts([[(0, "p", 0), (1, "q", ACCEPT)]])
    sol = canonical_solution(layered(l, [(0, 0)]))
    ann = sol.annotations[0]
    assert ann["a"].bits == 0b01 and ann["b"].bits == 0b01 and ann["c"].bits == 0b10


@given(star_exprs(max_leaves=6))
def test_solutions_are_bisimilar_to_their_states(r):
    l = derive_star(r, SIG)
    sol = canonical_solution(find_layering(l))
    assert all(sol.verified[x] for x in range(l.n_states))
    if l.is_deterministic():
        assert solutions_deterministic(sol, SIG)


@given(small_ltss())
def test_solutions_of_arbitrary_layered_ltss(l):
    lab = find_layering(l)
    if lab is not None:
        sol = canonical_solution(lab)
        assert all(sol.verified.values())


# expansion into initial transitions


def test_expand_examples():
    assert expand_fundamental(a0p, SIG1) == sx.Plus(a0p, sx.ZERO)
    assert expand_fundamental(sx.ZERO, SIG1) == sx.Plus(sx.ZERO, sx.ZERO)
    r = parse("a0.p a1.q", "star", SIG1)
    assert expand_fundamental(r, SIG1) == sx.Plus(sx.ZERO, sx.Seq(a0p, a1q))


@given(star_exprs())
def test_expansion_preserves_bisimilarity(r):
    assert bisim_lts(derive_star(expand_fundamental(r, SIG), SIG), 0, derive_star(r, SIG), 0)
