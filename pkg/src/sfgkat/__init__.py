"""Skip-free GKAT: deciding program equivalence for guarded programs without skip.

The main entry points are re-exported here; see the submodules for the rest.
"""
from .bool_algebra import AtomSet, TestUniverse, ba_equiv, entails, evaluate
from .equivalence import (
    EquivVerdict,
    Interpretation,
    Trace,
    bisim_exprs,
    bisim_gkat,
    bisim_lts,
    bisim_skipfree,
    eval_relational,
    gkat_lang_equiv,
    lang_equiv,
    prune_automaton,
    prune_expr,
    traces,
)
from .errors import SfgkatError
from .proofcheck import check_script, check_step, guardedness_E, load_script
from .small_step import derive, derive_gkat, derive_skipfree, derive_star
from .solve import canonical_solution, check_well_layered, find_layering
from .syntax import Signature, parse, read_program, render
from .translate import gtr, is_deterministic_star, rtg, separation

__version__ = "0.1.0"
