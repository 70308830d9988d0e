"""Checking equational proof scripts against the five axiom systems.

A script rewrites ``lhs`` step by step; each step names an axiom, the
position of the rewritten subterm, a direction and an explicit substitution
for every variable of the axiom.  Guards are compared up to Boolean algebra.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .bool_algebra import ZERO, And, BExp, Not, Or, Test, ba_equiv, render_bexp
from .equivalence import bisim_exprs, bisim_gkat, bisim_lts, gkat_lang_equiv, lang_equiv
from .errors import ParseError, SfgkatError
from .small_step import derive_gkat, derive_star
from .syntax import Signature, parse, parse_bexp, read_program, render, replace_at, subterm
from .syntax import gkat as gk
from .syntax import skipfree as sf
from .syntax import star as st
from .syntax.common import Expr

SYSTEMS = {
    "skipfree-bisim": "skipfree",
    "skipfree-lang": "skipfree",
    "star": "star",
    "gkat-bisim": "gkat",
    "gkat-lang": "gkat",
}

DIRECTIONS = {
    "left-to-right": "ltr", "ltr": "ltr", "l2r": "ltr", "->": "ltr",
    "right-to-left": "rtl", "rtl": "rtl", "r2l": "rtl", "<-": "rtl",
}


class ProofError(SfgkatError):
    def __init__(self, message: str, subterm=None):
        self.subterm = subterm
        super().__init__(message)


class Var(Expr):
    """Metavariable inside an axiom pattern."""

    __slots__ = ("name",)
    fields = ("name",)


@dataclass(frozen=True)
class Axiom:
    id: str
    lhs: Expr
    rhs: Expr
    expr_vars: frozenset
    guard_vars: frozenset
    rule: str = "eq"  # "eq" or "rsp"
    dagger: bool = False

    @property
    def variables(self) -> frozenset:
        return self.expr_vars | self.guard_vars


def _vars_of(pattern) -> tuple[set, set]:
    ev, gv = set(), set()

    def bvars(b):
        if isinstance(b, Test):
            gv.add(b.name)
        elif isinstance(b, (And, Or)):
            bvars(b.left)
            bvars(b.right)
        elif isinstance(b, Not):
            bvars(b.arg)

    def go(t):
        if isinstance(t, Var):
            ev.add(t.name)
            return
        for f in t.fields:
            v = getattr(t, f)
            if isinstance(v, BExp):
                bvars(v)
        for c in t.children:
            go(c)

    go(pattern)
    return ev, gv


_PAT_SIG = Signature.of(("a", "b", "c"), ("x", "y", "z"))


def _pattern(text: str, lang: str) -> Expr:
    e = parse(text, lang, _PAT_SIG)
    return _acts_to_vars(e)


def _acts_to_vars(e):
    if isinstance(e, (sf.Act, gk.Act)):
        return Var(e.name)
    if not e.children:
        return e
    return e.with_children([_acts_to_vars(c) for c in e.children])


def _axiom(id, lhs, rhs, lang=None, rule="eq", dagger=False) -> Axiom:
    if isinstance(lhs, str):
        lhs, rhs = _pattern(lhs, lang), _pattern(rhs, lang)
    ev1, gv1 = _vars_of(lhs)
    ev2, gv2 = _vars_of(rhs)
    return Axiom(id, lhs, rhs, frozenset(ev1 | ev2), frozenset(gv1 | gv2), rule, dagger)


def _skipfree_axioms():
    L = "skipfree"
    return [
        _axiom("G0", "x", "x +[1] y", L),
        _axiom("G1", "x", "x +[b] x", L),
        _axiom("G2", "x +[b] y", "y +[!b] x", L),
        _axiom("G3", "x +[b] (y +[c] z)", "(x +[b] y) +[b | c] z", L),
        _axiom("G6", "0 . x", "0", L),
        _axiom("dagger", "x . 0", "0", L, dagger=True),
        _axiom("G7", "x . (y . z)", "(x . y) . z", L),
        _axiom("G8", "(x +[b] y) . z", "x . z +[b] y . z", L),
        _axiom("FP", "x *[b] y", "x . (x *[b] y) +[b] y", L),
        # premise: z = x z +_b y
        _axiom("RSP", "z", "x *[b] y", L, rule="rsp"),
    ]


def _star_axioms():
    x, y, z = Var("x"), Var("y"), Var("z")
    P, S, K, Z = st.Plus, st.Seq, st.Star, st.ZERO
    return [
        _axiom("star-idem", x, P(x, x)),
        _axiom("star-zero", x, P(x, Z)),
        _axiom("star-comm", P(x, y), P(y, x)),
        _axiom("star-assoc", P(x, P(y, z)), P(P(x, y), z)),
        _axiom("star-zero-seq", S(Z, x), Z),
        _axiom("star-seq-assoc", S(x, S(y, z)), S(S(x, y), z)),
        _axiom("star-dist", S(P(x, y), z), P(S(x, z), S(y, z))),
        _axiom("star-fp", K(x, y), P(S(x, K(x, y)), y)),
        _axiom("star-rsp", z, K(x, y), rule="rsp"),
    ]


def _gkat_axioms():
    L = "gkat"
    return [
        _axiom("gkat-idem", "x", "x +[b] x", L),
        _axiom("gkat-skew", "x +[b] y", "y +[!b] x", L),
        _axiom("gkat-assoc", "x +[b] (y +[c] z)", "(x +[b] y) +[b | c] z", L),
        _axiom("gkat-guard", "x +[b] y", "b . x +[b] y", L),
        _axiom("gkat-dist", "(x +[b] y) . z", "x . z +[b] y . z", L),
        _axiom("gkat-seq-assoc", "x . (y . z)", "(x . y) . z", L),
        _axiom("gkat-zero-seq", "0 . x", "0", L),
        _axiom("gkat-seq-zero", "x . 0", "0", L, dagger=True),
        _axiom("gkat-one-seq", "1 . x", "x", L),
        _axiom("gkat-seq-one", "x . 1", "x", L),
        _axiom("gkat-unroll", "x . x^[b] +[b] 1", "x^[b]", L),
        _axiom("gkat-tighten", "(x +[a] 1)^[b]", "(a . x)^[b]", L),
        # premise: z = x z +_b y, side condition E(x) = 0
        _axiom("gkat-rsp", "z", "x^[b] . y", L, rule="rsp"),
    ]


_TABLES = {"skipfree": _skipfree_axioms(), "star": _star_axioms(), "gkat": _gkat_axioms()}
AXIOMS: dict[str, dict[str, Axiom]] = {}
for _sys, _lang in SYSTEMS.items():
    table = {a.id: a for a in _TABLES[_lang] if not (a.dagger and _sys.endswith("-bisim"))}
    AXIOMS[_sys] = table

BA = "BA"


def axioms_for(system: str) -> dict[str, Axiom]:
    if system not in AXIOMS:
        raise ProofError(f"unknown system {system!r}")
    return AXIOMS[system]


def rsp_premise(ax: Axiom, lang: str) -> tuple[Expr, Expr]:
    """The premise ``z = x z +_b y`` (or ``z = x z + y``) as a pattern pair."""
    z, x, y = Var("z"), Var("x"), Var("y")
    if lang == "skipfree":
        return z, sf.Guard(Test("b"), sf.Seq(x, z), y)
    if lang == "gkat":
        return z, gk.Guard(Test("b"), gk.Seq(x, z), y)
    return z, st.Plus(st.Seq(x, z), y)


# instantiation and comparison


def _inst_b(b: BExp, subst: dict) -> BExp:
    if isinstance(b, Test):
        return subst[b.name]
    if isinstance(b, (And, Or)):
        return type(b)(_inst_b(b.left, subst), _inst_b(b.right, subst))
    if isinstance(b, Not):
        return Not(_inst_b(b.arg, subst))
    return b


def instantiate(pattern: Expr, subst: dict) -> Expr:
    if isinstance(pattern, Var):
        return subst[pattern.name]
    args = []
    kids = set(pattern.kids)
    for f in pattern.fields:
        v = getattr(pattern, f)
        if f in kids:
            args.append(instantiate(v, subst))
        elif isinstance(v, BExp):
            args.append(_inst_b(v, subst))
        else:
            args.append(v)
    return type(pattern)(*args)


def eq_mod_ba(t1, t2, sig: Signature) -> bool:
    if t1 is t2:
        return True
    if isinstance(t1, BExp) and isinstance(t2, BExp):
        return ba_equiv(t1, t2, sig.universe)
    if type(t1) is not type(t2):
        return False
    if not isinstance(t1, Expr):
        return t1 == t2
    return all(eq_mod_ba(getattr(t1, f), getattr(t2, f), sig) for f in t1.fields)


# scripts


@dataclass
class Step:
    axiom: str
    position: tuple = ()
    direction: str = "ltr"
    subst: dict = field(default_factory=dict)
    premise: "ProofScript | None" = None


@dataclass
class ProofScript:
    system: str
    sig: Signature
    lhs: Expr
    rhs: Expr
    steps: list = field(default_factory=list)
    name: str = ""


@dataclass
class CheckResult:
    status: str  # "ok", "rejected" or "internal-error"
    message: str = ""
    step: int | None = None
    subterm: str | None = None
    final: Expr | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.message:
            out["message"] = self.message
        if self.step is not None:
            out["step"] = self.step
        if self.subterm is not None:
            out["subterm"] = self.subterm
        return out


def _show(t) -> str:
    if isinstance(t, BExp):
        return render_bexp(t)
    try:
        return render(t)
    except TypeError:
        return repr(t)


def check_step(current: Expr, s: Step, system: str, sig: Signature) -> Expr:
    lang = SYSTEMS.get(system)
    if lang is None:
        raise ProofError(f"unknown system {system!r}")
    direction = DIRECTIONS.get(s.direction)
    if direction is None:
        raise ProofError(f"unknown direction {s.direction!r}")
    try:
        here = subterm(current, s.position)
    except IndexError as exc:
        raise ProofError(f"invalid position {list(s.position)}: {exc}") from None

    if s.axiom == BA:
        return _ba_step(current, here, s, lang, sig)

    table = axioms_for(system)
    ax = table.get(s.axiom)
    if ax is None:
        known = _TABLES[lang]
        if any(a.id == s.axiom for a in known):
            raise ProofError(f"axiom {s.axiom} is not part of system {system}")
        raise ProofError(f"unknown axiom {s.axiom!r} for system {system}")
    keys = set(s.subst)
    if keys != set(ax.variables):
        raise ProofError(
            f"substitution for {s.axiom} must bind exactly {sorted(ax.variables)}, got {sorted(keys)}"
        )
    for k in ax.guard_vars:
        if not isinstance(s.subst[k], BExp):
            raise ProofError(f"variable {k} of {s.axiom} must be bound to a test")
    for k in ax.expr_vars:
        if isinstance(s.subst[k], BExp) or isinstance(s.subst[k], Var):
            raise ProofError(f"variable {k} of {s.axiom} must be bound to an expression")
    src, dst = (ax.lhs, ax.rhs) if direction == "ltr" else (ax.rhs, ax.lhs)
    inst_src = instantiate(src, s.subst)
    if not eq_mod_ba(here, inst_src, sig):
        raise ProofError(
            f"{s.axiom} does not apply at {list(s.position)}: expected {_show(inst_src)}, found {_show(here)}", here
        )
    if ax.rule == "rsp":
        _check_rsp(ax, s, lang, system, sig)
    return replace_at(current, s.position, instantiate(dst, s.subst))


def _check_rsp(ax: Axiom, s: Step, lang: str, system: str, sig: Signature):
    if s.premise is None:
        raise ProofError(f"{s.axiom} needs a premise script proving z = x z {'+' if lang == 'star' else '+_b'} y")
    pl, pr = rsp_premise(ax, lang)
    want_l, want_r = instantiate(pl, s.subst), instantiate(pr, s.subst)
    p = s.premise
    if p.system != system:
        raise ProofError(f"premise is in system {p.system}, expected {system}")
    oriented = (eq_mod_ba(p.lhs, want_l, sig) and eq_mod_ba(p.rhs, want_r, sig)) or (
        eq_mod_ba(p.lhs, want_r, sig) and eq_mod_ba(p.rhs, want_l, sig)
    )
    if not oriented:
        raise ProofError(f"premise must prove {_show(want_l)} = {_show(want_r)}")
    res = check_script(p, audit=False)
    if not res.ok:
        raise ProofError(f"premise rejected: {res.message}")
    if lang == "gkat":
        e = guardedness_E(s.subst["x"])
        if not ba_equiv(e, ZERO, sig.universe):
            raise ProofError(f"side condition E(x) = 0 fails: E({_show(s.subst['x'])}) = {render_bexp(e)}")


def _ba_step(current, here, s: Step, lang: str, sig: Signature) -> Expr:
    if lang == "star":
        raise ProofError("BA steps are not available for star expressions")
    if set(s.subst) != {"b"} or not isinstance(s.subst["b"], BExp):
        raise ProofError("BA step must bind exactly the test b")
    new = s.subst["b"]
    if isinstance(here, gk.Bool):
        old = here.b
        repl = gk.Bool(new)
    elif hasattr(here, "b") and isinstance(getattr(here, "b"), BExp):
        old = here.b
        repl = type(here)(*[new if f == "b" else getattr(here, f) for f in here.fields])
    else:
        raise ProofError(f"no test at {list(s.position)}: found {_show(here)}", here)
    if not ba_equiv(old, new, sig.universe):
        raise ProofError(f"BA step: {render_bexp(old)} and {render_bexp(new)} are not equivalent", here)
    return replace_at(current, s.position, repl)


def semantic_check(system: str, lhs: Expr, rhs: Expr, sig: Signature) -> bool:
    if system == "skipfree-bisim":
        return bisim_exprs(lhs, rhs, sig).equivalent
    if system == "skipfree-lang":
        return lang_equiv(lhs, rhs, sig).equivalent
    if system == "star":
        return bisim_lts(derive_star(lhs, sig), 0, derive_star(rhs, sig), 0).equivalent
    if system == "gkat-bisim":
        return bisim_gkat(derive_gkat(lhs, sig), 0, derive_gkat(rhs, sig), 0).equivalent
    if system == "gkat-lang":
        return gkat_lang_equiv(lhs, rhs, sig).equivalent
    raise ProofError(f"unknown system {system!r}")


def check_script(p: ProofScript, audit: bool = True) -> CheckResult:
    if p.system not in SYSTEMS:
        return CheckResult("rejected", f"unknown system {p.system!r}")
    cur = p.lhs
    for i, s in enumerate(p.steps):
        try:
            cur = check_step(cur, s, p.system, p.sig)
        except ProofError as exc:
            sub = _show(exc.subterm) if exc.subterm is not None else None
            return CheckResult("rejected", f"step {i} ({s.axiom}): {exc}", i, sub, cur)
    if not eq_mod_ba(cur, p.rhs, p.sig):
        return CheckResult("rejected", f"final term {_show(cur)} differs from rhs {_show(p.rhs)}", len(p.steps), None, cur)
    if audit and not semantic_check(p.system, p.lhs, p.rhs, p.sig):
        return CheckResult("internal-error", f"accepted proof of a semantically false equation in {p.system}", final=cur)
    return CheckResult("ok", final=cur)


def guardedness_E(e: gk.GkatExp) -> BExp:
    if isinstance(e, sf.SkipFreeExp):
        e = gk.embed_syntax(e)
    if isinstance(e, gk.Bool):
        return e.b
    if isinstance(e, gk.Act):
        return ZERO
    if isinstance(e, gk.Guard):
        return Or(And(e.b, guardedness_E(e.left)), And(Not(e.b), guardedness_E(e.right)))
    if isinstance(e, gk.Seq):
        return And(guardedness_E(e.left), guardedness_E(e.right))
    if isinstance(e, gk.Loop):
        return Not(e.b)
    raise TypeError(f"not a GKAT expression: {e!r}")


# JSON


def _language_sig(data: dict, lang: str) -> Signature:
    if "tests" in data or "actions" in data:
        return Signature.of(data.get("tests", ()), data.get("actions", ()))
    tests: dict = {}
    actions: dict = {}

    def visit(d):
        for key in ("lhs", "rhs"):
            if key in d:
                _collect(d[key], lang, tests, actions)
        for step in d.get("steps", []):
            for v in step.get("subst", {}).values():
                try:
                    _collect(v, lang, tests, actions)
                except ParseError:
                    pass
            if step.get("premise"):
                visit(step["premise"])

    visit(data)
    return Signature.of(tuple(tests), tuple(a for a in actions if a not in tests))


def _collect(text: str, lang: str, tests: dict, actions: dict):
    pr = read_program(text, lang)
    for t in pr.sig.tests:
        tests.setdefault(t)
    for a in pr.sig.actions:
        actions.setdefault(a)


def load_script(data: dict, sig: Signature | None = None) -> ProofScript:
    try:
        system = data["system"]
        lang = SYSTEMS.get(system)
        if lang is None:
            raise ParseError(f"unknown system {system!r}")
        if sig is None:
            sig = _language_sig(data, lang)
        lhs = parse(data["lhs"], lang, sig)
        rhs = parse(data["rhs"], lang, sig)
        steps = []
        for raw in data.get("steps", []):
            axiom = raw["axiom"]
            ax = AXIOMS[system].get(axiom) or next((a for a in _TABLES[lang] if a.id == axiom), None)
            guard_vars = {"b"} if axiom == BA else (ax.guard_vars if ax else set())
            subst = {}
            for k, v in raw.get("subst", {}).items():
                subst[k] = parse_bexp(v, sig.universe) if k in guard_vars else parse(v, lang, sig)
            premise = load_script(raw["premise"], sig) if raw.get("premise") else None
            steps.append(
                Step(axiom, tuple(raw.get("position", ())), raw.get("direction", "ltr"), subst, premise)
            )
        return ProofScript(system, sig, lhs, rhs, steps, data.get("name", ""))
    except KeyError as exc:
        raise ParseError(f"malformed proof script: missing {exc}") from None


def dump_script(p: ProofScript, header: bool = True) -> dict:
    out: dict = {}
    if p.name:
        out["name"] = p.name
    out["system"] = p.system
    if header:
        out["tests"] = list(p.sig.tests)
        out["actions"] = list(p.sig.actions)
    out["lhs"] = render(p.lhs)
    out["rhs"] = render(p.rhs)
    steps = []
    for s in p.steps:
        d = {
            "axiom": s.axiom,
            "position": list(s.position),
            "direction": "left-to-right" if DIRECTIONS.get(s.direction) == "ltr" else "right-to-left",
            "subst": {k: _show(v) for k, v in sorted(s.subst.items())},
        }
        if s.premise is not None:
            d["premise"] = dump_script(s.premise, header=False)
        steps.append(d)
    out["steps"] = steps
    return out


