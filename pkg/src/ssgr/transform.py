"""From substitution-set grammars to RTGs over coded pairs.

``ran(G, N, x1, x2)`` builds a regular tree grammar whose language from
``N[x1,x2]`` contains the coding of every ground instance of
``(theta(x1), theta(x2))`` for the substitutions ``theta`` generated from
``N``.  The grammar has one nonterminal per demanded pair of sides
(``N'[x,y]``, ``N'[x,s(A)]``, ``N'[A,y]``, ``N'[_|_,y]`` ...) plus the three
fixed nonterminals ``[A,A]``, ``[A,_|_]`` and ``[_|_,A]`` generating all
codings of arbitrary constructor terms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from ssgr.coding import BOT, PairedSymbol, _Bottom, code, paired_signature
from ssgr.rtg import NT, RTG, Recognizer
from ssgr.ssg import SSG, Comp, Empty, Expr, NonTerm, Rec, SubstConst, subst_set
from ssgr.terms import (
    ID,
    Fun,
    Subst,
    Term,
    Var,
    apply,
    format_position,
    ground_terms,
    positions,
    render,
    subterm_at,
    subterms,
    variables,
)


class _AnyMarker:
    __slots__ = ()

    def __str__(self):
        return "A"

    def __repr__(self):
        return "ANY"


ANY = Fun(_AnyMarker())
TOP = "⊤"

Side = Union[Term, _Bottom]


class TransformError(ValueError):
    pass


class AssumptionViolation(TransformError):
    def __init__(self, report: "AssumptionReport"):
        self.report = report
        super().__init__(str(report))


def is_any(t) -> bool:
    return isinstance(t, Fun) and isinstance(t.symbol, _AnyMarker)


def abstract(t: Side, keep: Iterable[Var] = ()) -> Side:
    """Replace every variable outside ``keep`` by ``A``."""
    if t is BOT:
        return t
    keep = set(keep)
    return apply({v: ANY for v in variables(t) if v not in keep}, t)


def side_text(t: Side) -> str:
    return "_|_" if t is BOT else str(t)


# ---------------------------------------------------------------------------
# Nonterminals of the produced grammar


@dataclass(frozen=True)
class RangeNT:
    goal: str
    left: Side
    right: Side

    def __str__(self):
        return f"{self.goal}[{side_text(self.left)},{side_text(self.right)}]"


@dataclass(frozen=True)
class AnyNT:
    left: Side  # ANY or BOT
    right: Side

    def __str__(self):
        return f"[{side_text(self.left)},{side_text(self.right)}]"


AA = AnyNT(ANY, ANY)
A_BOT = AnyNT(ANY, BOT)
BOT_A = AnyNT(BOT, ANY)


# ---------------------------------------------------------------------------
# Patterns


def pats(rules: SSG | Iterable[tuple[str, Expr]]) -> set[Term]:
    """Subterms of substitution ranges with their variables replaced by ``A``."""
    if isinstance(rules, SSG):
        rules = rules.rules
    out = set()
    for _, rhs in rules:
        for theta in _constants(rhs):
            for s in theta.values():
                for _, t in subterms(s):
                    out.add(abstract(t))
    return out


def _constants(e: Expr) -> Iterable[Subst]:
    if isinstance(e, SubstConst):
        yield e.subst
    elif isinstance(e, Rec):
        yield from _constants(e.body)
    elif hasattr(e, "left"):
        yield from _constants(e.left)
        yield from _constants(e.right)


def is_pattern(t, constructors: Mapping[str, int]) -> bool:
    """Variable-free term over the constructors and ``A``."""
    if is_any(t):
        return True
    if not isinstance(t, Fun) or constructors.get(t.symbol) != t.arity:
        return False
    return all(is_pattern(a, constructors) for a in t.args)


# ---------------------------------------------------------------------------
# Rule shapes


@dataclass(frozen=True)
class Plain:
    theta: Subst


@dataclass(frozen=True)
class RecComp:
    target: str
    delta: Subst | None  # None: left factor without rec, i.e. identity renaming
    theta: Subst
    implicit_id: bool = False


Alternative = Union[Plain, RecComp]


def normalize_alternative(e: Expr) -> Alternative | None:
    """Shape of one right-hand side; None for ``empty``; raises on other shapes."""
    if isinstance(e, SubstConst):
        return Plain(e.subst)
    if isinstance(e, Empty):
        return None
    if isinstance(e, Rec) and isinstance(e.body, NonTerm):
        return RecComp(e.body.name, e.renaming, ID, implicit_id=True)
    if isinstance(e, NonTerm):
        return RecComp(e.name, None, ID, implicit_id=True)
    if isinstance(e, Comp) and isinstance(e.right, SubstConst):
        left = e.left
        if isinstance(left, Rec) and isinstance(left.body, NonTerm):
            return RecComp(left.body.name, left.renaming, e.right.subst)
        if isinstance(left, NonTerm):
            return RecComp(left.name, None, e.right.subst)
    raise TransformError(f"unsupported rule shape: {e}")


# ---------------------------------------------------------------------------
# The assumption


@dataclass(frozen=True)
class Violation:
    rule: str
    kind: str  # "shape", "domain", "idempotence", "renaming", "range-capture", "position"
    detail: str
    pair: tuple[Var, Var] | None = None
    position: tuple | None = None
    left: Term | None = None
    right: Term | None = None
    theta_x: Term | None = None
    theta_y: Term | None = None
    renamed_left: Term | None = None
    renamed_right: Term | None = None

    def __str__(self):
        out = f"[{self.kind}] {self.rule}: {self.detail}"
        if self.pair is not None:
            x, y = self.pair
            out += f"\n    pair ({x},{y})"
            if self.theta_x is not None:
                out += f" with ({self.theta_x}, {self.theta_y})"
            if self.position is not None:
                out += f", position {format_position(self.position)}: {self.left} vs {self.right}"
                if self.renamed_left is not None and (self.renamed_left, self.renamed_right) != (self.left, self.right):
                    out += f" (renamed into the goal: {self.renamed_left} vs {self.renamed_right})"
        return out


@dataclass
class AssumptionReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "assumption satisfied"
        return "assumption violated:\n" + "\n".join(f"  {v}" for v in self.violations)


def _goal_vars(g: SSG, name: str) -> tuple[Var, ...]:
    return g.nonterminals[name].goal_vars


def check_assumption(g: SSG, name: str) -> AssumptionReport:
    """Check every rule reachable from ``name`` against the transformable shape."""
    report = AssumptionReport()
    for lhs in g.reachable(name):
        vs = _goal_vars(g, lhs)
        for rhs in g.alternatives(lhs):
            rule = f"{lhs} -> {rhs}"
            try:
                alt = normalize_alternative(rhs)
            except TransformError as e:
                report.violations.append(Violation(rule, "shape", str(e)))
                continue
            if alt is None:
                continue
            report.violations.extend(_check_alternative(g, rule, vs, alt))
    return report


def _check_alternative(g: SSG, rule: str, vs: tuple[Var, ...], alt: Alternative) -> list[Violation]:
    out = []
    theta = alt.theta
    if not (isinstance(alt, RecComp) and alt.implicit_id):
        if theta.dom != frozenset(vs):
            out.append(Violation(rule, "domain", f"domain of {theta} is not {{{', '.join(map(str, vs))}}}"))
    if isinstance(alt, Plain):
        if not theta.is_idempotent():
            out.append(Violation(rule, "idempotence", f"{theta} is not idempotent"))
        return out
    inner = frozenset(_goal_vars(g, alt.target))
    delta = alt.delta
    if delta is not None:
        if not theta.is_idempotent():
            out.append(Violation(rule, "idempotence", f"{theta} is not idempotent"))
        if not delta.is_renaming() or delta.vran != inner:
            out.append(
                Violation(rule, "renaming", f"{delta} is not an injective renaming onto the variables of {alt.target}")
            )
        captured = theta.vran & inner
        if captured:
            names = ", ".join(sorted(map(str, captured)))
            out.append(
                Violation(rule, "range-capture", f"range of {theta} mentions variables of {alt.target} directly: {names}")
            )
    d = delta or ID
    for x, y in itertools.combinations(vs, 2):
        tx, ty = apply(d, apply(theta, x)), apply(d, apply(theta, y))
        for p in sorted(set(positions(tx)) & set(positions(ty))):
            a, b = subterm_at(tx, p), subterm_at(ty, p)
            if not (_compatible(a, b, inner) and _compatible(b, a, inner)):
                out.append(
                    Violation(
                        rule,
                        "position",
                        "a variable of the recursive goal meets a term with variables of that goal",
                        pair=(x, y),
                        position=p,
                        left=subterm_at(apply(theta, x), p),
                        right=subterm_at(apply(theta, y), p),
                        theta_x=apply(theta, x),
                        theta_y=apply(theta, y),
                        renamed_left=a,
                        renamed_right=b,
                    )
                )
    return out


def _compatible(a: Term, b: Term, inner: frozenset) -> bool:
    if isinstance(a, Var) and a in inner:
        return (isinstance(b, Var) and b in inner) or not (set(variables(b)) & inner)
    return True


# ---------------------------------------------------------------------------
# Symbolic coding


class _Coder:
    def __init__(self, constructors: Mapping[str, int], symmetric: bool = False):
        self.constructors = dict(sorted(constructors.items()))
        self.symmetric = symmetric
        self.demanded: list = []
        self._seen: set = set()

    def _nt(self, key) -> NT:
        if key not in self._seen:
            self._seen.add(key)
            self.demanded.append(key)
        return NT(str(key))

    def _is_pat(self, t) -> bool:
        return t is not BOT and not isinstance(t, Var) and is_pattern(t, self.constructors)

    def code(self, s: Side, t: Side, goal: str) -> list:
        if s is BOT and t is BOT:
            raise TransformError("cannot code a pair of two bottoms")
        sv, tv = isinstance(s, Var), isinstance(t, Var)
        if sv or tv:
            if goal == TOP:
                raise TransformError(f"variable in a pair coded outside any goal: ({side_text(s)}, {side_text(t)})")
            if sv and (tv or t is BOT or self._is_pat(t)):
                return [self._nt(RangeNT(goal, s, t))]
            if tv and (s is BOT or self._is_pat(s)):
                left = s if (s is BOT or self.symmetric) else ANY
                return [self._nt(RangeNT(goal, left, t))]
            raise TransformError(
                f"pair ({side_text(s)}, {side_text(t)}) is not covered by the coding clauses"
            )
        if is_any(s) and is_any(t):
            return [self._nt(AA)]
        if is_any(s) and t is BOT:
            return [self._nt(A_BOT)]
        if s is BOT and is_any(t):
            return [self._nt(BOT_A)]
        if s is BOT:
            return self._node(BOT, t.symbol, [(BOT, b) for b in t.args], goal)
        if t is BOT:
            return self._node(s.symbol, BOT, [(a, BOT) for a in s.args], goal)
        if is_any(s):
            out = []
            for f, m in self.constructors.items():
                n = t.arity
                kids = [(ANY, b) for b in t.args[:m]]
                kids += [(BOT, b) for b in t.args[m:]] if m < n else [(ANY, BOT)] * (m - n)
                out += self._node(f, t.symbol, kids, goal)
            return out
        if is_any(t):
            out = []
            for g, n in self.constructors.items():
                m = s.arity
                kids = [(a, ANY) for a in s.args[:n]]
                kids += [(BOT, ANY)] * (n - m) if m < n else [(a, BOT) for a in s.args[n:]]
                out += self._node(s.symbol, g, kids, goal)
            return out
        m, n = s.arity, t.arity
        kids = list(zip(s.args, t.args))
        kids += [(BOT, b) for b in t.args[m:]] if m < n else [(a, BOT) for a in s.args[n:]]
        return self._node(s.symbol, t.symbol, kids, goal)

    def _node(self, f, g, kids, goal) -> list:
        for side, sym in ((f, "left"), (g, "right")):
            if side is not BOT and side not in self.constructors:
                raise TransformError(f"{side} is not a constructor")
        choices = [self.code(a, b, goal) for a, b in kids]
        sym = PairedSymbol(f, g)
        return [Fun(sym, combo) for combo in itertools.product(*choices)]


def coding_nt(
    s: Side,
    t: Side,
    goal: str,
    constructors: Mapping[str, int],
    symmetric: bool = False,
) -> list:
    """The set of right-hand sides coding the symbolic pair ``(s, t)`` under ``goal``.

    ``goal`` is a nonterminal name, or ``TOP`` when no variables remain.
    """
    coder = _Coder(constructors, symmetric)
    return sorted(set(coder.code(s, t, goal)), key=str)


# ---------------------------------------------------------------------------
# The transformation


def ran(
    g: SSG,
    name: str,
    x1: Var | str,
    x2: Var | str,
    symmetric: bool = False,
    limit: int = 20000,
) -> RTG:
    """The range grammar for ``(x1, x2)`` from ``name``, restricted to reachable rules."""
    return ran_many(g, [name], x1, x2, symmetric=symmetric, limit=limit)


def ran_many(
    g: SSG,
    names: list[str],
    x1: Var | str,
    x2: Var | str,
    symmetric: bool = False,
    limit: int = 20000,
) -> RTG:
    """One grammar holding the range nonterminals of several starts; the
    initial nonterminal is the one for ``names[0]``."""
    x1 = Var(x1) if isinstance(x1, str) else x1
    x2 = Var(x2) if isinstance(x2, str) else x2
    if x1 == x2:
        raise ValueError("the two variables must differ")
    for name in names:
        if name not in g.nonterminals:
            raise ValueError(f"unknown nonterminal {name}")
        vs = _goal_vars(g, name)
        if x1 not in vs or x2 not in vs:
            raise ValueError(f"{x1} and {x2} must both be variables of the goal of {name}")
        report = check_assumption(g, name)
        if not report.ok:
            raise AssumptionViolation(report)

    shapes = {}
    for n in g.nonterminals:
        alts = []
        for rhs in g.alternatives(n):
            try:
                alt = normalize_alternative(rhs)
            except TransformError:
                alt = rhs  # unreachable from the starts, or reported above
            if alt is not None:
                alts.append(alt)
        shapes[n] = alts

    coder = _Coder(g.constructors, symmetric)
    starts = [coder._nt(RangeNT(n, x1, x2)) for n in names]
    rules = []
    done = 0
    while done < len(coder.demanded):
        key = coder.demanded[done]
        done += 1
        if done > limit:
            raise TransformError(f"more than {limit} nonterminals demanded; giving up")
        lhs = str(key)
        for u in _rules_for(key, g, shapes, coder):
            rules.append((lhs, u))

    names_out = {str(k) for k in coder.demanded}
    alphabet = paired_signature(g.constructors)
    return RTG(starts[0].name, names_out, alphabet, sorted(set(rules), key=lambda r: (r[0], str(r[1]))))


def _rules_for(key, g: SSG, shapes, coder: _Coder) -> list:
    if isinstance(key, AnyNT):
        out = []
        cons = coder.constructors
        lefts = [None] if key.left is BOT else list(cons.items())
        rights = [None] if key.right is BOT else list(cons.items())
        for lf in lefts:
            for rg in rights:
                s = BOT if lf is None else Fun(lf[0], [ANY] * lf[1])
                t = BOT if rg is None else Fun(rg[0], [ANY] * rg[1])
                out += coder.code(s, t, TOP)
        return out
    out = []
    for alt in shapes[key.goal]:
        if isinstance(alt, Plain):
            s = _image(alt.theta, key.left)
            t = _image(alt.theta, key.right)
            out += coder.code(abstract(s), abstract(t), TOP)
        elif isinstance(alt, RecComp):
            d = alt.delta or ID
            s = _image(d, _image(alt.theta, key.left))
            t = _image(d, _image(alt.theta, key.right))
            inner = _goal_vars(g, alt.target)
            out += coder.code(abstract(s, inner), abstract(t, inner), alt.target)
        else:
            raise TransformError(f"unsupported rule shape: {alt}")
    return out


def _image(sigma, t: Side) -> Side:
    return t if t is BOT else apply(sigma, t)



# ---------------------------------------------------------------------------
# Cross-check against the evaluated language


@dataclass
class Counterexample:
    theta: Subst
    xi: Subst
    coded: Fun

    def __str__(self):
        return f"theta = {self.theta}, xi = {self.xi}: {render(self.coded)} not in the range grammar"


@dataclass
class OracleReport:
    substitutions: int = 0
    instances: int = 0
    counterexamples: list[Counterexample] = field(default_factory=list)


def check_overapproximation(
    g: SSG,
    name: str,
    x1: Var | str,
    x2: Var | str,
    expr_bound: int,
    ground_depth: int,
    grammar: RTG | None = None,
    symmetric: bool = False,
) -> OracleReport:
    """Code every ground constructor instance of (theta x1, theta x2) for the
    substitutions up to ``expr_bound`` and test membership in the range
    grammar.  A counterexample means the implementation is wrong."""
    x1 = Var(x1) if isinstance(x1, str) else x1
    x2 = Var(x2) if isinstance(x2, str) else x2
    grammar = grammar or ran(g, name, x1, x2, symmetric=symmetric)
    start = str(RangeNT(name, x1, x2))
    ground = ground_terms(g.constructors, ground_depth)
    pair_states = _PairStates(Recognizer(grammar))
    report = OracleReport()
    for theta in subst_set(g, name, expr_bound):
        report.substitutions += 1
        s, t = apply(theta, x1), apply(theta, x2)
        vs = variables(s, t)
        for choice in itertools.product(ground, repeat=len(vs)):
            xi = Subst(zip(vs, choice))
            left, right = apply(xi, s), apply(xi, t)
            report.instances += 1
            if start not in pair_states(left, right):
                report.counterexamples.append(Counterexample(theta, xi, code(left, right)))
    return report


class _PairStates:
    """Recognizer states of code(t1, t2) without building the coded tree.

    Ground instances share most of their subterms, so results are memoized
    on the pair."""

    def __init__(self, recognizer: Recognizer):
        self.recognizer = recognizer
        self.memo: dict = {}

    def __call__(self, t1, t2) -> frozenset:
        key = (t1, t2)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if t2 is BOT:
            kids = [self(a, BOT) for a in t1.args]
            symbol = PairedSymbol(t1.symbol, BOT)
        elif t1 is BOT:
            kids = [self(BOT, b) for b in t2.args]
            symbol = PairedSymbol(BOT, t2.symbol)
        else:
            kids = [self(a, b) for a, b in zip(t1.args, t2.args)]
            kids += [self(a, BOT) for a in t1.args[len(t2.args):]]
            kids += [self(BOT, b) for b in t2.args[len(t1.args):]]
            symbol = PairedSymbol(t1.symbol, t2.symbol)
        res = self.recognizer.combine(symbol, kids)
        self.memo[key] = res
        return res
