"""Substitution-set grammars: expressions over substitutions and their meaning.

An expression is built from substitution constants, ``empty``, sequential
composition ``e1 . e2``, parallel composition ``e1 /\\ e2`` and
``rec(e, delta)``.  A grammar attaches such expressions, possibly mentioning
nonterminals, to nonterminals indexed by goal clauses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Union

from ssgr.syntax import ParseError, TermParser, Token, TokenStream
from ssgr.terms import (
    FreshState,
    Subst,
    Var,
    canonical,
    compose,
    freshen,
    parallel_compose,
    restrict,
)


@dataclass(frozen=True)
class SubstConst:
    subst: Subst

    def __str__(self):
        return str(self.subst)


@dataclass(frozen=True)
class Empty:
    def __str__(self):
        return "empty"


@dataclass(frozen=True)
class Comp:
    left: "Expr"
    right: "Expr"

    def __str__(self):
        ls = f"({self.left})" if isinstance(self.left, (Comp, Par)) else str(self.left)
        rs = f"({self.right})" if isinstance(self.right, Par) else str(self.right)
        return f"{ls} . {rs}"


@dataclass(frozen=True)
class Par:
    left: "Expr"
    right: "Expr"

    def __str__(self):
        ls = f"({self.left})" if isinstance(self.left, Par) else str(self.left)
        return f"{ls} /\\ {self.right}"


@dataclass(frozen=True)
class Rec:
    body: "Expr"
    renaming: Subst

    def __str__(self):
        return f"rec({self.body}, {self.renaming})"


@dataclass(frozen=True)
class NonTerm:
    name: str

    def __str__(self):
        return self.name


Expr = Union[SubstConst, Empty, Comp, Par, Rec, NonTerm]


class EvalError(ValueError):
    """Raised when asked to evaluate an expression that still has nonterminals."""


def eval_expr(e: Expr, fs: FreshState | None = None) -> Subst | None:
    """Meaning of a nonterminal-free expression; None stands for *fail*."""
    if fs is None:
        fs = FreshState()
        fs.observe(*_all_terms(e))
    return _eval(e, fs)


def _eval(e: Expr, fs: FreshState) -> Subst | None:
    if isinstance(e, SubstConst):
        return e.subst
    if isinstance(e, Empty):
        return None
    if isinstance(e, Comp):
        first = _eval(e.left, fs)
        second = _eval(e.right, fs)
        if first is None or second is None:
            return None
        return compose(first, second)
    if isinstance(e, Par):
        theta1 = _eval(e.left, fs)
        raw = _eval(e.right, fs)
        if theta1 is None or raw is None:
            return None
        theta2 = freshen(raw, theta1.dom | theta1.vran, fs)
        sigma = parallel_compose(theta1, theta2, fs)
        if sigma is None:
            return None
        return restrict(sigma, theta1.dom | theta2.dom)
    if isinstance(e, Rec):
        theta = _eval(e.body, fs)
        delta = e.renaming
        if theta is None or not delta.vran <= theta.dom:
            return None
        renamed = freshen(theta, delta.dom | delta.vran, fs)
        return restrict(compose(renamed, delta), delta.dom)
    if isinstance(e, NonTerm):
        raise EvalError(f"cannot evaluate nonterminal {e.name}")
    raise TypeError(f"not an expression: {e!r}")


def substitutions(e: Expr) -> Iterable[Subst]:
    """Substitution constants and renamings occurring in ``e``."""
    if isinstance(e, SubstConst):
        yield e.subst
    elif isinstance(e, (Comp, Par)):
        yield from substitutions(e.left)
        yield from substitutions(e.right)
    elif isinstance(e, Rec):
        yield from substitutions(e.body)
        yield e.renaming


def nonterminals_in(e: Expr) -> list[str]:
    if isinstance(e, NonTerm):
        return [e.name]
    if isinstance(e, (Comp, Par)):
        return nonterminals_in(e.left) + nonterminals_in(e.right)
    if isinstance(e, Rec):
        return nonterminals_in(e.body)
    return []


def contains_empty(e: Expr) -> bool:
    if isinstance(e, Empty):
        return True
    if isinstance(e, (Comp, Par)):
        return contains_empty(e.left) or contains_empty(e.right)
    if isinstance(e, Rec):
        return contains_empty(e.body)
    return False


def _all_terms(e: Expr) -> list:
    out = []
    for s in substitutions(e):
        out.extend(s.keys())
        out.extend(s.values())
    return out


# ---------------------------------------------------------------------------
# Grammars


@dataclass(frozen=True)
class Nonterminal:
    name: str
    goal_vars: tuple[Var, ...] = ()
    goal: str | None = None

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class SSG:
    initial: str
    nonterminals: Mapping[str, Nonterminal]
    rules: tuple[tuple[str, Expr], ...]
    constructors: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nonterminals", dict(self.nonterminals))
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "constructors", dict(self.constructors))
        if self.initial not in self.nonterminals:
            raise ValueError(f"initial nonterminal {self.initial} is not declared")
        for lhs, rhs in self.rules:
            if lhs not in self.nonterminals:
                raise ValueError(f"rule for undeclared nonterminal {lhs}")
            for n in nonterminals_in(rhs):
                if n not in self.nonterminals:
                    raise ValueError(f"undeclared nonterminal {n} in rule for {lhs}")
            _check_recs(rhs, self.nonterminals)

    def alternatives(self, name: str) -> list[Expr]:
        return [rhs for lhs, rhs in self.rules if lhs == name]

    def reachable(self, name: str) -> list[str]:
        """Nonterminals reachable from ``name`` (including it), in discovery order."""
        seen = [name]
        i = 0
        while i < len(seen):
            for rhs in self.alternatives(seen[i]):
                for m in nonterminals_in(rhs):
                    if m not in seen:
                        seen.append(m)
            i += 1
        return seen

    def fresh_state(self) -> FreshState:
        fs = FreshState()
        for _, rhs in self.rules:
            fs.observe(*_all_terms(rhs))
        return fs

    def __str__(self):
        return to_text(self)


def _check_recs(e: Expr, nts: Mapping[str, Nonterminal]) -> None:
    if isinstance(e, Rec):
        delta = e.renaming
        if not delta.is_renaming():
            raise ValueError(f"second argument of rec must be an injective variable renaming: {delta}")
        if isinstance(e.body, NonTerm):
            goal_vars = set(nts[e.body.name].goal_vars)
            if goal_vars and not delta.vran <= goal_vars:
                raise ValueError(
                    f"renaming {delta} mentions variables outside the goal of {e.body.name}"
                )
        _check_recs(e.body, nts)
    elif isinstance(e, (Comp, Par)):
        _check_recs(e.left, nts)
        _check_recs(e.right, nts)


def productive_nonterminals(g: SSG) -> set[str]:
    """Nonterminals deriving at least one expression free of ``empty``.

    Any expression containing ``empty`` evaluates to fail, so a nonterminal
    outside this set has an empty substitution set.
    """
    done: set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.rules:
            if lhs in done or contains_empty(rhs):
                continue
            if all(n in done for n in nonterminals_in(rhs)):
                done.add(lhs)
                changed = True
    return done


def language_empty(g: SSG, name: str) -> bool:
    return name not in productive_nonterminals(g)


def enumerate_exprs(g: SSG, name: str, bound: int) -> list[Expr]:
    """Nonterminal-free expressions derivable from ``name`` with at most
    ``bound`` rule applications, cheapest first."""
    costs = _derive(g, name, bound)
    return sorted(costs, key=lambda e: (costs[e], str(e)))


def _derive(g: SSG, name: str, bound: int) -> dict[Expr, int]:
    alts = {n: g.alternatives(n) for n in g.nonterminals}

    @lru_cache(maxsize=None)
    def derive(n: str, budget: int) -> tuple:
        if budget <= 0:
            return ()
        best: dict[Expr, int] = {}
        for rhs in alts[n]:
            for e, c in expand(rhs, budget - 1):
                if c + 1 < best.get(e, budget + 1):
                    best[e] = c + 1
        return tuple(best.items())

    def expand(e: Expr, budget: int) -> list[tuple[Expr, int]]:
        if isinstance(e, NonTerm):
            return list(derive(e.name, budget))
        if isinstance(e, (SubstConst, Empty)):
            return [(e, 0)]
        if isinstance(e, Rec):
            return [(Rec(b, e.renaming), c) for b, c in expand(e.body, budget)]
        out = []
        for left, c1 in expand(e.left, budget):
            for right, c2 in expand(e.right, budget - c1):
                out.append((type(e)(left, right), c1 + c2))
        return out

    return dict(derive(name, bound))


def subst_set(
    g: SSG, name: str, bound: int, fs: FreshState | None = None
) -> list[Subst]:
    """Meanings of the expressions up to ``bound``, restricted to the goal
    variables of ``name`` and deduplicated up to renaming."""
    fs = fs or g.fresh_state()
    goal_vars = set(g.nonterminals[name].goal_vars)
    seen = set()
    out = []
    for e in enumerate_exprs(g, name, bound):
        theta = eval_expr(e, fs)
        if theta is None:
            continue
        if goal_vars:
            theta = restrict(theta, goal_vars)
        key = canonical(theta)
        if key not in seen:
            seen.add(key)
            out.append(theta)
    return out


# ---------------------------------------------------------------------------
# Text format

_KEYWORDS = {"rec", "empty"}


def parse_ssg(text: str, source: str | None = None) -> SSG:
    ts = TokenStream.of(text, source)
    constructors: dict[str, int] = {}
    decls: dict[str, Nonterminal] = {}
    initial = None
    pending = []  # (lhs token, token position) parsed after all declarations
    while not ts.at_eof():
        ts.expect("(")
        head = ts.ident("block keyword")
        if head.text == "CONSTRUCTORS":
            while not ts.at(")"):
                name = ts.ident("constructor")
                ts.expect("/")
                num = ts.ident("arity")
                if not num.text.isdigit():
                    ts.error("arity must be a number", num)
                constructors[name.text] = int(num.text)
            ts.expect(")")
        elif head.text == "NONTERMINAL":
            name = ts.ident("nonterminal name")
            goal_vars: list[Var] = []
            goal = None
            while not ts.at(")"):
                kw = ts.ident("'vars' or 'goal'")
                if kw.text == "vars":
                    while ts.peek().kind == "ident" and ts.peek().text != "goal":
                        goal_vars.append(Var(ts.next().text))
                elif kw.text == "goal":
                    tok = ts.next()
                    if tok.kind != "string":
                        ts.error("expected a quoted goal", tok)
                    goal = tok.text
                else:
                    ts.error("expected 'vars' or 'goal'", kw)
            ts.expect(")")
            if name.text in decls:
                raise ParseError(f"nonterminal {name.text} declared twice", name.line, name.col, source)
            decls[name.text] = Nonterminal(name.text, tuple(goal_vars), goal)
        elif head.text == "INITIAL":
            initial = ts.ident("nonterminal name")
            ts.expect(")")
        elif head.text == "RULE":
            lhs = ts.ident("nonterminal name")
            ts.expect("->")
            start = ts.pos
            depth = 1
            while depth:
                tok = ts.next()
                if tok.kind == "eof":
                    ts.error("unterminated RULE block", tok)
                if tok.kind == "punct" and tok.text == "(":
                    depth += 1
                elif tok.kind == "punct" and tok.text == ")":
                    depth -= 1
            pending.append((lhs, start, ts.pos - 1))
        else:
            ts.error(f"unknown block {head.text}", head)

    for name in constructors:
        if name in decls or name in _KEYWORDS:
            raise ParseError(f"{name} is both a constructor and a nonterminal or keyword", 1, 1, source)

    rules = []
    for lhs, start, end in pending:
        if lhs.text not in decls:
            raise ParseError(f"undeclared nonterminal {lhs.text}", lhs.line, lhs.col, source)
        sub = TokenStream(ts.tokens[start:end] + [_eof_after(ts.tokens[end])], source)
        parser = _ExprParser(sub, constructors, decls)
        for alt in parser.alternatives():
            rules.append((lhs.text, alt))

    if initial is None:
        if not decls:
            raise ParseError("no nonterminals declared", 1, 1, source)
        init_name = next(iter(decls))
    else:
        if initial.text not in decls:
            raise ParseError(f"undeclared nonterminal {initial.text}", initial.line, initial.col, source)
        init_name = initial.text
    try:
        return SSG(init_name, decls, rules, constructors)
    except ValueError as e:
        raise ParseError(str(e), 1, 1, source) from None


def _eof_after(tok: Token) -> Token:
    return Token("eof", "", tok.line, tok.col)


class _ExprParser:
    def __init__(self, ts: TokenStream, constructors: Mapping[str, int], decls: Mapping[str, Nonterminal]):
        self.ts = ts
        self.decls = decls
        self.terms = TermParser(ts, lambda n: n not in constructors, dict(constructors), infix=False)
        self.constructors = constructors

    def alternatives(self) -> list[Expr]:
        alts = [self.expr()]
        while self.ts.accept("|"):
            alts.append(self.expr())
        if not self.ts.at_eof():
            self.ts.error("unexpected input in rule")
        return alts

    def expr(self) -> Expr:
        left = self.comp()
        if self.ts.accept("/\\"):
            return Par(left, self.expr())
        return left

    def comp(self) -> Expr:
        left = self.primary()
        if self.ts.accept("."):
            return Comp(left, self.comp())
        return left

    def primary(self) -> Expr:
        ts = self.ts
        if ts.accept("("):
            e = self.expr()
            ts.expect(")")
            return e
        if ts.at("{"):
            return SubstConst(self.terms.substitution())
        tok = ts.ident("expression")
        if tok.text == "empty":
            return Empty()
        if tok.text == "rec":
            ts.expect("(")
            body = self.expr()
            ts.expect(",")
            delta = self.terms.substitution()
            ts.expect(")")
            return Rec(body, delta)
        if tok.text in self.decls:
            return NonTerm(tok.text)
        raise ParseError(f"undeclared nonterminal {tok.text}", tok.line, tok.col, ts.source)


def to_text(g: SSG) -> str:
    lines = []
    if g.constructors:
        lines.append(
            "(CONSTRUCTORS " + " ".join(f"{c}/{k}" for c, k in sorted(g.constructors.items())) + ")"
        )
    for nt in g.nonterminals.values():
        parts = [f"(NONTERMINAL {nt.name}"]
        if nt.goal_vars:
            parts.append("vars " + " ".join(str(v) for v in nt.goal_vars))
        if nt.goal:
            parts.append(f'goal "{nt.goal}"')
        lines.append(" ".join(parts) + ")")
    lines.append(f"(INITIAL {g.initial})")
    for lhs, rhs in g.rules:
        lines.append(f"(RULE {lhs} -> {rhs})")
    return "\n".join(lines) + "\n"


def load_ssg(path: str) -> SSG:
    with open(path, encoding="utf-8") as fh:
        return parse_ssg(fh.read(), source=str(path))
