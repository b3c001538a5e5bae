"""Conditional rewriting on goal clauses and innermost conditional narrowing.

A goal clause is a tuple of atoms, each either ``⊤`` or ``s ↠ t``
(``Fun(ARROW, (s, t))``).  Every system implicitly contains ``x ↠ x -> ⊤``.
The search procedures here are bounded; an empty answer is not a proof.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from ssgr.syntax import ParseError, TermParser, TokenStream
from ssgr.terms import (
    ARROW,
    TOP,
    FreshState,
    Fun,
    Signature,
    Subst,
    Term,
    Var,
    apply,
    canonical_renaming,
    compose,
    match,
    mgu,
    render,
    rename_apart,
    replace_at,
    restrict,
    subterms,
    variables,
)

TOP_ATOM = Fun(TOP)
GoalClause = tuple


def arrow(s: Term, t: Term) -> Fun:
    return Fun(ARROW, (s, t))


@dataclass(frozen=True)
class CondRule:
    lhs: Term
    rhs: Term
    conditions: tuple[tuple[Term, Term], ...] = ()

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise ValueError("left-hand side of a rule must not be a variable")
        object.__setattr__(self, "conditions", tuple(tuple(c) for c in self.conditions))

    def terms(self) -> list[Term]:
        out = [self.lhs, self.rhs]
        for s, t in self.conditions:
            out += [s, t]
        return out

    def __str__(self):
        text = f"{render(self.lhs)} -> {render(self.rhs)}"
        if self.conditions:
            text += " | " + ", ".join(f"{render(s)} == {render(t)}" for s, t in self.conditions)
        return text


IMPLICIT = CondRule(arrow(Var("x"), Var("x")), TOP_ATOM)


@dataclass(frozen=True)
class CTRS:
    rules: tuple[CondRule, ...]
    signature: Signature

    @classmethod
    def from_rules(cls, rules: Sequence[CondRule], constructors: dict[str, int] | None = None) -> CTRS:
        arities: dict[str, int] = dict(constructors or {})
        for r in rules:
            for t in r.terms():
                for _, u in subterms(t):
                    if isinstance(u, Fun):
                        known = arities.setdefault(u.symbol, u.arity)
                        if known != u.arity:
                            raise ValueError(f"symbol {u.symbol} used with arities {known} and {u.arity}")
        defined = {r.lhs.symbol: r.lhs.arity for r in rules}
        cons = {f: k for f, k in arities.items() if f not in defined}
        return cls(tuple(rules), Signature(cons, defined))

    @property
    def constructors(self) -> dict[str, int]:
        return dict(self.signature.constructors)

    @property
    def defined(self) -> dict[str, int]:
        return dict(self.signature.defined)

    def all_rules(self) -> tuple[CondRule, ...]:
        return self.rules + (IMPLICIT,)

    def symbols(self) -> set[str]:
        return set(self.signature.constructors) | set(self.signature.defined)

    def is_constructor_term(self, t: Term) -> bool:
        if isinstance(t, Var):
            return True
        return t.symbol in self.signature.constructors and all(self.is_constructor_term(a) for a in t.args)

    def is_basic(self, t: Term) -> bool:
        """Defined symbol (or ↠) applied to constructor terms."""
        if not isinstance(t, Fun):
            return False
        if t.symbol != ARROW and t.symbol not in self.signature.defined:
            return False
        return all(self.is_constructor_term(a) for a in t.args)

    def __str__(self):
        return "\n".join(str(r) for r in self.rules)


# ---------------------------------------------------------------------------
# Classification


@dataclass
class ClassificationReport:
    is_3ctrs: bool
    is_deterministic: bool
    is_sdctrs: bool
    is_constructor_system: bool
    witnesses: list[str] = field(default_factory=list)

    def __str__(self):
        flags = (
            f"3-CTRS: {self.is_3ctrs}, deterministic: {self.is_deterministic}, "
            f"SDCTRS: {self.is_sdctrs}, constructor system: {self.is_constructor_system}"
        )
        return "\n".join([flags] + [f"  {w}" for w in self.witnesses])


def _reducible(R: CTRS, t: Term) -> bool:
    for _, u in subterms(t):
        for r in R.rules:
            if match(r.lhs, u) is not None:
                return True
    return False


def classify(R: CTRS) -> ClassificationReport:
    witnesses = []
    type3 = determ = sd = cs = True
    for i, r in enumerate(R.rules, 1):
        label = f"rule {i} ({r})"
        known = set(variables(r.lhs))
        extra = set(variables(r.rhs)) - known - set(variables(*(x for c in r.conditions for x in c)))
        if extra:
            type3 = False
            witnesses.append(f"{label}: extra variables {sorted(map(str, extra))} in the right-hand side")
        for j, (s, t) in enumerate(r.conditions, 1):
            loose = set(variables(s)) - known
            if loose:
                determ = False
                witnesses.append(f"{label}: condition {j} uses {sorted(map(str, loose))} before they are bound")
            known |= set(variables(t))
            if not R.is_constructor_term(t):
                ground_nf = not variables(t) and not _reducible(R, t)
                if not ground_nf:
                    sd = False
                    witnesses.append(
                        f"{label}: condition {j} right-hand side {render(t)} is neither a constructor term nor a ground normal form"
                    )
        if not R.is_basic(r.lhs) or r.lhs.symbol == ARROW:
            cs = False
            witnesses.append(f"{label}: left-hand side is not basic")
    return ClassificationReport(type3, determ, type3 and determ and sd, cs, witnesses)


# ---------------------------------------------------------------------------
# Goal clauses


def is_solved(S: GoalClause) -> bool:
    return all(a == TOP_ATOM for a in S)


def goal_text(S: GoalClause) -> str:
    return " /\\ ".join(render(a) for a in S)


def _split(S: GoalClause):
    for i, a in enumerate(S):
        if a != TOP_ATOM:
            return i, a
    return None, None


def _innermost_positions(R: CTRS, atom: Term) -> list[tuple]:
    """Positions of basic subterms, leftmost-innermost first."""
    found = [p for p, u in subterms(atom) if R.is_basic(u)]
    return sorted(found, key=lambda p: (-len(p), p))


def constructor_rewrite_step(S: GoalClause, R: CTRS) -> list[GoalClause]:
    """All one-step successors of ``S`` by constructor-based rewriting."""
    i, atom = _split(S)
    if atom is None:
        return []
    fs = FreshState()
    fs.observe(*S)
    out = []
    for p in _innermost_positions(R, atom):
        u = _at(atom, p)
        for rule in R.all_rules():
            lhs, rhs, *conds = rename_apart(rule.terms(), fs, variables(*S))
            sigma = match(lhs, u)
            if sigma is None or not all(R.is_constructor_term(t) for t in sigma.values()):
                continue
            new_conds = tuple(
                arrow(apply(sigma, conds[k]), apply(sigma, conds[k + 1])) for k in range(0, len(conds), 2)
            )
            out.append(S[:i] + new_conds + (replace_at(atom, p, apply(sigma, rhs)),) + S[i + 1 :])
    return _unique(out)


def _at(t: Term, p: tuple) -> Term:
    for k in p:
        t = t.args[k - 1]
    return t


def _unique(items: list) -> list:
    seen = set()
    out = []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def narrow_step(S: GoalClause, R: CTRS, fs: FreshState) -> list[tuple[Subst, GoalClause]]:
    """All innermost conditional narrowing steps from ``S``."""
    i, atom = _split(S)
    if atom is None:
        return []
    fs.observe(*S)
    goal_vars = set(variables(*S))
    out = []
    for p in _innermost_positions(R, atom):
        u = _at(atom, p)
        u_vars = set(variables(u))
        for rule in R.all_rules():
            lhs, rhs, *conds = rename_apart(rule.terms(), fs, goal_vars)
            sigma = mgu([(u, lhs)], prefer=u_vars)
            if sigma is None:
                continue
            if not u_vars <= sigma.dom:
                continue
            if restrict(sigma, u_vars).vran & goal_vars:
                continue
            visible = restrict(sigma, goal_vars)
            if not all(R.is_constructor_term(t) for t in visible.values()):
                continue
            new_conds = tuple(
                arrow(apply(sigma, conds[k]), apply(sigma, conds[k + 1])) for k in range(0, len(conds), 2)
            )
            rest = tuple(apply(sigma, a) for a in S[i + 1 :])
            reduct = apply(sigma, replace_at(atom, p, rhs))
            out.append((visible, S[:i] + new_conds + (reduct,) + rest))
    return out


@dataclass
class _Node:
    goal: GoalClause
    acc: Subst
    parent: "_Node | None" = None
    step: Subst | None = None


def _search(S: GoalClause, R: CTRS, depth: int) -> Iterator[_Node]:
    """Breadth-first narrowing up to ``depth`` steps; yields solved nodes."""
    vars0 = variables(*S)
    fs = FreshState()
    fs.observe(*S)
    root = _Node(tuple(S), Subst())
    seen = {_state_key(root, vars0)}
    layer = [root]
    for level in range(depth + 1):
        nxt = []
        for node in layer:
            if is_solved(node.goal):
                yield node
                continue
            if level == depth:
                continue
            for sigma, goal in narrow_step(node.goal, R, fs):
                acc = restrict(compose(sigma, node.acc), vars0)
                child = _Node(goal, acc, node, sigma)
                key = _state_key(child, vars0)
                if key in seen:
                    continue
                seen.add(key)
                nxt.append(child)
        layer = nxt


def _state_key(node: _Node, vars0: list[Var]):
    image = [apply(node.acc, v) for v in vars0]
    xi = canonical_renaming(image + list(node.goal), keep=vars0)
    return tuple(apply(xi, t) for t in image + list(node.goal))


def narrow_solutions(S: GoalClause, R: CTRS, depth: int) -> list[Subst]:
    """Answer substitutions of narrowing derivations from ``S`` to ``⊤``s
    of at most ``depth`` steps, deduplicated up to renaming."""
    out = []
    seen = set()
    vars0 = variables(*S)
    for node in _search(S, R, depth):
        xi = canonical_renaming([apply(node.acc, v) for v in vars0], keep=vars0)
        key = tuple(apply(xi, apply(node.acc, v)) for v in vars0)
        if key not in seen:
            seen.add(key)
            out.append(node.acc)
    return out


def narrow_derivations(S: GoalClause, R: CTRS, depth: int) -> list[list[tuple[Subst | None, GoalClause]]]:
    """Like :func:`narrow_solutions` but returns each derivation as a list of
    (step substitution, goal clause) pairs; the first pair has no substitution."""
    out = []
    for node in _search(S, R, depth):
        path = []
        while node is not None:
            path.append((node.step, node.goal))
            node = node.parent
        out.append(path[::-1])
    return out


def rewrite_derivation(S: GoalClause, R: CTRS, max_steps: int) -> list[GoalClause] | None:
    """Shortest constructor-rewriting derivation from ``S`` to a clause of
    ``⊤``s within ``max_steps`` steps, or None."""
    start = tuple(S)
    parents = {start: None}
    queue = deque([(start, 0)])
    while queue:
        goal, k = queue.popleft()
        if is_solved(goal):
            path = []
            while goal is not None:
                path.append(goal)
                goal = parents[goal]
            return path[::-1]
        if k == max_steps:
            continue
        for nxt in constructor_rewrite_step(goal, R):
            if nxt not in parents:
                parents[nxt] = goal
                queue.append((nxt, k + 1))
    return None


# ---------------------------------------------------------------------------
# File formats


def parse_ctrs(text: str, source: str | None = None) -> CTRS:
    ts = TokenStream.of(text, source)
    var_names: set[str] = set()
    rules: list[CondRule] = []
    arities: dict[str, int] = {}
    while not ts.at_eof():
        ts.expect("(")
        head = ts.ident("block keyword")
        if head.text == "VAR":
            while not ts.at(")"):
                var_names.add(ts.ident("variable").text)
            ts.expect(")")
        elif head.text == "CONDITIONTYPE":
            kind = ts.ident("condition type")
            if kind.text != "ORIENTED":
                ts.error("only ORIENTED conditions are supported", kind)
            ts.expect(")")
        elif head.text == "RULES":
            terms = TermParser(ts, lambda n: n in var_names, arities)
            while not ts.at(")"):
                start = ts.peek()
                lhs = terms.term()
                ts.expect("->")
                rhs = terms.term()
                conds = []
                if ts.accept("|"):
                    while True:
                        s = terms.term()
                        ts.expect("==")
                        conds.append((s, terms.term()))
                        if not ts.accept(","):
                            break
                if isinstance(lhs, Var):
                    raise ParseError("left-hand side is a variable", start.line, start.col, source)
                rules.append(CondRule(lhs, rhs, tuple(conds)))
            ts.expect(")")
        else:
            # unknown block such as COMMENT: skip to the matching ')'
            depth = 1
            while depth:
                tok = ts.next()
                if tok.kind == "eof":
                    ts.error("unbalanced parentheses", tok)
                if tok.kind == "punct" and tok.text in "()":
                    depth += 1 if tok.text == "(" else -1
    try:
        return CTRS.from_rules(rules)
    except ValueError as e:
        raise ParseError(str(e), 1, 1, source) from None


def load_ctrs(path: str) -> CTRS:
    with open(path, encoding="utf-8") as fh:
        return parse_ctrs(fh.read(), source=str(path))


def parse_goal(text: str, R: CTRS) -> GoalClause:
    """Goal clause such as ``x < y -> true /\\ y < x -> true``; identifiers
    that are not symbols of ``R`` are variables."""
    ts = TokenStream.of(text, "<goal>")
    symbols = R.symbols()
    arities = {**R.signature.constructors, **R.signature.defined}
    terms = TermParser(ts, lambda n: n not in symbols, arities)
    atoms = []
    while True:
        s = terms.term()
        if not ts.accept("=="):
            ts.expect("->")
        atoms.append(arrow(s, terms.term()))
        if not ts.accept("/\\"):
            break
    if not ts.at_eof():
        ts.error("trailing input in goal")
    return tuple(atoms)
