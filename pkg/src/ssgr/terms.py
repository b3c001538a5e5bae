"""First-order terms, positions and substitutions.

Everything here is an immutable value.  Operations that need fresh variables
take an explicit :class:`FreshState`; nothing touches global state.

``None`` plays the role of *fail* for the partial operations (:func:`mgu`,
:func:`parallel_compose`, :func:`match`).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Collection, Hashable, Iterable, Iterator, Mapping, Sequence, Union

# Builtin symbols of goal clauses.  None of them is a valid identifier, so
# they can never clash with user symbols.
TOP = "⊤"
AND = "∧"
ARROW = "↠"
BUILTINS = {TOP: 0, AND: 2, ARROW: 2}

# Binary symbols written infix by the term syntax.
INFIX = ("<", "-")


class Var:
    """A variable ``name`` with a generation ``index``.

    Parsed variables have index 0; :class:`FreshState` hands out positive
    indices, rendered as ``name#index``.
    """

    __slots__ = ("name", "index", "_hash")

    def __init__(self, name: str, index: int = 0):
        self.name = name
        self.index = index
        self._hash = hash(("var", name, index))

    def __eq__(self, other):
        return isinstance(other, Var) and self.name == other.name and self.index == other.index

    def __hash__(self):
        return self._hash

    def __lt__(self, other: Var):
        return (self.name, self.index) < (other.name, other.index)

    def __repr__(self):
        return f"Var({self.name!r}, {self.index})" if self.index else f"Var({self.name!r})"

    def __str__(self):
        return f"{self.name}#{self.index}" if self.index else self.name


class Fun:
    """Application of ``symbol`` to ``args``; constants have no args.

    ``symbol`` is usually a string but any hashable works (paired symbols of
    the coding, the ``A`` marker of the transformation).
    """

    __slots__ = ("symbol", "args", "_hash")

    def __init__(self, symbol: Hashable, args: Iterable[Term] = ()):
        self.symbol = symbol
        self.args = tuple(args)
        self._hash = hash((symbol, self.args))

    def __eq__(self, other):
        return (
            isinstance(other, Fun)
            and self._hash == other._hash
            and self.symbol == other.symbol
            and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    @property
    def arity(self) -> int:
        return len(self.args)

    def __repr__(self):
        if not self.args:
            return f"Fun({self.symbol!r})"
        return f"Fun({self.symbol!r}, {self.args!r})"

    def __str__(self):
        return render(self)


Term = Union[Var, Fun]


def const(name: Hashable) -> Fun:
    return Fun(name)


def render(t: Term) -> str:
    if not isinstance(t, Fun):
        return str(t)
    sym = t.symbol
    if sym == ARROW and t.arity == 2:
        return f"{render(t.args[0])} -> {render(t.args[1])}"
    if sym in INFIX and t.arity == 2:
        left, right = t.args
        ls, rs = render(left), render(right)
        if _is_infix(left, "<"):
            ls = f"({ls})"
        if _is_infix(right):
            rs = f"({rs})"
        return f"{ls} {sym} {rs}"
    if not t.args:
        return str(sym)
    return f"{sym}({','.join(render(a) for a in t.args)})"


def _is_infix(t: Term, *ops: str) -> bool:
    return isinstance(t, Fun) and t.arity == 2 and t.symbol in (ops or INFIX)


# ---------------------------------------------------------------------------
# Signatures


class Kind(enum.Enum):
    CONSTRUCTOR = "constructor"
    DEFINED = "defined"
    BUILTIN = "builtin"


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    kind: Kind = Kind.CONSTRUCTOR


@dataclass(frozen=True)
class Signature:
    constructors: Mapping[str, int] = field(default_factory=dict)
    defined: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        both = set(self.constructors) & set(self.defined)
        if both:
            raise ValueError(f"symbols both constructor and defined: {sorted(both)}")
        for name in itertools.chain(self.constructors, self.defined):
            if name in BUILTINS:
                raise ValueError(f"{name} is a builtin symbol")

    def symbols(self) -> list[Symbol]:
        out = [Symbol(n, a, Kind.CONSTRUCTOR) for n, a in sorted(self.constructors.items())]
        out += [Symbol(n, a, Kind.DEFINED) for n, a in sorted(self.defined.items())]
        out += [Symbol(n, a, Kind.BUILTIN) for n, a in BUILTINS.items()]
        return out

    def arity(self, name: str) -> int:
        if name in self.constructors:
            return self.constructors[name]
        if name in self.defined:
            return self.defined[name]
        return BUILTINS[name]

    def is_constructor_term(self, t: Term) -> bool:
        return all(s in self.constructors for s in symbols(t))

    def is_basic(self, t: Term) -> bool:
        return (
            isinstance(t, Fun)
            and t.symbol in self.defined
            and all(self.is_constructor_term(a) for a in t.args)
        )


# ---------------------------------------------------------------------------
# Term queries

Position = tuple


def variables(*terms: Term) -> list[Var]:
    """Variables of ``terms`` in left-to-right first-occurrence order."""
    seen: dict[Var, None] = {}
    stack = list(reversed(terms))
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            seen.setdefault(t, None)
        else:
            stack.extend(reversed(t.args))
    return list(seen)


def symbols(t: Term) -> set:
    out = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Fun):
            out.add(u.symbol)
            stack.extend(u.args)
    return out


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    return all(is_ground(a) for a in t.args)


def height(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(height(a) for a in t.args)


def size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(size(a) for a in t.args)


def ground_terms(signature: Mapping[str, int], max_height: int) -> list[Fun]:
    """All ground terms over ``signature`` of height at most ``max_height``."""
    every: list[Fun] = []
    for h in range(max_height + 1):
        new = []
        for f, k in sorted(signature.items()):
            if k == 0:
                if h == 0:
                    new.append(Fun(f))
                continue
            if h == 0:
                continue
            # at least one argument of height exactly h-1
            for args in itertools.product(every, repeat=k):
                if any(height(a) == h - 1 for a in args):
                    new.append(Fun(f, args))
        every = every + new
    return every


def positions(t: Term) -> list[Position]:
    """Pos(t) in pre-order; positions are 1-based tuples, ``()`` is the root."""
    return [p for p, _ in subterms(t)]


def subterms(t: Term, prefix: Position = ()) -> Iterator[tuple[Position, Term]]:
    yield prefix, t
    if isinstance(t, Fun):
        for i, a in enumerate(t.args, 1):
            yield from subterms(a, prefix + (i,))


def subterm_at(t: Term, p: Position) -> Term:
    for i in p:
        if isinstance(t, Var) or not 1 <= i <= t.arity:
            raise IndexError(f"position {format_position(p)} not in term")
        t = t.args[i - 1]
    return t


def replace_at(t: Term, p: Position, u: Term) -> Term:
    if not p:
        return u
    if isinstance(t, Var):
        raise IndexError("position below a variable")
    i = p[0]
    args = list(t.args)
    args[i - 1] = replace_at(args[i - 1], p[1:], u)
    return Fun(t.symbol, args)


def format_position(p: Position) -> str:
    return ".".join(map(str, p)) if p else "ε"


# ---------------------------------------------------------------------------
# Substitutions


class Subst(Mapping[Var, Term]):
    """Finite map from variables to terms; identity bindings are dropped."""

    __slots__ = ("_map", "_hash")

    def __init__(self, bindings: Mapping[Var, Term] | Iterable[tuple[Var, Term]] = ()):
        items = bindings.items() if isinstance(bindings, Mapping) else bindings
        m = {}
        for x, t in items:
            if not isinstance(x, Var):
                raise TypeError(f"substitution domain must be variables, got {x!r}")
            if t != x:
                m[x] = t
        self._map = m
        self._hash = None

    def __getitem__(self, x: Var) -> Term:
        return self._map[x]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __call__(self, t: Term) -> Term:
        return apply(self, t)

    def __eq__(self, other):
        if isinstance(other, Subst):
            return self._map == other._map
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    @property
    def dom(self) -> frozenset[Var]:
        return frozenset(self._map)

    @property
    def ran(self) -> list[Term]:
        return [self._map[x] for x in sorted(self._map)]

    @property
    def vran(self) -> frozenset[Var]:
        return frozenset(variables(*self._map.values()))

    def is_idempotent(self) -> bool:
        return not (self.dom & self.vran)

    def is_renaming(self) -> bool:
        """Variable-to-variable and injective on its domain."""
        vals = list(self._map.values())
        return all(isinstance(v, Var) for v in vals) and len(set(vals)) == len(vals)

    def __repr__(self):
        return f"Subst({self._map!r})"

    def __str__(self):
        body = ", ".join(f"{x} -> {render(self._map[x])}" for x in sorted(self._map))
        return "{" + body + "}"


ID = Subst()


def apply(sigma: Mapping[Var, Term], t: Term) -> Term:
    if isinstance(t, Var):
        return sigma.get(t, t)
    if not t.args:
        return t
    return Fun(t.symbol, [apply(sigma, a) for a in t.args])


def compose(outer: Mapping[Var, Term], inner: Mapping[Var, Term]) -> Subst:
    """``outer · inner``: apply ``inner`` first, then ``outer``."""
    out = {x: apply(outer, t) for x, t in inner.items()}
    for x, t in outer.items():
        if x not in out:
            out[x] = t
    return Subst(out)


def restrict(sigma: Mapping[Var, Term], vs: Collection[Var]) -> Subst:
    vs = set(vs)
    return Subst({x: t for x, t in sigma.items() if x in vs})


def occurs(x: Var, t: Term) -> bool:
    if isinstance(t, Var):
        return x == t
    return any(occurs(x, a) for a in t.args)


def mgu(
    equations: Iterable[tuple[Term, Term]], prefer: Collection[Var] = ()
) -> Subst | None:
    """Most general unifier of ``equations``, or None.

    Rule-based solving with occurs check; the solved part is kept fully
    applied so the result is idempotent.  For a variable-variable equation
    the variable in ``prefer`` is eliminated; otherwise the left one is.
    """
    prefer = set(prefer)
    solved: dict[Var, Term] = {}
    work = list(reversed(list(equations)))
    while work:
        s, t = work.pop()
        s, t = apply(solved, s), apply(solved, t)
        if s == t:
            continue
        if isinstance(s, Var) and isinstance(t, Var):
            if t in prefer and s not in prefer:
                s, t = t, s
            _bind(solved, s, t)
        elif isinstance(s, Var):
            if occurs(s, t):
                return None
            _bind(solved, s, t)
        elif isinstance(t, Var):
            if occurs(t, s):
                return None
            _bind(solved, t, s)
        else:
            if s.symbol != t.symbol or s.arity != t.arity:
                return None
            work.extend(reversed(list(zip(s.args, t.args))))
    return Subst(solved)


def _bind(solved: dict, x: Var, t: Term) -> None:
    step = {x: t}
    for k in solved:
        solved[k] = apply(step, solved[k])
    solved[x] = t


def equations_of(theta: Mapping[Var, Term]) -> list[tuple[Var, Term]]:
    return [(x, theta[x]) for x in sorted(theta)]


def parallel_compose(
    theta1: Subst, theta2: Subst, fs: FreshState | None = None
) -> Subst | None:
    """Parallel composition: an idempotent mgu of both equation sets.

    Fails (None) when either input is not idempotent or the equations are
    not unifiable.  The result binds every variable of Dom(theta1) and
    Dom(theta2); a class made only of such variables is sent to a fresh one.
    """
    if not (theta1.is_idempotent() and theta2.is_idempotent()):
        return None
    prefer = theta1.dom | theta2.dom
    sigma = mgu(equations_of(theta1) + equations_of(theta2), prefer)
    if sigma is None:
        return None
    missing = sorted(prefer - sigma.dom)
    if missing:
        if fs is None:
            fs = FreshState.above(theta1, theta2)
        avoid = prefer | theta1.vran | theta2.vran | sigma.vran
        rename = Subst({v: fs.fresh(v, avoid) for v in missing})
        sigma = compose(rename, sigma)
    return sigma


def match(pattern: Term, term: Term, sigma: Mapping[Var, Term] | None = None) -> Subst | None:
    """Matcher ``sigma`` with ``sigma(pattern) == term``, or None."""
    out = dict(sigma or {})
    stack = [(pattern, term)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            bound = out.get(p)
            if bound is None:
                out[p] = t
            elif bound != t:
                return None
        elif isinstance(t, Var) or p.symbol != t.symbol or p.arity != t.arity:
            return None
        else:
            stack.extend(zip(p.args, t.args))
    return Subst(out)


@dataclass
class FreshState:
    """Counter for fresh variables; threaded explicitly through operations."""

    counter: int = 0

    def fresh(self, base: Var | str, avoid: Collection[Var] = ()) -> Var:
        name = base.name if isinstance(base, Var) else base
        while True:
            self.counter += 1
            v = Var(name, self.counter)
            if v not in avoid:
                return v

    def observe(self, *terms: Term) -> None:
        """Move the counter past every index occurring in ``terms``."""
        for v in variables(*terms):
            self.counter = max(self.counter, v.index)

    @classmethod
    def above(cls, *substs: Mapping[Var, Term]) -> FreshState:
        fs = cls()
        for s in substs:
            fs.observe(*s.keys(), *s.values())
        return fs


def freshen(sigma: Subst, avoid: Collection[Var], fs: FreshState) -> Subst:
    """Rename the range variables of ``sigma`` apart from ``avoid`` and Dom(sigma)."""
    if not sigma:
        return sigma
    blocked = set(avoid) | sigma.dom | sigma.vran
    xi = {v: fs.fresh(v, blocked) for v in sorted(sigma.vran)}
    return Subst({x: apply(xi, t) for x, t in sigma.items()})


def rename_apart(terms: Sequence[Term], fs: FreshState, avoid: Collection[Var] = ()) -> list[Term]:
    """Variant of ``terms`` (jointly) whose variables are all fresh."""
    blocked = set(avoid) | set(variables(*terms))
    xi = {v: fs.fresh(v, blocked) for v in variables(*terms)}
    return [apply(xi, t) for t in terms]


# ---------------------------------------------------------------------------
# Equality up to renaming


def _canonical_names(reserved: Collection[Var]) -> Iterator[Var]:
    reserved = set(reserved)
    for k in itertools.count(1):
        v = Var(f"_{k}")
        if v not in reserved:
            yield v


def canonical_renaming(terms: Sequence[Term], keep: Collection[Var] = ()) -> Subst:
    """Renaming of the variables of ``terms`` outside ``keep`` in DFS order."""
    keep = set(keep)
    names = _canonical_names(keep)
    mapping = {}
    for v in variables(*terms):
        if v not in keep:
            mapping[v] = next(names)
    return Subst(mapping)


def canonical(sigma: Subst) -> Subst:
    """Representative of ``sigma`` up to renaming of variables outside its domain."""
    dom = sorted(sigma.dom)
    xi = canonical_renaming([sigma[x] for x in dom], keep=sigma.dom)
    return Subst({x: apply(xi, sigma[x]) for x in dom})


def alpha_equivalent(sigma: Subst, tau: Subst) -> bool:
    return canonical(sigma) == canonical(tau)


def is_instance(general: Subst, specific: Subst, on: Collection[Var]) -> bool:
    """Whether some delta has ``delta·general == specific`` on the variables ``on``."""
    on = sorted(on)
    lhs = Fun("", [apply(general, x) for x in on])
    rhs = Fun("", [apply(specific, x) for x in on])
    return match(lhs, rhs) is not None
