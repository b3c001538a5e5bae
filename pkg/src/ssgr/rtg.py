"""Regular tree grammars: normal form, emptiness, membership, products.

Right-hand sides are ordinary :class:`~ssgr.terms.Fun` trees whose leaves may
be :class:`NT` nonterminal references.  Alphabet symbols are arbitrary
hashables (plain names or paired symbols of the coding).
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

from ssgr.coding import BOT, PairedSymbol
from ssgr.syntax import ParseError
from ssgr.terms import Fun, render


class NT:
    """Reference to a nonterminal inside a right-hand side."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __eq__(self, other):
        return isinstance(other, NT) and other.name == self.name

    def __hash__(self):
        return hash(("nt", self.name))

    def __repr__(self):
        return f"NT({self.name!r})"

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class RTG:
    initial: str
    nonterminals: frozenset
    alphabet: Mapping[Hashable, int]
    rules: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals))
        object.__setattr__(self, "alphabet", dict(self.alphabet))
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.initial not in self.nonterminals:
            raise ValueError(f"initial nonterminal {self.initial} not declared")
        for lhs, rhs in self.rules:
            if lhs not in self.nonterminals:
                raise ValueError(f"rule for undeclared nonterminal {lhs}")
            self._check_rhs(rhs)

    def _check_rhs(self, t) -> None:
        if isinstance(t, NT):
            if t.name not in self.nonterminals:
                raise ValueError(f"undeclared nonterminal {t.name}")
            return
        arity = self.alphabet.get(t.symbol)
        if arity is None:
            raise ValueError(f"symbol {t.symbol} not in alphabet")
        if arity != t.arity:
            raise ValueError(f"symbol {t.symbol} has arity {arity}, used with {t.arity}")
        for a in t.args:
            self._check_rhs(a)

    def rules_of(self, name: str) -> list:
        return [rhs for lhs, rhs in self.rules if lhs == name]

    def with_initial(self, name: str) -> RTG:
        return RTG(name, self.nonterminals, self.alphabet, self.rules)

    def __str__(self):
        return to_text(self)


def _sorted_rules(rules: Iterable) -> tuple:
    return tuple(sorted(set(rules), key=lambda r: (r[0], render(r[1]))))


def is_normal(rhs) -> bool:
    return isinstance(rhs, NT) or all(isinstance(a, NT) for a in rhs.args)


def normalize(g: RTG) -> RTG:
    """Equivalent grammar whose rules are ``N -> f(N1..Nn)`` or ``N -> M``."""
    taken = set(g.nonterminals)
    counter = itertools.count(1)
    out = []
    nts = set(g.nonterminals)

    def aux_for(owner: str) -> str:
        while True:
            name = f"{owner}#{next(counter)}"
            if name not in taken:
                taken.add(name)
                nts.add(name)
                return name

    def flatten(owner: str, lhs: str, rhs) -> None:
        if is_normal(rhs):
            out.append((lhs, rhs))
            return
        args = []
        for a in rhs.args:
            if isinstance(a, NT):
                args.append(a)
            else:
                name = aux_for(owner)
                flatten(owner, name, a)
                args.append(NT(name))
        out.append((lhs, Fun(rhs.symbol, args)))

    for lhs, rhs in g.rules:
        flatten(lhs, lhs, rhs)
    return RTG(g.initial, nts, g.alphabet, _sorted_rules(out))


def productive(g: RTG) -> set:
    """Least fixpoint of nonterminals deriving at least one ground tree."""
    g = normalize(g)
    done: set = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.rules:
            if lhs in done:
                continue
            kids = [rhs] if isinstance(rhs, NT) else rhs.args
            if all(k.name in done for k in kids):
                done.add(lhs)
                changed = True
    return done


def witness(g: RTG, name: str | None = None) -> Fun | None:
    """A tree of least height in L(g, name), or None when the language is empty."""
    name = g.initial if name is None else name
    g = normalize(g)
    best: dict[str, Fun] = {}
    # rounds of the fixpoint add trees of increasing height
    changed = True
    while changed:
        changed = False
        found = {}
        for lhs, rhs in g.rules:
            if lhs in best or lhs in found or isinstance(rhs, NT):
                continue
            if all(k.name in best for k in rhs.args):
                found[lhs] = Fun(rhs.symbol, [best[k.name] for k in rhs.args])
        best.update(found)
        closing = True
        while closing:
            closing = False
            for lhs, rhs in g.rules:
                if isinstance(rhs, NT) and lhs not in best and rhs.name in best:
                    best[lhs] = best[rhs.name]
                    closing = True
        changed = bool(found)
    return best.get(name)


def is_empty(g: RTG, name: str | None = None) -> bool:
    name = g.initial if name is None else name
    return name not in productive(g)


def _unit_closure(g: RTG) -> dict[str, set]:
    """For each nonterminal M, the set of N with N ->* M by unit rules."""
    up = defaultdict(set)
    for lhs, rhs in g.rules:
        if isinstance(rhs, NT):
            up[rhs.name].add(lhs)
    closure = {}
    for n in g.nonterminals:
        seen = {n}
        stack = [n]
        while stack:
            m = stack.pop()
            for k in up.get(m, ()):
                if k not in seen:
                    seen.add(k)
                    stack.append(k)
        closure[n] = seen
    return closure


def _states(g: RTG, t, closure, by_symbol, memo) -> frozenset:
    hit = memo.get(t)
    if hit is not None:
        return hit
    kids = [_states(g, a, closure, by_symbol, memo) for a in t.args]
    res = _combine(t.symbol, kids, closure, by_symbol)
    memo[t] = res
    return res


def _combine(symbol, kids, closure, by_symbol) -> frozenset:
    found = set()
    for lhs, rhs in by_symbol.get((symbol, len(kids)), ()):
        if all(a.name in k for a, k in zip(rhs.args, kids)):
            found |= closure[lhs]
    return frozenset(found)


class Recognizer:
    """Bottom-up recognizer for repeated membership queries on one grammar."""

    def __init__(self, g: RTG):
        self.grammar = normalize(g)
        self.closure = _unit_closure(self.grammar)
        self.by_symbol = defaultdict(list)
        for lhs, rhs in self.grammar.rules:
            if isinstance(rhs, Fun):
                self.by_symbol[(rhs.symbol, rhs.arity)].append((lhs, rhs))
        # shared subtrees are common across queries, so the memo persists
        self._memo: dict = {}
        self._steps: dict = {}

    def states(self, t: Fun) -> frozenset:
        return _states(self.grammar, t, self.closure, self.by_symbol, self._memo)

    def combine(self, symbol, kids: list[frozenset]) -> frozenset:
        """States of ``symbol`` applied to children with the given states."""
        key = (symbol, tuple(kids))
        hit = self._steps.get(key)
        if hit is None:
            hit = self._steps[key] = _combine(symbol, kids, self.closure, self.by_symbol)
        return hit

    def member(self, name: str, t: Fun) -> bool:
        return name in self.states(t)


def member(g: RTG, name: str, t: Fun) -> bool:
    """Whether ``name`` derives the ground tree ``t`` (bottom-up run)."""
    return Recognizer(g).member(name, t)


def enumerate_terms(g: RTG, name: str, depth: int) -> set:
    """All trees of height at most ``depth`` in L(g, name); leaves have height 0."""
    if depth < 0 or is_empty(g, name):
        return set()
    # only what is productive and reachable from ``name`` matters
    g = prune(normalize(g), [name])
    closure = _unit_closure(g)
    levels: dict[str, set] = {n: set() for n in g.nonterminals}
    for _ in range(depth + 1):
        nxt: dict[str, set] = {n: set() for n in g.nonterminals}
        for lhs, rhs in g.rules:
            if isinstance(rhs, NT):
                continue
            pools = [levels[a.name] for a in rhs.args]
            if any(not p for p in pools):
                continue
            for combo in itertools.product(*pools):
                t = Fun(rhs.symbol, combo)
                for up in closure[lhs]:
                    nxt[up].add(t)
        levels = nxt
    return levels.get(name, set())


def _without_units(g: RTG) -> dict[str, list]:
    """Non-unit normal rules of each nonterminal, unit rules folded in."""
    g = normalize(g)
    closure = _unit_closure(g)
    out: dict[str, list] = {n: [] for n in g.nonterminals}
    for lhs, rhs in g.rules:
        if isinstance(rhs, Fun):
            for up in closure[lhs]:
                out[up].append(rhs)
    return out


def product_name(a: str, b: str) -> str:
    return f"[{a}&{b}]"


@dataclass
class Product:
    """Reachable part of a product grammar, before pruning."""

    grammar: RTG
    unproductive: list

    @property
    def empty(self) -> bool:
        return self.grammar.initial in set(self.unproductive)


def product(g1: RTG, n1: str, g2: RTG, n2: str) -> Product:
    """Product grammar for L(g1,n1) ∩ L(g2,n2), restricted to reachable pairs."""
    r1, r2 = _without_units(g1), _without_units(g2)
    alphabet = {
        f: k for f, k in g1.alphabet.items() if g2.alphabet.get(f) == k
    }
    start = (n1, n2)
    seen = {start}
    queue = [start]
    rules = []
    while queue:
        a, b = queue.pop()
        lhs = product_name(a, b)
        for s in r1.get(a, ()):
            for t in r2.get(b, ()):
                if s.symbol != t.symbol or s.arity != t.arity:
                    continue
                kids = []
                for x, y in zip(s.args, t.args):
                    pair = (x.name, y.name)
                    if pair not in seen:
                        seen.add(pair)
                        queue.append(pair)
                    kids.append(NT(product_name(*pair)))
                rules.append((lhs, Fun(s.symbol, kids)))
    names = {product_name(*p) for p in seen}
    g = RTG(product_name(*start), names, alphabet, _sorted_rules(rules))
    prod = productive(g)
    return Product(g, sorted(names - prod))


def prune(g: RTG, roots: Iterable[str] | None = None) -> RTG:
    """Drop unproductive nonterminals and whatever is unreachable from ``roots``."""
    roots = [g.initial] if roots is None else list(roots)
    prod = productive(g)
    live = [
        (lhs, rhs)
        for lhs, rhs in g.rules
        if lhs in prod and all(n.name in prod for n in _nts(rhs))
    ]
    by_lhs = defaultdict(list)
    for lhs, rhs in live:
        by_lhs[lhs].append(rhs)
    reach = set(roots)
    stack = list(roots)
    while stack:
        n = stack.pop()
        for rhs in by_lhs.get(n, ()):
            for m in _nts(rhs):
                if m.name not in reach:
                    reach.add(m.name)
                    stack.append(m.name)
    rules = [(l, r) for l, r in live if l in reach]
    return RTG(g.initial, reach | {g.initial}, g.alphabet, _sorted_rules(rules))


def intersect(g1: RTG, n1: str, g2: RTG, n2: str) -> RTG:
    """Pruned product grammar; its initial nonterminal generates the intersection."""
    return prune(product(g1, n1, g2, n2).grammar)


def _nts(rhs) -> list:
    if isinstance(rhs, NT):
        return [rhs]
    out = []
    for a in rhs.args:
        out.extend(_nts(a))
    return out


def reachable(g: RTG, name: str | None = None) -> set:
    name = g.initial if name is None else name
    seen = {name}
    stack = [name]
    while stack:
        n = stack.pop()
        for rhs in g.rules_of(n):
            for m in _nts(rhs):
                if m.name not in seen:
                    seen.add(m.name)
                    stack.append(m.name)
    return seen


def restrict_to(g: RTG, name: str) -> RTG:
    """Rules reachable from ``name``, with ``name`` as initial."""
    keep = reachable(g, name)
    rules = [(l, r) for l, r in g.rules if l in keep]
    return RTG(name, keep, g.alphabet, rules)


def reachable_alphabet(g: RTG, name: str | None = None) -> set:
    out = set()

    def walk(t):
        if isinstance(t, Fun):
            out.add(t.symbol)
            for a in t.args:
                walk(a)

    for n in reachable(g, name):
        for rhs in g.rules_of(n):
            walk(rhs)
    return out


# ---------------------------------------------------------------------------
# Text format


def symbol_text(sym) -> str:
    return str(sym)


def to_text(g: RTG) -> str:
    lines = []
    alpha = sorted(g.alphabet.items(), key=lambda kv: symbol_text(kv[0]))
    lines.append("(ALPHABET " + " ".join(f"{symbol_text(f)}/{k}" for f, k in alpha) + ")")
    lines.append("(NONTERMINALS " + " ".join(sorted(g.nonterminals)) + ")")
    lines.append(f"(INITIAL {g.initial})")
    for lhs, rhs in _sorted_rules(g.rules):
        lines.append(f"(RULE {lhs} -> {render(rhs)})")
    return "\n".join(lines) + "\n"


_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_'#")


class _Scanner:
    def __init__(self, text: str, source: str | None):
        self.text = text
        self.i = 0
        self.source = source

    def where(self, i: int | None = None) -> tuple[int, int]:
        i = self.i if i is None else i
        line = self.text.count("\n", 0, i) + 1
        col = i - (self.text.rfind("\n", 0, i) + 1) + 1
        return line, col

    def error(self, message: str, i: int | None = None):
        line, col = self.where(i)
        raise ParseError(message, line, col, self.source)

    def skip_ws(self) -> None:
        while self.i < len(self.text):
            c = self.text[self.i]
            if c.isspace():
                self.i += 1
            elif c == ";":
                while self.i < len(self.text) and self.text[self.i] != "\n":
                    self.i += 1
            else:
                break

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.i] if self.i < len(self.text) else ""

    def accept(self, s: str) -> bool:
        self.skip_ws()
        if self.text.startswith(s, self.i):
            self.i += len(s)
            return True
        return False

    def expect(self, s: str) -> None:
        if not self.accept(s):
            self.error(f"expected {s!r}")

    def name(self) -> str:
        """Identifier characters and balanced bracket groups, e.g. ``G[x,s(A)]``."""
        self.skip_ws()
        start = self.i
        t = self.text
        while self.i < len(t):
            c = t[self.i]
            if c in _NAME_CHARS:
                self.i += 1
            elif c == "[":
                depth = 0
                while self.i < len(t):
                    if t[self.i] == "[":
                        depth += 1
                    elif t[self.i] == "]":
                        depth -= 1
                        if depth == 0:
                            break
                    elif t[self.i] == "\n":
                        self.error("unterminated '['", start)
                    self.i += 1
                if self.i >= len(t):
                    self.error("unterminated '['", start)
                self.i += 1
            else:
                break
        if self.i == start:
            self.error("expected a name")
        return t[start : self.i]

    def symbol(self):
        self.skip_ws()
        if self.accept("<"):
            left = self._side()
            self.expect(",")
            right = self._side()
            self.expect(">")
            return PairedSymbol(left, right)
        return self.name()

    def _side(self):
        if self.accept("_|_"):
            return BOT
        return self.name()


def parse_rtg(text: str, source: str | None = None) -> RTG:
    sc = _Scanner(text, source)
    alphabet: dict = {}
    nonterminals: list[str] = []
    initial = None
    raw_rules = []
    while sc.peek():
        sc.expect("(")
        start = sc.i
        head = sc.name()
        if head == "ALPHABET":
            while sc.peek() != ")":
                at = sc.i
                sym = sc.symbol()
                sc.expect("/")
                num = sc.name()
                if not num.isdigit():
                    sc.error("arity must be a number", at)
                alphabet[sym] = int(num)
        elif head == "NONTERMINALS":
            while sc.peek() != ")":
                nonterminals.append(sc.name())
        elif head == "INITIAL":
            initial = sc.name()
        elif head == "RULE":
            lhs = sc.name()
            sc.expect("->")
            raw_rules.append((lhs, _rhs(sc), start))
        else:
            sc.error(f"unknown block {head}", start)
        sc.expect(")")
    nts = set(nonterminals)
    for lhs, _, _ in raw_rules:
        nts.add(lhs)
    if initial is None:
        if not raw_rules:
            raise ParseError("no INITIAL block and no rules", 1, 1, source)
        initial = raw_rules[0][0]
    nts.add(initial)
    rules = []
    for lhs, rhs, at in raw_rules:
        try:
            rules.append((lhs, _resolve(rhs, nts, alphabet)))
        except ValueError as e:
            sc.error(str(e), at)
    try:
        return RTG(initial, nts, alphabet, rules)
    except ValueError as e:
        raise ParseError(str(e), 1, 1, source) from None


def _rhs(sc: _Scanner):
    sym = sc.symbol()
    args = []
    if sc.accept("("):
        args.append(_rhs(sc))
        while sc.accept(","):
            args.append(_rhs(sc))
        sc.expect(")")
    return (sym, args)


def _resolve(raw, nts: set, alphabet: dict):
    sym, args = raw
    if not args and isinstance(sym, str) and sym in nts:
        return NT(sym)
    if sym not in alphabet:
        raise ValueError(f"unknown symbol {symbol_text(sym)}")
    return Fun(sym, [_resolve(a, nts, alphabet) for a in args])
