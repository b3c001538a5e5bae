"""Shared fixtures-by-function for the test modules: term shorthands and
seeded random generators."""

from __future__ import annotations

import os
import random
from importlib.resources import files

from ssgr.syntax import parse_subst, parse_term
from ssgr.terms import Fun, Subst, Var, variables

SEED = int(os.environ.get("SSGR_SEED", "20240611"))

VAR_HEADS = "uvwxyz"


def is_var(name: str) -> bool:
    return name[0] in VAR_HEADS


def T(text: str):
    return parse_term(text, is_var)


def S(text: str) -> Subst:
    return parse_subst(text, is_var)


def data(name: str) -> str:
    return str(files("ssgr") / "data" / name)


def rng(salt: str = "") -> random.Random:
    return random.Random(f"{SEED}:{salt}")


def num(n: int, base: str = "0"):
    t = Fun(base)
    for _ in range(n):
        t = Fun("s", [t])
    return t


# ---------------------------------------------------------------------------
# random terms and substitutions

SMALL_SIG = {"a": 0, "b": 0, "g": 1, "f": 2}


def random_term(r: random.Random, sig, vars_, depth: int, p_var: float = 0.3):
    if vars_ and (depth == 0 or r.random() < p_var):
        if depth == 0 and r.random() < 0.5:
            consts = [f for f, k in sig.items() if k == 0]
            return Fun(r.choice(consts))
        return r.choice(vars_)
    if depth == 0:
        return Fun(r.choice([f for f, k in sig.items() if k == 0]))
    f = r.choice(sorted(sig))
    return Fun(f, [random_term(r, sig, vars_, depth - 1, p_var) for _ in range(sig[f])])


def random_ground(r: random.Random, sig, depth: int):
    return random_term(r, sig, [], depth)


def random_equations(r: random.Random, n_vars: int = 3, max_eqs: int = 3, depth: int = 2):
    vs = [Var(n) for n in "xyz"[:n_vars]]
    return [
        (random_term(r, SMALL_SIG, vs, r.randint(0, depth)), random_term(r, SMALL_SIG, vs, r.randint(0, depth)))
        for _ in range(r.randint(1, max_eqs))
    ]


def random_idempotent(r: random.Random, pool, depth: int = 2) -> Subst:
    """Idempotent substitution whose domain and range are drawn from ``pool``."""
    pool = list(pool)
    r.shuffle(pool)
    k = r.randint(0, min(3, len(pool) - 1))
    dom, rest = pool[:k], pool[k:]
    return Subst({x: random_term(r, SMALL_SIG, rest, r.randint(0, depth)) for x in dom})


# ---------------------------------------------------------------------------
# random regular tree grammars in normal form


def random_rtg(r: random.Random, n_nts: int = 3, sig=None):
    from ssgr.rtg import NT, RTG

    sig = sig or SMALL_SIG
    names = [f"N{i}" for i in range(n_nts)]
    rules = set()
    for lhs in names:
        for _ in range(r.randint(0, 3)):
            if r.random() < 0.15:
                rules.add((lhs, NT(r.choice(names))))
                continue
            f = r.choice(sorted(sig))
            rules.add((lhs, Fun(f, [NT(r.choice(names)) for _ in range(sig[f])])))
    return RTG(names[0], set(names), dict(sig), sorted(rules, key=lambda x: (x[0], str(x[1]))))


def rtg_levels(g, depth: int) -> dict[str, set]:
    """Naive bottom-up enumeration: L_d(N) for every nonterminal, all terms of
    height at most ``depth``."""
    from ssgr.rtg import NT

    level = {n: set() for n in g.nonterminals}
    for _ in range(depth + 1):
        new = {n: set(ts) for n, ts in level.items()}
        for lhs, rhs in g.rules:
            if isinstance(rhs, NT):
                continue
            pools = [level[a.name] for a in rhs.args]
            combos = [[]]
            for pool in pools:
                combos = [c + [t] for c in combos for t in pool]
            for c in combos:
                new[lhs].add(Fun(rhs.symbol, c))
        changed = True
        while changed:  # unit rules
            changed = False
            for lhs, rhs in g.rules:
                if isinstance(rhs, NT) and not new[rhs.name] <= new[lhs]:
                    new[lhs] |= new[rhs.name]
                    changed = True
        level = new
    return level


def derives(g, name: str, t, _active=None) -> bool:
    """Top-down membership oracle."""
    from ssgr.rtg import NT

    active = _active or frozenset()
    if name in active:
        return False
    for lhs, rhs in g.rules:
        if lhs != name:
            continue
        if isinstance(rhs, NT):
            if derives(g, rhs.name, t, active | {name}):
                return True
        elif rhs.symbol == t.symbol and rhs.arity == t.arity:
            if all(derives(g, a.name, u) for a, u in zip(rhs.args, t.args)):
                return True
    return False


# ---------------------------------------------------------------------------
# random SSGs of the transformable shape


def random_ssg(r: random.Random):
    """SSG over goal variables x, y with at most three nonterminals and two
    constructors of arity at most two; the caller filters by the assumption."""
    from ssgr.ssg import SSG, Comp, NonTerm, Nonterminal, Rec, SubstConst

    unary = r.choice([("s", 1), ("f", 2)])
    cons = {"c": 0, unary[0]: unary[1]}
    x, y = Var("x"), Var("y")
    n = r.randint(1, 3)
    names = [f"G{i}" for i in range(n)]
    nts = {m: Nonterminal(m, (x, y)) for m in names}
    fresh = iter(range(1, 1000))

    def shape(inner_vars):
        # a constructor term over ``inner_vars`` (each used at most once) and fresh variables
        def build(depth):
            roll = r.random()
            if depth == 0 or roll < 0.3:
                if inner_vars and r.random() < 0.6:
                    return inner_vars.pop()
                if r.random() < 0.5:
                    return Fun("c")
                return Var(f"w{next(fresh)}")
            f, k = unary
            return Fun(f, [build(depth - 1) for _ in range(k)])

        return build

    deep = 2 if unary[1] == 1 else 1
    rules = []
    for m in names:
        rules.append((m, SubstConst(Subst({x: shape([])(deep), y: shape([])(deep)}))))
        for _ in range(r.randint(0, 2)):
            target = r.choice(names)
            x1, y1 = Var(f"x{next(fresh)}"), Var(f"y{next(fresh)}")
            delta = Subst({x1: x, y1: y}) if r.random() < 0.7 else Subst({x1: y, y1: x})
            pool = [x1, y1]
            r.shuffle(pool)
            build = shape(pool)
            theta = Subst({x: Fun(unary[0], [build(deep - 1) for _ in range(unary[1])]), y: build(deep)})
            rules.append((m, Comp(Rec(NonTerm(target), delta), SubstConst(theta))))
    return SSG(names[0], nts, rules, cons)


def desk_scale(g, bound: int, max_vars: int = 5) -> bool:
    """Whether every substitution up to ``bound`` leaves at most ``max_vars``
    variables in (theta x, theta y), which keeps exhaustive ground
    instantiation small."""
    from ssgr.ssg import subst_set
    from ssgr.terms import apply

    x, y = Var("x"), Var("y")
    return all(
        len(variables(apply(t, x), apply(t, y))) <= max_vars
        for n in g.nonterminals
        for t in subst_set(g, n, bound)
    )


def assumption_ssgs(r: random.Random, count: int, bound: int):
    """``count`` random SSGs that satisfy the assumption and are desk scale."""
    from ssgr.transform import check_assumption

    out = []
    while len(out) < count:
        g = random_ssg(r)
        if all(check_assumption(g, n).ok for n in g.nonterminals) and desk_scale(g, bound):
            out.append(g)
    return out


# acceptance outcomes by criterion number, printed by the conftest summary hook
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
