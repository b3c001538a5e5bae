"""Command-line front end.

Exit codes: 0 infeasibility proved or command succeeded, 1 usage or parse
error, 2 assumption violated, 3 unknown.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ssgr.rewriting import goal_text, load_ctrs, narrow_derivations, narrow_solutions, parse_goal
from ssgr.rtg import product, reachable_alphabet, symbol_text, to_text
from ssgr.ssg import (
    SSG,
    NonTerm,
    Par,
    contains_empty,
    enumerate_exprs,
    eval_expr,
    language_empty,
    load_ssg,
    nonterminals_in,
    productive_nonterminals,
    subst_set,
)
from ssgr.syntax import ParseError
from ssgr.terms import Var
from ssgr.transform import AssumptionViolation, RangeNT, check_overapproximation, ran_many

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_UNKNOWN = 0, 1, 2, 3

PROVED = "infeasible-proved"
UNKNOWN = "unknown"
VIOLATED = "assumption-violated"


class UsageError(Exception):
    pass


@dataclass
class Verdict:
    status: str
    evidence: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return {PROVED: EXIT_OK, UNKNOWN: EXIT_UNKNOWN, VIOLATED: EXIT_VIOLATION}[self.status]


# ---------------------------------------------------------------------------
# Library entry points


def check_pair(g: SSG, a: str, b: str, x1: str, x2: str, symmetric: bool = False) -> Verdict:
    """Decide whether the ranges of ``a`` and ``b`` over (x1, x2) are disjoint."""
    started = time.perf_counter()
    for n in (a, b):
        if language_empty(g, n):
            return Verdict(PROVED, [f"{n} generates no expression"], {"total": time.perf_counter() - started})
    try:
        grammar = ran_many(g, [a, b], x1, x2, symmetric=symmetric)
    except AssumptionViolation as e:
        return Verdict(VIOLATED, str(e.report).splitlines(), {"total": time.perf_counter() - started})
    built = time.perf_counter()
    na, nb = str(RangeNT(a, Var(x1), Var(x2))), str(RangeNT(b, Var(x1), Var(x2)))
    prod = product(grammar, na, grammar, nb)
    timings = {"transform": built - started, "product": time.perf_counter() - built}
    if prod.empty:
        return Verdict(PROVED, [f"unproductive: {n}" for n in prod.unproductive], timings)
    return Verdict(UNKNOWN, [f"intersection of {na} and {nb} is nonempty"], timings)


def check_nonterminal(g: SSG, name: str, x1: str | None, x2: str | None, symmetric: bool = False) -> Verdict:
    """Prove that ``name`` generates no substitution: either its language is
    empty or each alternative is a conjunction of two disjoint ranges."""
    if language_empty(g, name):
        return Verdict(PROVED, [f"{name} generates no expression"])
    pairs = []
    for rhs in g.alternatives(name):
        if isinstance(rhs, Par) and isinstance(rhs.left, NonTerm) and isinstance(rhs.right, NonTerm):
            pairs.append((rhs.left.name, rhs.right.name))
        elif not _alternative_empty(g, rhs):
            return Verdict(UNKNOWN, [f"alternative {rhs} is not a conjunction of two nonterminals"])
    if not pairs:
        return Verdict(PROVED, [f"every alternative of {name} is empty"])
    if x1 is None or x2 is None:
        raise UsageError("--vars is required to compare ranges")
    verdicts = run_pairs(g, pairs, x1, x2, symmetric)
    evidence = []
    for (a, b), v in zip(pairs, verdicts):
        evidence += [f"{a} vs {b}: {v.status}"] + [f"  {line}" for line in v.evidence]
    for v in verdicts:
        if v.status != PROVED:
            return Verdict(v.status, evidence)
    return Verdict(PROVED, evidence)


def _alternative_empty(g: SSG, e) -> bool:
    prod = productive_nonterminals(g)
    return contains_empty(e) or any(n not in prod for n in nonterminals_in(e))


def run_pairs(g: SSG, pairs, x1: str, x2: str, symmetric: bool = False) -> list[Verdict]:
    """Independent intersection requests, run concurrently; results keep the request order."""
    if len(pairs) == 1:
        return [check_pair(g, *pairs[0], x1, x2, symmetric)]
    with ThreadPoolExecutor() as pool:
        return list(pool.map(lambda p: check_pair(g, p[0], p[1], x1, x2, symmetric), pairs))


# ---------------------------------------------------------------------------
# Subcommands


def _vars(text: str | None) -> tuple[str, str] | tuple[None, None]:
    if text is None:
        return None, None
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(parts) or parts[0] == parts[1]:
        raise UsageError(f"--vars expects two distinct variables like x,y, got {text!r}")
    return parts[0], parts[1]


def _require_nt(g: SSG, name: str) -> str:
    if name not in g.nonterminals:
        raise UsageError(f"unknown nonterminal {name}")
    return name


def _require_vars(g: SSG, name: str, x1: str, x2: str) -> None:
    goal = {v.name for v in g.nonterminals[name].goal_vars}
    for x in (x1, x2):
        if x not in goal:
            raise UsageError(f"{x} is not a variable of the goal of {name}")


def cmd_transform(args, out) -> int:
    g = load_ssg(args.ssg)
    names = [_require_nt(g, n) for n in args.nt.split(",")]
    x1, x2 = _vars(args.vars)
    if x1 is None:
        raise UsageError("--vars is required")
    for n in names:
        _require_vars(g, n, x1, x2)
    try:
        grammar = ran_many(g, names, x1, x2, symmetric=args.symmetric)
    except AssumptionViolation as e:
        print(e.report, file=out)
        return EXIT_VIOLATION
    text = to_text(grammar)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=out)
    print(f"nonterminals: {len(grammar.nonterminals)}, rules: {len(grammar.rules)}", file=out)
    for n in names:
        start = str(RangeNT(n, Var(x1), Var(x2)))
        alphabet = sorted(symbol_text(f) for f in reachable_alphabet(grammar, start))
        print(f"alphabet from {start}: {' '.join(alphabet)}", file=out)
    return EXIT_OK


def cmd_check(args, out) -> int:
    g = load_ssg(args.ssg)
    x1, x2 = _vars(args.vars)
    if args.pair:
        pairs = []
        for text in args.pair:
            parts = text.split(",")
            if len(parts) != 2:
                raise UsageError(f"--pair expects A,B, got {text!r}")
            a, b = (_require_nt(g, p.strip()) for p in parts)
            pairs.append((a, b))
        if x1 is None:
            raise UsageError("--vars is required with --pair")
        for a, b in pairs:
            _require_vars(g, a, x1, x2)
            _require_vars(g, b, x1, x2)
        verdicts = run_pairs(g, pairs, x1, x2, args.symmetric)
        status = PROVED
        for v in verdicts:
            if v.status == VIOLATED or (v.status == UNKNOWN and status == PROVED):
                status = v.status
        evidence = []
        for (a, b), v in zip(pairs, verdicts):
            evidence += [f"{a} vs {b}: {v.status}"] + [f"  {line}" for line in v.evidence]
        verdict = Verdict(status, evidence, {k: t for v in verdicts for k, t in v.timings.items()})
    else:
        name = _require_nt(g, args.nt or g.initial)
        verdict = check_nonterminal(g, name, x1, x2, args.symmetric)
    print(verdict.status, file=out)
    for line in verdict.evidence:
        print(f"  {line}", file=out)
    if args.timings:
        for k, t in verdict.timings.items():
            print(f"{k}: {t:.4f}s", file=sys.stderr)
    return verdict.exit_code


def cmd_oracle(args, out) -> int:
    g = load_ssg(args.ssg)
    status = EXIT_OK
    if args.nt or args.vars:
        name = _require_nt(g, args.nt or g.initial)
        x1, x2 = _vars(args.vars)
        if x1 is None:
            raise UsageError("--vars is required")
        _require_vars(g, name, x1, x2)
        try:
            report = check_overapproximation(g, name, x1, x2, args.expr_bound, args.ground_depth)
        except AssumptionViolation as e:
            print(e.report, file=out)
            return EXIT_VIOLATION
        print(
            f"substitutions: {report.substitutions}, ground instances: {report.instances}, "
            f"counterexamples: {len(report.counterexamples)}",
            file=out,
        )
        for c in report.counterexamples:
            print(f"  {c}", file=out)
        if report.counterexamples:
            status = EXIT_UNKNOWN
    if args.ctrs:
        if not args.goal:
            raise UsageError("--goal is required with --ctrs")
        R = load_ctrs(args.ctrs)
        goal = parse_goal(args.goal, R)
        sols = narrow_solutions(goal, R, args.depth)
        if sols:
            print(f"narrowing solutions up to depth {args.depth}: {len(sols)}", file=out)
            for s in sols:
                print(f"  {s}", file=out)
        else:
            print(f"no solutions found up to depth {args.depth}", file=out)
    return status


def cmd_eval(args, out) -> int:
    g = load_ssg(args.ssg)
    name = _require_nt(g, args.nt or g.initial)
    if args.exprs:
        fs = g.fresh_state()
        for e in enumerate_exprs(g, name, args.expr_bound):
            theta = eval_expr(e, fs)
            print(f"{e}  =>  {'fail' if theta is None else theta}", file=out)
        return EXIT_OK
    for theta in subst_set(g, name, args.expr_bound):
        print(theta, file=out)
    return EXIT_OK


def cmd_narrow(args, out) -> int:
    R = load_ctrs(args.ctrs)
    goal = parse_goal(args.goal, R)
    derivations = narrow_derivations(goal, R, args.depth)
    for path in derivations:
        print(goal_text(path[0][1]), file=out)
        for sigma, g in path[1:]:
            print(f"  ~> {sigma}  {goal_text(g)}", file=out)
    sols = narrow_solutions(goal, R, args.depth)
    print(f"solutions: {len(sols)}", file=out)
    for s in sols:
        print(f"  {s}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ssgr", description="Infeasibility checking with substitution-set grammars.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("transform", help="build the range grammar of a nonterminal")
    t.add_argument("--ssg", required=True)
    t.add_argument("--nt", required=True, help="nonterminal, or a comma-separated list")
    t.add_argument("--vars", required=True, help="variable pair, e.g. x,y")
    t.add_argument("-o", "--output")
    t.add_argument("--symmetric", action="store_true", help="use the symmetric ⟨t,y⟩ clause")
    t.set_defaults(func=cmd_transform)

    c = sub.add_parser("check", help="try to prove that no substitution is generated")
    c.add_argument("--ssg", required=True)
    group = c.add_mutually_exclusive_group()
    group.add_argument("--pair", action="append", help="two nonterminals A,B; may be repeated")
    group.add_argument("--nt", help="nonterminal to prove empty (default: initial)")
    c.add_argument("--vars")
    c.add_argument("--symmetric", action="store_true")
    c.add_argument("--timings", action="store_true", help="print timings to stderr")
    c.set_defaults(func=cmd_check)

    o = sub.add_parser("oracle", help="cross-check the transformation and run narrowing")
    o.add_argument("--ssg", required=True)
    o.add_argument("--nt")
    o.add_argument("--vars")
    o.add_argument("--expr-bound", type=int, default=4)
    o.add_argument("--ground-depth", type=int, default=3)
    o.add_argument("--ctrs")
    o.add_argument("--goal")
    o.add_argument("--depth", type=int, default=10)
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("eval", help="print the substitutions generated up to a bound")
    e.add_argument("--ssg", required=True)
    e.add_argument("--nt")
    e.add_argument("--expr-bound", type=int, default=4)
    e.add_argument("--exprs", action="store_true", help="print each expression with its meaning")
    e.set_defaults(func=cmd_eval)

    n = sub.add_parser("narrow", help="print innermost narrowing derivations of a goal")
    n.add_argument("--ctrs", required=True)
    n.add_argument("--goal", required=True)
    n.add_argument("--depth", type=int, default=10)
    n.set_defaults(func=cmd_narrow)
    return p


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
