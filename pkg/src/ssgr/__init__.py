"""Range analysis of substitution-set grammars via coded regular tree grammars.

The package evaluates substitution-set grammars (grammar representations of
innermost narrowing trees), transforms them into regular tree grammars over a
paired signature, and decides intersection emptiness of the resulting
languages to prove conditions infeasible.
"""

from ssgr.terms import (
    FreshState,
    Fun,
    Subst,
    Var,
    apply,
    compose,
    freshen,
    mgu,
    parallel_compose,
    restrict,
)

__all__ = [
    "FreshState",
    "Fun",
    "Subst",
    "Var",
    "apply",
    "compose",
    "freshen",
    "mgu",
    "parallel_compose",
    "restrict",
]

__version__ = "0.1.0"
