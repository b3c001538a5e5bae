"""Coding of pairs of ground terms over the paired signature (F ∪ {⊥})².

A pair of trees is overlaid node by node; where only one tree has a node
the other side is padded with ⊥.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from ssgr.terms import Fun, Term, Var, positions


class _Bottom:
    __slots__ = ()

    def __repr__(self):
        return "BOT"

    def __str__(self):
        return "_|_"

    def __reduce__(self):
        return "BOT"


BOT = _Bottom()

Side = Union[str, _Bottom]


@dataclass(frozen=True, order=False)
class PairedSymbol:
    left: Side
    right: Side

    def __post_init__(self):
        if self.left is BOT and self.right is BOT:
            raise ValueError("<_|_,_|_> is not a paired symbol")

    def __str__(self):
        return f"<{self.left},{self.right}>"

    def __repr__(self):
        return f"PairedSymbol({self.left!s}, {self.right!s})"


class CodingError(ValueError):
    pass


def paired_signature(constructors: Mapping[str, int]) -> dict[PairedSymbol, int]:
    """All paired symbols over ``constructors`` with the max-arity rule."""
    sides: list[tuple[Side, int]] = [(BOT, 0)] + sorted(constructors.items())
    out = {}
    for f, m in sides:
        for g, n in sides:
            if f is BOT and g is BOT:
                continue
            out[PairedSymbol(f, g)] = max(m, n)
    return out


def code(t1: Term | _Bottom, t2: Term | _Bottom) -> Fun:
    """The coding of a pair of ground terms; one side may be ``BOT``."""
    if t1 is BOT and t2 is BOT:
        raise CodingError("cannot code a pair of two bottoms")
    for t in (t1, t2):
        if isinstance(t, Var) or (isinstance(t, Fun) and not _ground(t)):
            raise CodingError(f"cannot code non-ground term {t}")
    return _code(t1, t2)


def _ground(t: Term) -> bool:
    return isinstance(t, Fun) and all(_ground(a) for a in t.args)


def _code(t1, t2) -> Fun:
    if t2 is BOT:
        return Fun(PairedSymbol(t1.symbol, BOT), [_code(a, BOT) for a in t1.args])
    if t1 is BOT:
        return Fun(PairedSymbol(BOT, t2.symbol), [_code(BOT, b) for b in t2.args])
    m, n = t1.arity, t2.arity
    args = [_code(a, b) for a, b in zip(t1.args, t2.args)]
    if m <= n:
        args += [_code(BOT, b) for b in t2.args[m:]]
    else:
        args += [_code(a, BOT) for a in t1.args[n:]]
    return Fun(PairedSymbol(t1.symbol, t2.symbol), args)


def decode(u: Term, constructors: Mapping[str, int] | None = None) -> tuple[Term | _Bottom, Term | _Bottom]:
    """Inverse of :func:`code`; raises :class:`CodingError` on malformed input.
    With ``constructors`` the decoded sides must also respect their arities."""
    pair = _decode(u, need_left=None, need_right=None)
    if constructors is not None:
        for t in pair:
            if t is not BOT:
                _check_arities(t, constructors)
    return pair


def _check_arities(t: Fun, constructors: Mapping[str, int]) -> None:
    if constructors.get(t.symbol) != t.arity:
        raise CodingError(f"{t.symbol} with {t.arity} arguments is not a constructor of the signature")
    for a in t.args:
        _check_arities(a, constructors)


def _decode(u, need_left, need_right):
    if not isinstance(u, Fun) or not isinstance(u.symbol, PairedSymbol):
        raise CodingError(f"not a coded term: {u}")
    f, g = u.symbol.left, u.symbol.right
    # A padded side stays padded below; a present side must be present
    # exactly on the first arity(child) children.
    if need_left is False and f is not BOT:
        raise CodingError(f"left side reappears below bottom at {u.symbol}")
    if need_left is True and f is BOT:
        raise CodingError(f"missing left child at {u.symbol}")
    if need_right is False and g is not BOT:
        raise CodingError(f"right side reappears below bottom at {u.symbol}")
    if need_right is True and g is BOT:
        raise CodingError(f"missing right child at {u.symbol}")
    k = u.arity
    left_kids, right_kids = [], []
    # Arity of each side is recovered from the children: a side is present
    # on a prefix of the children.
    lefts = [a.symbol.left is not BOT if isinstance(a, Fun) and isinstance(a.symbol, PairedSymbol) else None for a in u.args]
    rights = [a.symbol.right is not BOT if isinstance(a, Fun) and isinstance(a.symbol, PairedSymbol) else None for a in u.args]
    m = _prefix_len(lefts) if f is not BOT else 0
    n = _prefix_len(rights) if g is not BOT else 0
    if max(m, n) != k:
        raise CodingError(f"arity of {u.symbol} does not match its children")
    for i, a in enumerate(u.args):
        l, r = _decode(a, need_left=(i < m) if f is not BOT else False, need_right=(i < n) if g is not BOT else False)
        if i < m:
            left_kids.append(l)
        if i < n:
            right_kids.append(r)
    t1 = BOT if f is BOT else Fun(f, left_kids)
    t2 = BOT if g is BOT else Fun(g, right_kids)
    return t1, t2


def _prefix_len(flags: list) -> int:
    n = 0
    for flag in flags:
        if flag is None:
            raise CodingError("not a coded term")
        if not flag:
            break
        n += 1
    return n


def coded_positions(t1, t2) -> set:
    """Pos(t1) ∪ Pos(t2), treating ``BOT`` as having no positions."""
    out = set()
    for t in (t1, t2):
        if t is not BOT:
            out.update(positions(t))
    return out
