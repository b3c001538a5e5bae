import pytest

from helpers import derives, num, random_rtg, rng, rtg_levels
from ssgr.coding import BOT, PairedSymbol
from ssgr.rtg import (
    NT,
    RTG,
    enumerate_terms,
    intersect,
    is_empty,
    is_normal,
    member,
    normalize,
    parse_rtg,
    product,
    productive,
    to_text,
    witness,
)
from ssgr.syntax import ParseError
from ssgr.terms import Fun, ground_terms, height

NAT = {"0": 0, "s": 1}


@pytest.fixture
def G2():
    return RTG("X", {"X", "X'"}, NAT, [("X", Fun("0")), ("X", Fun("s", [NT("X'")])), ("X'", Fun("s", [NT("X")]))])


def test_normalize_splits():
    g = RTG("X", {"X"}, NAT, [("X", Fun("s", [Fun("s", [NT("X")])])), ("X", Fun("0"))])
    n = normalize(g)
    assert all(is_normal(rhs) for _, rhs in n.rules)
    assert len(n.nonterminals) == 2
    assert enumerate_terms(n, "X", 4) == enumerate_terms(g, "X", 4) == {num(0), num(2), num(4)}


def test_normalize_keeps_normal_grammar(G2):
    assert normalize(G2) == G2


def test_emptiness(G2):
    assert is_empty(RTG("N", {"N"}, NAT, []), "N")
    assert not is_empty(G2, "X")
    assert is_empty(RTG("N", {"N"}, NAT, [("N", Fun("s", [NT("N")]))]), "N")
    assert productive(G2) == {"X", "X'"}


def test_membership(G2):
    assert member(G2, "X", num(2))
    assert not member(G2, "X", num(1))
    assert member(G2, "X'", num(1))


def test_enumerate(G2):
    assert enumerate_terms(G2, "X", 2) == {num(0), num(2)}
    assert enumerate_terms(G2, "X", 0) == {num(0)}
    for t in enumerate_terms(G2, "X'", 7):
        assert member(G2, "X'", t)


def test_intersection_parity(G2):
    assert product(G2, "X", G2, "X'").empty
    assert is_empty(intersect(G2, "X", G2, "X'"))
    both = intersect(G2, "X", G2, "X")
    assert member(both, both.initial, num(2))
    assert not member(both, both.initial, num(3))


def test_product_certificate_lists_unproductive(G2):
    p = product(G2, "X", G2, "X'")
    assert p.grammar.initial in p.unproductive


def test_text_roundtrip(G2):
    assert parse_rtg(to_text(G2)) == G2
    paired = RTG(
        "G[x,y]",
        {"G[x,y]", "[_|_,A]"},
        {PairedSymbol("0", "s"): 1, PairedSymbol(BOT, "0"): 0, PairedSymbol(BOT, "s"): 1},
        [
            ("G[x,y]", Fun(PairedSymbol("0", "s"), [NT("[_|_,A]")])),
            ("[_|_,A]", Fun(PairedSymbol(BOT, "0"))),
            ("[_|_,A]", Fun(PairedSymbol(BOT, "s"), [NT("[_|_,A]")])),
        ],
    )
    assert parse_rtg(to_text(paired)) == paired


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_rtg("(ALPHABET 0/0) (NONTERMINALS X) (FOO X)")
    with pytest.raises(ParseError) as e:
        parse_rtg("(ALPHABET 0/0)\n(NONTERMINALS X)\n(INITIAL X)\n(RULE X -> s(X))")
    assert e.value.line == 4


def test_rejects_undeclared():
    with pytest.raises(ValueError):
        RTG("X", {"X"}, NAT, [("X", Fun("s", [NT("Y")]))])


# ---------------------------------------------------------------------------
# random grammars against naive enumeration and a top-down oracle

SIG = {"a": 0, "b": 0, "g": 1, "f": 2}


def test_random_grammars_against_oracles():
    r = rng("rtg")
    small = ground_terms(SIG, 2)
    nonempty = 0
    for _ in range(50):
        g = random_rtg(r, r.randint(1, 3), SIG)
        levels = rtg_levels(g, 3)
        prod = productive(g)
        for n in sorted(g.nonterminals):
            # witnesses of productive nonterminals have height at most |N|
            assert (n in prod) == bool(levels[n])
            assert is_empty(g, n) == (not levels[n])
            nonempty += bool(levels[n])
            for t in small:
                assert member(g, n, t) == derives(g, n, t) == (t in levels[n])
            for d in range(4):
                got = enumerate_terms(g, n, d)
                assert got == {t for t in levels[n] if height(t) <= d}
        # height 4 only where it stays small
        if max(map(len, levels.values()), default=0) <= 200:
            deep = rtg_levels(g, 4)
            for n in g.nonterminals:
                assert enumerate_terms(g, n, 4) == deep[n]
    assert nonempty > 20


def test_random_intersections_against_oracles():
    r = rng("rtg-product")
    nonempty = 0
    for _ in range(50):
        g1 = random_rtg(r, r.randint(1, 3), SIG)
        # pair a grammar with itself now and then so that some products are nonempty
        g2 = g1 if r.random() < 0.3 else random_rtg(r, r.randint(1, 3), SIG)
        l1, l2 = rtg_levels(g1, 3), rtg_levels(g2, 3)
        p = product(g1, g1.initial, g2, g2.initial)
        both = intersect(g1, g1.initial, g2, g2.initial)
        expected = l1[g1.initial] & l2[g2.initial]
        assert enumerate_terms(both, both.initial, 3) == expected
        if p.empty:
            assert not expected
            assert is_empty(both)
        else:
            nonempty += 1
            # a witness of any height must be accepted by both factors
            t = witness(both)
            assert derives(g1, g1.initial, t) and derives(g2, g2.initial, t)
    assert nonempty >= 10


def test_witness_has_least_height(G2):
    assert witness(G2, "X") == num(0)
    assert witness(G2, "X'") == num(1)
    assert witness(RTG("N", {"N"}, NAT, [("N", Fun("s", [NT("N")]))])) is None
    r = rng("witness")
    for _ in range(50):
        g = random_rtg(r, 3, SIG)
        levels = rtg_levels(g, 3)
        for n in g.nonterminals:
            t = witness(g, n)
            if levels[n]:
                assert t in levels[n] and height(t) == min(map(height, levels[n]))
            else:
                assert t is None
