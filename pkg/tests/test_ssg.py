import pytest

from helpers import S, T, data
from ssgr.ssg import (
    SSG,
    Comp,
    Empty,
    NonTerm,
    Nonterminal,
    Par,
    Rec,
    SubstConst,
    enumerate_exprs,
    eval_expr,
    language_empty,
    load_ssg,
    parse_ssg,
    productive_nonterminals,
    subst_set,
    to_text,
)
from ssgr.syntax import ParseError
from ssgr.terms import Fun, Var, alpha_equivalent, canonical

x, y = Var("x"), Var("y")


def C(text):
    return SubstConst(S(text))


@pytest.fixture(scope="module")
def G1():
    return load_ssg(data("gcd.ssg"))


def test_eval_composition():
    assert eval_expr(Comp(C("{y -> 0}"), C("{x -> s(y)}"))) == S("{x -> s(0), y -> 0}")


def test_eval_parallel_with_freshening():
    e = Par(Comp(C("{x' -> s(y)}"), C("{x -> x'}")), C("{x -> s(s(z))}"))
    got = eval_expr(e)
    assert got.dom == {x, Var("x'")}
    assert alpha_equivalent(got, S("{x -> s(s(v)), x' -> s(s(v))}"))
    # z is renamed apart from the left operand
    (fresh,) = got.vran
    assert fresh not in {Var("z"), Var("y"), x, Var("x'")}


def test_eval_empty_fails():
    assert eval_expr(Comp(Par(Empty(), C("{y -> z}")), C("{x -> s(y)}"))) is None


def test_eval_rec():
    e = Comp(Rec(C("{x -> 0, y -> s(y')}"), S("{x' -> x, y' -> y}")), C("{y -> s(x')}"))
    got = eval_expr(e)
    assert got.dom == {Var("x'"), Var("y'"), y}
    assert got[Var("x'")] == T("0")
    assert got[y] == T("s(0)")
    (fresh,) = got.vran
    assert got[Var("y'")] == Fun("s", [fresh])
    assert fresh not in {x, y, Var("x'"), Var("y'")}


def test_eval_rec_requires_domain():
    # VRan(delta) = {x, y} is not inside Dom = {x}
    assert eval_expr(Rec(C("{x -> 0}"), S("{x' -> x, y' -> y}"))) is None


def test_eval_non_idempotent_parallel_fails():
    e = Par(Comp(C("{y -> s(x)}"), C("{x -> y}")), C("{z -> 0}"))
    assert eval_expr(e) is None


def test_eval_rejects_nonterminals():
    with pytest.raises(ValueError):
        eval_expr(NonTerm("G"))


def test_enumerate_gcd(G1):
    assert [str(e) for e in enumerate_exprs(G1, "G_lt", 1)] == ["{x -> 0, y -> s(y2)}"]
    two = {str(e) for e in enumerate_exprs(G1, "G_lt", 2)}
    assert "rec({x -> 0, y -> s(y2)}, {x3 -> x, y3 -> y}) . {x -> s(x3), y -> s(y3)}" in two
    assert enumerate_exprs(G1, "G_lt", 0) == []


def test_subst_set_gcd(G1):
    assert subst_set(G1, "G_lt", 1) == [S("{x -> 0, y -> s(y2)}")]
    for theta in subst_set(G1, "G_lt", 3):
        assert theta.dom == {x, y}
    gt = subst_set(G1, "G_gt", 3)
    assert any(alpha_equivalent(t, S("{x -> s(v), y -> 0}")) for t in gt)


def test_conjunction_is_empty(G1):
    assert subst_set(G1, "G_and", 6) == []


def test_empty_rule():
    g = SSG("G", {"G": Nonterminal("G", (x,))}, [("G", Empty())], {"0": 0})
    assert subst_set(g, "G", 5) == []
    assert language_empty(g, "G")


def test_productive_nonterminals():
    g = load_ssg(data("x_lt_x.ssg"))
    assert productive_nonterminals(g) == set()
    assert language_empty(g, "G_xx")
    g1 = load_ssg(data("gcd.ssg"))
    assert productive_nonterminals(g1) == {"G_and", "G_lt", "G_gt"}


def test_simple_and_rec_forms_agree():
    rec = load_ssg(data("gcd.ssg"))
    simple = load_ssg(data("gcd_simple.ssg"))
    for n in ("G_lt", "G_gt"):
        a = {canonical(t) for t in subst_set(rec, n, 4)}
        b = {canonical(t) for t in subst_set(simple, n, 4)}
        assert a == b


def test_text_roundtrip(G1):
    assert parse_ssg(to_text(G1)) == G1


def test_parse_errors():
    with pytest.raises(ParseError) as e:
        parse_ssg("(CONSTRUCTORS 0/0)\n(NONTERMINAL G vars x)\n(RULE G -> {x -> })")
    assert e.value.line == 3
    with pytest.raises(ParseError):
        parse_ssg("(CONSTRUCTORS 0/0) (NONTERMINAL G vars x) (RULE H -> {x -> 0})")


def test_rec_renaming_validated():
    with pytest.raises(ValueError):
        SSG(
            "G",
            {"G": Nonterminal("G", (x, y))},
            [("G", Rec(NonTerm("G"), S("{u -> x, v -> x}")))],
            {"0": 0},
        )


def test_fresh_state_seeded_above_grammar():
    g = load_ssg(data("gcd.ssg"))
    fs = g.fresh_state()
    for theta in subst_set(g, "G_lt", 4, fs):
        for v in theta.vran:
            assert v.index > 0 or v.name == "y2"
