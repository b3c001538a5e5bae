import io

import pytest

from helpers import data
from ssgr import cli
from ssgr.rtg import parse_rtg
from ssgr.ssg import load_ssg
from ssgr.transform import ran_many

GCD = str(data("gcd.ssg"))
G5 = str(data("g5.ssg"))
XX = str(data("x_lt_x.ssg"))
TRS = str(data("gcd.trs"))


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def test_check_gcd_pair():
    code, text = run("check", "--ssg", GCD, "--pair", "G_lt,G_gt", "--vars", "x,y")
    assert code == 0
    assert text.splitlines()[0] == "infeasible-proved"
    assert "unproductive" in text


def test_check_initial_nonterminal():
    code, text = run("check", "--ssg", GCD, "--vars", "x,y")
    assert code == 0
    assert "G_lt vs G_gt: infeasible-proved" in text


def test_check_overlapping_ranges_unknown():
    code, text = run("check", "--ssg", GCD, "--pair", "G_lt,G_lt", "--vars", "x,y")
    assert code == 3
    assert text.startswith("unknown")


def test_check_empty_language_needs_no_vars():
    code, text = run("check", "--ssg", XX)
    assert code == 0
    assert text.startswith("infeasible-proved")


def test_check_violation_exit_code():
    code, text = run("check", "--ssg", G5, "--pair", "G_xy,G_xy", "--vars", "x,y")
    assert code == 2
    assert "position 1" in text


def test_check_several_pairs_keep_order():
    code, text = run("check", "--ssg", GCD, "--pair", "G_lt,G_gt", "--pair", "G_gt,G_lt", "--vars", "x,y")
    assert code == 0
    lines = [line.strip() for line in text.splitlines() if " vs " in line]
    assert lines == ["G_lt vs G_gt: infeasible-proved", "G_gt vs G_lt: infeasible-proved"]


def test_disjoint_two_rule_grammar(tmp_path):
    p = tmp_path / "two.ssg"
    p.write_text(
        "(CONSTRUCTORS a/0 b/0 g/1)\n"
        "(NONTERMINAL G vars x y) (NONTERMINAL L vars x y) (NONTERMINAL R vars x y)\n"
        "(INITIAL G)\n"
        "(RULE G -> L /\\ R)\n"
        "(RULE L -> {x -> a, y -> g(u)})\n"
        "(RULE R -> {x -> b, y -> v})\n"
    )
    code, text = run("check", "--ssg", str(p), "--vars", "x,y")
    assert code == 0, text


def test_transform_output_file_roundtrip(tmp_path):
    target = tmp_path / "ran.rtg"
    code, text = run("transform", "--ssg", GCD, "--nt", "G_lt,G_gt", "--vars", "x,y", "-o", str(target))
    assert code == 0
    assert "alphabet from G_lt[x,y]: <0,s> <_|_,0> <_|_,false> <_|_,s> <_|_,true> <s,s>" in text
    expected = ran_many(load_ssg(GCD), ["G_lt", "G_gt"], "x", "y")
    assert parse_rtg(target.read_text()) == expected


def test_transform_violation():
    code, text = run("transform", "--ssg", G5, "--nt", "G_xy", "--vars", "x,y")
    assert code == 2
    assert "pair (x,y) with (s(x'), s(s(y'))), position 1" in text


def test_output_is_deterministic():
    for argv in (
        ("transform", "--ssg", GCD, "--nt", "G_lt,G_gt", "--vars", "x,y"),
        ("check", "--ssg", GCD, "--vars", "x,y"),
        ("eval", "--ssg", GCD, "--nt", "G_lt", "--expr-bound", "3"),
        ("narrow", "--ctrs", TRS, "--goal", "x < y -> true", "--depth", "3"),
    ):
        assert run(*argv) == run(*argv)


def test_oracle():
    code, text = run("oracle", "--ssg", GCD, "--nt", "G_lt", "--vars", "x,y")
    assert code == 0
    assert "counterexamples: 0" in text
    code, text = run("oracle", "--ssg", GCD, "--nt", "G_lt", "--vars", "x,y", "--expr-bound", "0")
    assert code == 0
    assert "substitutions: 0, ground instances: 0, counterexamples: 0" in text


def test_oracle_narrowing():
    code, text = run("oracle", "--ssg", XX, "--ctrs", TRS, "--goal", "x < x -> true", "--depth", "8")
    assert code == 0
    assert "no solutions found up to depth 8" in text


def test_eval_prints_substitutions():
    code, text = run("eval", "--ssg", GCD, "--nt", "G_lt", "--expr-bound", "1")
    assert (code, text) == (0, "{x -> 0, y -> s(y2)}\n")


def test_narrow():
    code, text = run("narrow", "--ctrs", TRS, "--goal", "x < y -> true", "--depth", "2")
    assert code == 0
    assert "solutions: 1\n  {x -> 0, y -> s(y#2)}" in text


@pytest.mark.parametrize(
    "argv",
    [
        ("check", "--ssg", GCD, "--pair", "G_lt,G_nope", "--vars", "x,y"),
        ("check", "--ssg", GCD, "--pair", "G_lt,G_gt"),
        ("check", "--ssg", GCD, "--pair", "G_lt,G_gt", "--vars", "x,x"),
        ("check", "--ssg", GCD, "--pair", "G_lt,G_gt", "--vars", "x,z"),
        ("transform", "--ssg", GCD, "--nt", "G_nope", "--vars", "x,y"),
        ("eval", "--ssg", "/nonexistent.ssg"),
        ("oracle", "--ssg", GCD, "--ctrs", TRS),
        ("narrow", "--ctrs", TRS, "--goal", "x < y ->"),
    ],
)
def test_usage_errors(argv, capsys):
    code, _ = run(*argv)
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_argparse_errors_exit_one(capsys):
    for argv in (["bogus"], [], ["check"], ["check", "--ssg", GCD, "--nt", "G", "--pair", "a,b"]):
        with pytest.raises(SystemExit) as e:
            cli.main(argv, out=io.StringIO())
        assert e.value.code == 1
    capsys.readouterr()


def test_parse_error_reports_position(tmp_path, capsys):
    p = tmp_path / "bad.ssg"
    p.write_text("(CONSTRUCTORS 0/0)\n(NONTERMINAL G vars x)\n(RULE G -> {x -> })\n")
    code, _ = run("eval", "--ssg", str(p))
    assert code == 1
    assert "3:" in capsys.readouterr().err


def test_timings_go_to_stderr(capsys):
    code, text = run("check", "--ssg", GCD, "--pair", "G_lt,G_gt", "--vars", "x,y", "--timings")
    assert code == 0
    assert "product" in capsys.readouterr().err
    assert "product:" not in text
