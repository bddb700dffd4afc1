import pytest

from corpus import generate_corpus
from derivations import Derivation, Selection, Side
from descriptions import LogicSpec
from errors import DescriptionError, ParseError, RuleApplicationError
from formulas import Atom, parse_formula
from sequents import (Sequent, invertible_move, parse_sequent, render_sequent, sc_apply, sc_check, sc_prove,
                      weaken)


def goal(text):
    return Sequent.goal(parse_formula(text))


def test_sequent_text_round_trip():
    s = parse_sequent("b, a -> b, a |- [1]c, a")
    assert render_sequent(s) == "a, a -> b, b |- [1]c, a"
    assert parse_sequent(render_sequent(s)) == s
    assert render_sequent(Sequent()) == "|-"


def test_sequent_needs_turnstile():
    with pytest.raises(ParseError):
        parse_sequent("a, b")


@pytest.mark.parametrize("text", [
    "a -> a",
    "a & b -> b & a",
    "(a -> b) -> (b -> c) -> a -> c",
    "a | b -> b | a",
    "bot -> a",
    "~~(a | ~a)",
])
def test_intuitionistic_theorems(mlj, text):
    result = sc_prove(mlj, goal(text))
    assert result.proved
    assert sc_check(mlj, result.derivation).ok


@pytest.mark.parametrize("text", ["a | ~a", "((a -> b) -> a) -> a", "~~a -> a"])
def test_classical_only_principles_fail_in_mlj(mlj, text):
    result = sc_prove(mlj, goal(text))
    assert result.status == "refuted"
    assert not result.exhausted


@pytest.mark.parametrize("preset, text, provable", [
    ("k", "[1](a -> b) -> [1]a -> [1]b", True),
    ("k", "[1]a -> a", False),
    ("kt", "[1]a -> a", True),
    ("kd", "[1]a -> ~[1]~a", True),
    ("k", "[1]a -> ~[1]~a", False),
    ("k4", "[1]a -> [1][1]a", True),
    ("kt", "[1]a -> [1][1]a", False),
    ("s4", "[1]a -> [1][1]a", True),
    ("bimodal", "[2]a -> [1]a", True),
    ("bimodal", "[1]a -> [2]a", False),
])
def test_multimodal_presets(preset, text, provable):
    logic = LogicSpec.preset(preset)
    result = sc_prove(logic, goal(text))
    assert result.proved is provable
    if provable:
        assert sc_check(logic, result.derivation).ok


@pytest.mark.parametrize("text, e, m", [
    ("[1](a & b) -> [1](b & a)", True, True),
    ("[1](a & b) -> [1]a", False, True),
    ("[1]a -> [1](a | b)", False, True),
    ("[1]a & [1]b -> [1](a & b)", False, False),
])
def test_non_normal_logics(logic_e, logic_m, text, e, m):
    assert sc_prove(logic_e, goal(text)).proved is e
    assert sc_prove(logic_m, goal(text)).proved is m


def test_tiny_budget_is_reported_as_exhausted(k):
    result = sc_prove(k, goal("[1](a -> b) -> [1]a -> [1]b"), budget=1)
    assert result.exhausted
    assert result.status == "exhausted"
    assert result.derivation is None


def test_goal_with_unknown_index_is_rejected(k):
    with pytest.raises(DescriptionError):
        sc_prove(k, goal("[3]a -> [3]a"))


def test_checker_rejects_a_wrong_premise(mlj):
    a = Atom("a")
    conclusion = parse_sequent("|- a -> a")
    bad = Derivation(conclusion, "impR", Selection(parse_formula("a -> a"), Side.RIGHT),
                     (Derivation(parse_sequent("a |- b"), "init", Selection(a, Side.LEFT)),))
    report = sc_check(mlj, bad)
    assert not report.ok
    assert report.path == ()
    assert "premise 1" in report.reason


def test_checker_rejects_unknown_rule(mlj):
    d = Derivation(parse_sequent("a |- a"), "boxR_1", Selection(Atom("a")))
    report = sc_check(mlj, d)
    assert not report.ok


def test_init_is_restricted_to_atoms(mlj):
    with pytest.raises(RuleApplicationError):
        sc_apply(mlj, "init", parse_sequent("a & b |- a & b"), Selection(parse_formula("a & b")))


def test_intuitionistic_impr_drops_the_succedent(mlj):
    (premise,) = sc_apply(mlj, "impR", parse_sequent("c |- a -> b, d"), Selection(parse_formula("a -> b")))
    assert premise == parse_sequent("a, c |- b")


def test_weakening_preserves_height(k):
    result = sc_prove(k, goal("[1](a -> b) -> [1]a -> [1]b"))
    d = result.derivation
    extra_left = (parse_formula("c"), parse_formula("[1]c"))
    extra_right = (parse_formula("d"),)
    w = weaken(k, d, extra_left, extra_right)
    assert sc_check(k, w).ok
    assert w.height == d.height
    assert w.conclusion == Sequent(d.conclusion.ante + extra_left, d.conclusion.succ + extra_right)


def test_settled_implication_is_not_reopened(mlj):
    s = parse_sequent("~(a | ~a) |- a, ~a")
    assert invertible_move(mlj, s.ante, s.succ) is None
    s = parse_sequent("~(a | ~a), a |- bot")
    assert invertible_move(mlj, s.ante, s.succ)[0] == "impL"


def test_excluded_middle_is_not_refutable_in_mlj(mlj):
    result = sc_prove(mlj, goal("~~(a | ~a)"), budget=500)
    assert result.proved
    assert result.nodes < 100
    rules = result.derivation.rule_counts()
    assert rules["impR"] == 2


def test_intuitionistic_impr_keeps_the_antecedent(mlj):
    p = parse_formula("b -> b")
    with pytest.raises(RuleApplicationError):
        sc_apply(mlj, "impR", parse_sequent("a |- b -> b"), Selection(p, Side.RIGHT, context=()))
    dropped = Derivation(parse_sequent("a |- b -> b"), "impR", Selection(p, Side.RIGHT, context=()),
                         (Derivation(parse_sequent("b |- b"), "init", Selection(Atom("b"), Side.LEFT)),))
    report = sc_check(mlj, dropped)
    assert not report.ok
    assert "antecedent" in report.reason


def test_weakening_flows_into_intuitionistic_impr(mlj):
    d = sc_prove(mlj, goal("(a -> b) -> a -> b")).derivation
    w = weaken(mlj, d, (parse_formula("c"),), (parse_formula("d"),))
    assert sc_check(mlj, w).ok
    assert w.height == d.height
    assert all(parse_formula("c") in node.conclusion.ante for _, node in w.walk())


@pytest.mark.parametrize("preset, text, provable", [
    ("kt", "[1](a & b) -> a", True),
    ("kt", "[1](a -> b) & [1]a -> b", True),
    ("s4", "[1](a | b) -> [1][1](b | a)", True),
    ("kt", "[1](a & b) -> c", False),
])
def test_reflexive_boxes_are_not_unboxed_twice(preset, text, provable):
    result = sc_prove(LogicSpec.preset(preset), goal(text), budget=2000)
    assert not result.exhausted
    assert result.proved is provable
    s = parse_sequent("[1](a & b), a, b |- c")
    assert invertible_move(LogicSpec.preset("kt"), s.ante, s.succ) is None


@pytest.mark.slow
@pytest.mark.parametrize("preset", ["mlj", "k", "s4"])
def test_weakening_preserves_height_on_a_corpus(preset):
    logic = LogicSpec.intuitionistic() if preset == "mlj" else LogicSpec.preset(preset)
    formulas = generate_corpus(logic, seed=17, size=150, depth=3, atoms=3)
    checked = 0
    for f, g, extra in zip(formulas, formulas[50:], formulas[100:]):
        d = sc_prove(logic, Sequent((f, g), (f,))).derivation
        w = weaken(logic, d, (extra,), (g,))
        assert sc_check(logic, w).ok
        assert w.height == d.height
        assert w.conclusion == Sequent((f, g, extra), (f, g))
        checked += 1
    assert checked == 50
