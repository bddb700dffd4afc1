import pytest

from corpus import generate_corpus
from derivations import Derivation, Phase, Selection, Side
from descriptions import LogicSpec
from errors import DescriptionError, RuleApplicationError, TranslationError
from formulas import Atom, Box, Imp, parse_formula
from linear_nested import linearise
from nested import (HoledContext, MarkedChild, NestedSequent, PlainChild, holed, node_at, ns_apply, ns_check, ns_prove,
                    ns_rule_table, parse_nested, phase_check, plug, position_order, render_nested)


def goal(text):
    return NestedSequent.goal(parse_formula(text))


@pytest.mark.parametrize("text", [
    "a, c |- b, [a |-], [|- d, [e |- f]]",
    "[1]a |- [|- a]^1, [b |- c]^2",
    "[1]a |- < |- b ; b |- >",
    "|-",
])
def test_nested_text_round_trip(text):
    ns = parse_nested(text)
    assert render_nested(ns) == text
    assert parse_nested(render_nested(ns)) == ns


def test_parsed_structure():
    ns = parse_nested("[1]a |- b, [|- a]^2, < |- b ; b |- >")
    assert ns.ante == (Box(1, Atom("a")),)
    assert ns.children[0] == PlainChild(2, NestedSequent((), (Atom("a"),)))
    assert isinstance(ns.children[1], MarkedChild)
    assert ns.node_count() == 3


def test_position_order():
    assert position_order((1,), (1, 2)) == "≤"
    assert position_order((1, 2), (1,)) == "≥"
    assert position_order((1,), (2,)) == "∥"
    assert position_order((2, 1), (2, 1)) == "="


def test_holed_context_and_plug():
    ns = parse_nested("a |- b, [c |- d]")
    ctx, child = holed(ns, (1,))
    assert ctx.root == parse_nested("a |- b")
    assert plug(ctx, child.body) == ns
    assert plug(ctx, NestedSequent()) == parse_nested("a |- b")
    assert plug(HoledContext(NestedSequent(), (1,)), child.body) == child.body


def test_node_at_rejects_missing_positions():
    ns = parse_nested("a |- [b |-]")
    assert node_at(ns, (1,)) == parse_nested("b |-")
    with pytest.raises(RuleApplicationError):
        node_at(ns, (2,))


@pytest.mark.parametrize("preset, text", [
    ("k", "|- < |- a ; a |- >"),
    ("k", "|- [|- a]"),
    ("k", "|- [|- a]^2"),
])
def test_ill_formed_goals_are_rejected(preset, text):
    with pytest.raises(DescriptionError):
        ns_prove(LogicSpec.preset(preset), parse_nested(text))


def test_intuitionistic_nestings_carry_no_index(mlj):
    with pytest.raises(DescriptionError):
        ns_prove(mlj, parse_nested("|- [|- a]^1"))


def test_rule_table_phases(mlj, s4):
    table = ns_rule_table(mlj)
    assert table["impR"].phase == Phase.NESTING
    assert table["lift"].phase == Phase.LIFT
    assert all(r.shallow and r.n_directed for r in table.rules)
    names = ns_rule_table(s4).names()
    assert {"t_1", "boxR_1", "boxL_1_1", "4_1_1"} <= set(names)


def test_lift_keeps_the_parent_copy(mlj):
    cd = parse_formula("c & d")
    g = parse_nested("c & d |- [a |- a]")
    (premise,) = ns_apply(mlj, "lift", g, Selection(cd, Side.LEFT, child=1))
    assert cd in node_at(premise, ()).ante
    assert cd in node_at(premise, (1,)).ante


def test_marked_nesting_rules(logic_e, logic_m):
    g = parse_nested("[1]a |- < |- b ; b |- >")
    first, second = ns_apply(logic_e, "boxL_e", g, Selection(Box(1, Atom("a")), Side.LEFT, child=1))
    assert first == parse_nested("[1]a |- [a |- b]")
    assert second == parse_nested("[1]a |- [b |- a]")
    (marked,) = ns_apply(logic_m, "M_n", g, Selection(child=1))
    assert marked == parse_nested("[1]a |- < |- b ; bot, b |- >")
    with pytest.raises(RuleApplicationError):
        ns_apply(logic_e, "M_n", g, Selection(child=1))


@pytest.mark.parametrize("text", [
    "a -> a",
    "(a -> b) -> (b -> c) -> a -> c",
    "a & (b | c) -> a & b | a & c",
    "~~(a | ~a)",
    "((a -> b) -> c) -> (b -> c)",
])
def test_intuitionistic_search(mlj, text):
    result = ns_prove(mlj, goal(text))
    assert result.proved
    assert ns_check(mlj, result.derivation).ok
    assert phase_check(mlj, result.derivation).ok


@pytest.mark.parametrize("text", ["a | ~a", "((a -> b) -> a) -> a"])
def test_intuitionistic_search_refutes(mlj, text):
    assert ns_prove(mlj, goal(text)).status == "refuted"


@pytest.mark.parametrize("preset, text, provable", [
    ("k", "[1](a -> b) -> [1]a -> [1]b", True),
    ("k", "[1]a -> a", False),
    ("kt", "[1]a -> a", True),
    ("kd", "[1]a -> ~[1]~a", True),
    ("k4", "[1]a -> [1][1]a", True),
    ("k4", "[1]a -> a", False),
    ("s4", "[1]a -> [1][1]a", True),
    ("bimodal", "[2]a -> [1]a", True),
    ("bimodal", "[1]a -> [2]a", False),
])
def test_multimodal_search(preset, text, provable):
    logic = LogicSpec.preset(preset)
    result = ns_prove(logic, goal(text))
    assert result.proved is provable
    if provable:
        assert ns_check(logic, result.derivation).ok
        assert phase_check(logic, result.derivation).ok


@pytest.mark.parametrize("text, e, m", [
    ("[1](a & b) -> [1](b & a)", True, True),
    ("[1](a & b) -> [1]a", False, True),
    ("[1](a -> b) -> [1]a -> [1]b", False, False),
])
def test_non_normal_search(logic_e, logic_m, text, e, m):
    for logic, expected in ((logic_e, e), (logic_m, m)):
        result = ns_prove(logic, goal(text))
        assert result.proved is expected
        if expected:
            assert ns_check(logic, result.derivation).ok


def _out_of_phase_proof(mlj):
    """impR, lift, then andL back at the root and init in the child"""
    cd, f = parse_formula("c & d"), parse_formula("a -> a")
    g0 = NestedSequent((cd,), (f,))
    s0 = Selection(f, Side.RIGHT)
    (g1,) = ns_apply(mlj, "impR", g0, s0)
    s1 = Selection(cd, Side.LEFT, child=1)
    (g2,) = ns_apply(mlj, "lift", g1, s1)
    s2 = Selection(cd, Side.LEFT)
    (g3,) = ns_apply(mlj, "andL", g2, s2)
    leaf = Derivation(g3, "init", Selection(Atom("a"), Side.LEFT, at=(1,)))
    return Derivation(g0, "impR", s0, (Derivation(g1, "lift", s1, (Derivation(g2, "andL", s2, (leaf,)),)),))


def test_phase_check_rejects_local_rule_after_lift(mlj):
    d = _out_of_phase_proof(mlj)
    assert ns_check(mlj, d).ok
    report = phase_check(mlj, d)
    assert not report.ok
    assert report.path == (0, 0)
    assert "andL" in report.reason


def test_linearise_needs_normal_form(mlj):
    with pytest.raises(TranslationError, match="normal form"):
        linearise(mlj, _out_of_phase_proof(mlj))


def test_phases_come_from_the_rule_table(logic_m):
    assert ns_rule_table(logic_m)["M_n"].phase == Phase.LIFT
    result = ns_prove(logic_m, goal("[1](a & b) -> [1]a"))
    assert "M_n" in result.derivation.rule_counts()
    assert phase_check(logic_m, result.derivation).ok


def test_local_rule_after_the_marked_lift_is_out_of_phase(logic_m):
    cd, box = parse_formula("c & d"), parse_formula("[1]a")
    g0 = parse_nested("[1](a & b), c & d |- [1]a")
    s0 = Selection(box, Side.RIGHT)
    (g1,) = ns_apply(logic_m, "boxR_e", g0, s0)
    s1 = Selection(child=1)
    (g2,) = ns_apply(logic_m, "M_n", g1, s1)
    s2 = Selection(cd, Side.LEFT)
    d = Derivation(g0, "boxR_e", s0, (Derivation(g1, "M_n", s1, (Derivation(g2, "andL", s2),)),))
    report = phase_check(logic_m, d)
    assert not report.ok
    assert report.path == (0, 0)


def test_phase_check_rejects_rules_outside_the_table(mlj):
    report = phase_check(mlj, Derivation(parse_nested("a |- a"), "k_1", Selection()))
    assert not report.ok
    assert "k_1" in report.reason


def _nestings(*bodies):
    return NestedSequent(children=tuple(PlainChild(None, NestedSequent(succ=(f,))) for f in bodies))


@pytest.mark.slow
def test_nesting_disjunction_on_a_corpus(mlj):
    formulas = generate_corpus(mlj, seed=11, size=100, depth=3, atoms=2)
    pairs = [(Imp(f, f) if k % 2 == 0 else f, g) for k, (f, g) in enumerate(zip(formulas, formulas[50:]))]
    provable_pairs = 0
    for f, g in pairs:
        both = ns_prove(mlj, _nestings(f, g))
        if not both.proved:
            continue
        provable_pairs += 1
        assert phase_check(mlj, both.derivation).ok
        first, second = ns_prove(mlj, _nestings(f)), ns_prove(mlj, _nestings(g))
        assert first.proved or second.proved or first.exhausted or second.exhausted
    assert provable_pairs >= 20
