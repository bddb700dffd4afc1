import pytest

from derivations import Derivation, Selection, Side
from descriptions import LogicSpec
from errors import ParseError, RuleApplicationError, TranslationError
from formulas import Atom, parse_formula
from labelled import (Covers, ForcesAll, InSet, LabelledFormula, LabelledSequent, LabelledSystem, Leq, Nbr, NbrOf,
                      NbrPair, Rel, RelIdx, fresh_label, labelled_to_lbns, lb_apply, lb_check, lb_prove,
                      lbns_check, lbns_conditions, lbns_to_labelled, parse_labelled, parse_term, render_labelled,
                      render_term, system_for, tl_map, tl_translate, tl_unmap)
from nested import NestedSequent, ns_prove, parse_nested

LOGICS = {
    "mlj": LogicSpec.intuitionistic,
    "e": LogicSpec.non_normal_e,
    "m": LogicSpec.non_normal_m,
}


def logic_named(key):
    return LOGICS[key]() if key in LOGICS else LogicSpec.preset(key)


@pytest.mark.parametrize("text, term", [
    ("x R y", Rel("x", "y")),
    ("x <= y", Leq("x", "y")),
    ("x R_2 x.1", RelIdx(2, "x", "x.1")),
    ("x N y", Nbr("x", "y")),
    ("x N (x.1.1, x.1.2)", NbrPair("x", "x.1.1", "x.1.2")),
    ("x in a1", InSet("x", "a1")),
    ("a1 in N(x)", NbrOf("a1", "x")),
    ("a1 ||- b & c", ForcesAll("a1", parse_formula("b & c"))),
    ("b -> c <| a1", Covers(parse_formula("b -> c"), "a1")),
])
def test_relational_atoms(text, term):
    assert parse_term(text) == term
    assert render_term(term) == text


def test_labelled_text_round_trip():
    text = "x R x.1 ; x: a, x.1: b |- x.1: c"
    ls = parse_labelled(text)
    assert render_labelled(ls) == text
    assert ls.labels() == ["x", "x.1"]
    assert ls.at("x.1") == ((Atom("b"),), (Atom("c"),))

    with_atoms = parse_labelled("a1 in N(x) ; x: [1]b |- x: c, y in a1")
    assert with_atoms.right_atoms == (InSet("y", "a1"),)
    assert with_atoms.names() == {"x", "y", "a1"}
    assert parse_labelled(render_labelled(with_atoms)) == with_atoms


@pytest.mark.parametrize("text", ["x Q y ; |- x: a", "x: a", "|- x: a, x R y"])
def test_malformed_labelled_sequents(text):
    with pytest.raises(ParseError):
        parse_labelled(text)


def test_fresh_label():
    assert fresh_label("y", ["x"]) == "y"
    assert fresh_label("y", ["x", "y", "y'"]) == "y''"


def test_tree_mapping_round_trip(mlj):
    ns = parse_nested("a |- b, [c |- d, [|- e]]")
    ls = tl_map("x", ns, mlj)
    assert ls == parse_labelled("x R x.1, x.1 R x.1.1 ; x: a, x.1: c |- x: b, x.1: d, x.1.1: e")
    back, root, names = tl_unmap(ls, mlj)
    assert back == ns
    assert root == "x"
    assert names == {(): "x", (1,): "x.1", (1, 1): "x.1.1"}


def test_indexed_and_marked_nestings(k, logic_e):
    assert tl_map("x", parse_nested("|- [|- a]^2"), k) == parse_labelled("x R_2 x.1 ; |- x.1: a")
    ns = parse_nested("[1]a |- < |- b ; b |- >")
    ls = tl_map("x", ns, logic_e)
    assert ls == parse_labelled("x N (x.1.1, x.1.2) ; x: [1]a, x.1.2: b |- x.1.1: b")
    assert tl_unmap(ls, logic_e)[0] == ns


@pytest.mark.parametrize("text, problem", [
    ("x R y, z R y ; |- x: a", "two parents"),
    ("x R y, y R x ; |- x: a", "root"),
    ("x <= y ; |- x: a", "no nested counterpart"),
])
def test_sequents_that_are_not_treelike(text, problem):
    ls = parse_labelled(text)
    assert any(problem in v for v in lbns_conditions(ls))
    with pytest.raises(TranslationError):
        tl_unmap(ls)


@pytest.mark.parametrize("key, text", [
    ("mlj", "a -> b -> a"),
    ("mlj", "(a -> b) -> (b -> c) -> a -> c"),
    ("k", "[1](a -> b) -> [1]a -> [1]b"),
    ("s4", "[1]a -> [1][1]a"),
    ("e", "[1](a & b) -> [1](b & a)"),
    ("m", "[1](a & b) -> [1]a"),
])
def test_image_translation_preserves_size(key, text):
    logic = logic_named(key)
    f = parse_formula(text)
    nested = ns_prove(logic, NestedSequent.goal(f)).derivation
    image = tl_translate(logic, nested)
    assert image.conclusion == LabelledSequent.goal(f)
    assert image.size == nested.size
    assert all(node.rule.startswith("TL(") for _, node in image.walk())
    assert lbns_check(logic, image).ok
    assert lb_check(LabelledSystem.LBNS, logic, image).ok


@pytest.mark.parametrize("key, text", [
    ("mlj", "a -> a"),
    ("mlj", "a -> b -> a"),
    ("mlj", "(a -> b) -> (b -> c) -> a -> c"),
    ("mlj", "a & b -> b & a"),
    ("k", "[1](a -> b) -> [1]a -> [1]b"),
    ("kt", "[1]a -> a"),
    ("kd", "[1]a -> ~[1]~a"),
    ("s4", "[1]a -> [1][1]a"),
    ("bimodal", "[2](a & b) -> [1]a"),
    ("e", "[1](a & b) -> [1](b & a)"),
    ("m", "[1](a & b) -> [1]a"),
])
def test_frame_calculus_proofs_check_and_restrict(key, text):
    logic = logic_named(key)
    system = system_for(logic)
    goal = LabelledSequent.goal(parse_formula(text))
    result = lb_prove(system, logic, goal)
    assert result.proved
    d = result.derivation
    assert d.conclusion == goal
    assert lb_check(system, logic, d).ok
    assert not any(node.rule.startswith("TL(") for _, node in d.walk())

    restricted = labelled_to_lbns(logic, d)
    assert lbns_check(logic, restricted).ok
    assert restricted.conclusion == goal


@pytest.mark.parametrize("key, text", [
    ("mlj", "(a -> b) -> (b -> c) -> a -> c"),
    ("k", "[1](a -> b) -> [1]a -> [1]b"),
    ("s4", "[1]a -> [1][1]a"),
    ("e", "[1](a & b) -> [1](b & a)"),
    ("m", "[1](a & b) -> [1]a"),
])
def test_image_proofs_expand_and_restrict_back(key, text):
    logic = logic_named(key)
    image = lb_prove(LabelledSystem.LBNS, logic, LabelledSequent.goal(parse_formula(text))).derivation
    expanded = lbns_to_labelled(logic, image)
    assert lb_check(system_for(logic), logic, expanded).ok
    assert expanded.conclusion == image.conclusion
    assert labelled_to_lbns(logic, expanded).rule_counts() == image.rule_counts()


def test_frame_rules_carry_the_relational_work(s4, bimodal, logic_e):
    s4_proof = lb_prove(LabelledSystem.GTMM, s4, LabelledSequent.goal(parse_formula("[1]a -> [1][1]a"))).derivation
    assert {"Ref_1", "Trans_1", "boxR_t_1", "boxL_t_1"} <= set(s4_proof.rule_counts())
    bi = lb_prove(LabelledSystem.GTMM, bimodal, LabelledSequent.goal(parse_formula("[2]a -> [1]a"))).derivation
    assert "Int_1_2" in bi.rule_counts()
    e_proof = lb_prove(LabelledSystem.GTE, logic_e,
                       LabelledSequent.goal(parse_formula("[1](a & b) -> [1](b & a)"))).derivation
    assert {"boxL_et", "boxR_et", "forces", "covers", "init_in"} <= set(e_proof.rule_counts())


def test_goal_with_an_order_atom(mlj):
    goal = parse_labelled("x <= x.1 ; x: a |- x.1: a")
    d = lb_prove(LabelledSystem.GTI, mlj, goal).derivation
    assert d.rule_counts() == {"init_t": 1}
    assert d.selection.labels == ("x", "x.1")


def test_unsupported_goals(mlj, logic_e, k):
    with pytest.raises(TranslationError):
        lb_prove(LabelledSystem.GTE, logic_e, parse_labelled("x N y ; |- y: [1]a"))
    with pytest.raises(TranslationError):
        lb_prove(LabelledSystem.GTI, mlj, parse_labelled("x R_1 y ; |- y: a"))
    with pytest.raises(RuleApplicationError):
        lb_prove(LabelledSystem.GTI, k, LabelledSequent.goal(parse_formula("[1]a -> [1]a")))


def test_init_needs_an_order_atom(mlj):
    a = Atom("a")
    with pytest.raises(RuleApplicationError, match="x <= y"):
        lb_apply(LabelledSystem.GTI, mlj, "init_t", parse_labelled("x: a |- y: a"), Selection(a, labels=("x", "y")))
    assert lb_apply(LabelledSystem.GTI, mlj, "init_t", parse_labelled("x <= y ; x: a |- y: a"),
                    Selection(a, labels=("x", "y"))) == []


def test_checker_enforces_freshness(mlj):
    f = parse_formula("a -> a")
    stale = parse_labelled("x <= y ; |- x: a -> a")
    with pytest.raises(RuleApplicationError, match="not fresh"):
        lb_apply(LabelledSystem.GTI, mlj, "impR_t", stale, Selection(f, Side.RIGHT, labels=("x", "y")))
    premise = stale.remove_right(LabelledFormula("x", f)).extend(
        [Leq("x", "y")], [LabelledFormula("y", Atom("a"))], [LabelledFormula("y", Atom("a"))])
    leaf = Derivation(premise, "init_t", Selection(Atom("a"), labels=("y", "y")))
    d = Derivation(stale, "impR_t", Selection(f, Side.RIGHT, labels=("x", "y")), (leaf,))
    report = lb_check(LabelledSystem.GTI, mlj, d)
    assert not report.ok
    assert report.path == ()


def test_restriction_needs_recorded_image_steps(mlj):
    d = Derivation(parse_labelled("x <= x ; x: a |- x: a"), "init_t", Selection(Atom("a"), labels=("x", "x")))
    assert lb_check(LabelledSystem.GTI, mlj, d).ok
    with pytest.raises(TranslationError, match="does not record"):
        labelled_to_lbns(mlj, d)


@pytest.mark.parametrize("system, key, text, provable", [
    (LabelledSystem.GTI, "mlj", "x <= y, x <= z, y <= z ; y: a |- z: a", True),
    (LabelledSystem.GTI, "mlj", "x: a |- y: a", False),
    (LabelledSystem.GTI, "mlj", "x <= y, y <= z ; x: a -> b, z: a |- z: b", True),
    (LabelledSystem.GTMM, "s4", "x R_1 y, y R_1 z ; x: [1]a |- z: a", True),
    (LabelledSystem.GTMM, "k", "x R_1 y, y R_1 z ; x: [1]a |- z: a", False),
    (LabelledSystem.GTMM, "k", "x R_1 y, z R_1 y ; z: [1]a |- y: a", True),
])
def test_goals_that_are_not_trees(system, key, text, provable):
    logic = logic_named(key)
    goal = parse_labelled(text)
    result = lb_prove(system, logic, goal)
    assert not result.exhausted
    assert result.proved is provable
    if provable:
        assert result.derivation.conclusion == goal
        assert lb_check(system, logic, result.derivation).ok


def test_seriality_reuses_an_existing_successor(kd):
    goal = parse_labelled("x R_1 x.1 ; x: [1]bot |- x: bot")
    d = lb_prove(LabelledSystem.GTMM, kd, goal).derivation
    assert lb_check(LabelledSystem.GTMM, kd, d).ok
    assert "Ser_1" not in d.rule_counts()
    fresh = lb_prove(LabelledSystem.GTMM, kd, parse_labelled("x: [1]bot |- x: bot")).derivation
    assert fresh.rule_counts()["Ser_1"] == 1


def test_frame_calculus_proof_shapes(mlj, kd, logic_m):
    gti = lb_prove(LabelledSystem.GTI, mlj, LabelledSequent.goal(parse_formula("a -> b -> a"))).derivation
    assert gti.rule_counts() == {"impR_t": 2, "init_t": 1}
    gtmm = lb_prove(LabelledSystem.GTMM, kd, parse_labelled("x: [1]bot |- x: bot")).derivation
    assert [node.rule for _, node in gtmm.walk()] == ["Ser_1", "boxL_t_1", "botL_t"]
    gtm = lb_prove(LabelledSystem.GTM, logic_m, parse_labelled("x: [1](a & b) |- x: [1]a")).derivation
    assert {"boxL_mt", "boxR_mt", "forces"} <= set(gtm.rule_counts())
    assert lb_check(LabelledSystem.GTM, logic_m, gtm).ok
