import pytest

from corpus import generate_corpus
from descriptions import LogicSpec
from errors import ModelError
from formulas import parse_formula
from semantics import (ORDER, KripkeModel, Mode, NeighbourhoodModel, check_frame, countermodel, enumerate_models,
                       evaluate, kripke_frames, mode_for, model_to_dict, neighbourhood_frames, render_model,
                       truth_set)


def order_model(pairs, valuation):
    return KripkeModel(len(valuation), ((ORDER, frozenset(pairs)),), tuple(frozenset(v) for v in valuation))


PEIRCE_MODEL = order_model({(0, 0), (1, 1), (0, 1)}, [set(), {"a"}])


def test_intuitionistic_evaluation():
    peirce = parse_formula("((a -> b) -> a) -> a")
    assert not evaluate(PEIRCE_MODEL, 0, peirce, Mode.INT)
    assert evaluate(PEIRCE_MODEL, 1, peirce, Mode.INT)
    assert truth_set(PEIRCE_MODEL, parse_formula("a -> b"), Mode.INT) == 0
    assert not evaluate(PEIRCE_MODEL, 0, parse_formula("a | ~a"), Mode.INT)
    assert evaluate(PEIRCE_MODEL, 0, parse_formula("~~(a | ~a)"), Mode.INT)


def test_multimodal_evaluation():
    model = KripkeModel(2, ((1, frozenset({(0, 1)})),), (frozenset(), frozenset({"a"})))
    assert evaluate(model, 0, parse_formula("[1]a"), Mode.MULTI)
    assert evaluate(model, 1, parse_formula("[1]bot"), Mode.MULTI)
    assert not evaluate(model, 0, parse_formula("[1]a -> a"), Mode.MULTI)
    assert evaluate(model, 0, parse_formula("[2]bot"), Mode.MULTI)


def test_neighbourhood_evaluation():
    model = NeighbourhoodModel(2, (frozenset({0b10}), frozenset()), (frozenset({"a"}), frozenset({"a", "b"})))
    boxed = parse_formula("[1]b")
    assert evaluate(model, 0, boxed, Mode.NBR_E)
    assert not evaluate(model, 0, parse_formula("[1]a"), Mode.NBR_E)
    assert evaluate(model, 0, parse_formula("[1]a"), Mode.NBR_M)
    assert not evaluate(model, 1, boxed, Mode.NBR_M)


def test_evaluation_errors():
    with pytest.raises(ModelError):
        truth_set(PEIRCE_MODEL, parse_formula("a"), Mode.NBR_E)
    with pytest.raises(ModelError):
        truth_set(PEIRCE_MODEL, parse_formula("[1]a"), Mode.INT)
    with pytest.raises(ModelError):
        evaluate(PEIRCE_MODEL, 2, parse_formula("a"), Mode.INT)


def test_mode_for(mlj, k, logic_e, logic_m):
    assert [mode_for(g) for g in (mlj, k, logic_e, logic_m)] == [Mode.INT, Mode.MULTI, Mode.NBR_E, Mode.NBR_M]


def test_frame_checks(mlj, kd, kt, logic_e, logic_m):
    assert check_frame(PEIRCE_MODEL, mlj).ok

    not_persistent = order_model({(0, 0), (1, 1), (0, 1)}, [{"a"}, set()])
    report = check_frame(not_persistent, mlj)
    assert report.violations == ("persistence fails for a at 0 <= 1",)

    not_reflexive = order_model({(0, 1), (1, 1)}, [set(), set()])
    assert "reflexivity fails at world 0" in check_frame(not_reflexive, mlj).violations

    empty = KripkeModel(1, ((1, frozenset()),), (frozenset(),))
    assert "seriality of R_1 fails at world 0" in check_frame(empty, kd).violations
    assert "reflexivity of R_1 fails at world 0" in check_frame(empty, kt).violations

    unsupplemented = NeighbourhoodModel(2, (frozenset({0b01}), frozenset()), (frozenset(), frozenset()))
    assert check_frame(unsupplemented, logic_e).ok
    report = check_frame(unsupplemented, logic_m)
    assert not report.ok
    assert report.violations[0].startswith("supplementation fails at world 0")
    assert not check_frame(PEIRCE_MODEL, logic_e).ok


def test_enumerated_models_respect_the_frame(mlj, s4, bimodal, logic_m):
    for logic in (mlj, s4, bimodal):
        for frame in kripke_frames(logic, 2):
            assert check_frame(KripkeModel(2, frame, (frozenset(), frozenset())), logic).ok
    for model in enumerate_models(mlj, ["a"], 2):
        assert check_frame(model, mlj).ok
    assert all(check_frame(NeighbourhoodModel(2, frame, (frozenset(), frozenset())), logic_m).ok
               for frame in neighbourhood_frames(logic_m, 2))


@pytest.mark.parametrize("key, text", [
    ("mlj", "((a -> b) -> a) -> a"),
    ("mlj", "a | ~a"),
    ("kt", "[1]a -> [1][1]a"),
    ("k4", "[1]a -> a"),
    ("k", "[1]a -> ~[1]~a"),
    ("bimodal", "[1]a -> [2]a"),
    ("e", "[1](a & b) -> [1]a"),
    ("e", "[1](a -> b) -> [1]a -> [1]b"),
    ("m", "[1](a -> b) -> [1]a -> [1]b"),
])
def test_countermodels(key, text):
    logic = {"mlj": LogicSpec.intuitionistic, "e": LogicSpec.non_normal_e,
             "m": LogicSpec.non_normal_m}.get(key, lambda: LogicSpec.preset(key))()
    f = parse_formula(text)
    found = countermodel(logic, f)
    assert found is not None
    assert found.world == 0
    assert found.mode == mode_for(logic)
    assert check_frame(found.model, logic).ok
    assert not evaluate(found.model, 0, f, found.mode)


@pytest.mark.parametrize("key, text", [
    ("mlj", "(a -> b) -> (b -> c) -> a -> c"),
    ("s4", "[1]a -> [1][1]a"),
    ("m", "[1](a & b) -> [1]a"),
])
def test_theorems_have_no_countermodel(key, text):
    logic = {"mlj": LogicSpec.intuitionistic, "m": LogicSpec.non_normal_m}.get(key, lambda: LogicSpec.preset(key))()
    assert countermodel(logic, parse_formula(text), kripke_worlds=2) is None


def test_countermodel_bounds_must_be_positive(mlj):
    with pytest.raises(ModelError):
        countermodel(mlj, parse_formula("a"), kripke_worlds=0)


def test_monotone_and_plain_readings_agree_on_supplemented_models(logic_m):
    formulas = generate_corpus(logic_m, seed=11, size=20, depth=3, atoms=2)
    for frame in neighbourhood_frames(logic_m, 2):
        for a in range(4):
            for b in range(4):
                valuation = tuple(frozenset(name for name, mask in (("a", a), ("b", b)) if mask >> w & 1)
                                  for w in range(2))
                model = NeighbourhoodModel(2, frame, valuation)
                for f in formulas:
                    assert truth_set(model, f, Mode.NBR_E) == truth_set(model, f, Mode.NBR_M)


def test_render_and_dict_forms():
    assert render_model(PEIRCE_MODEL) == "\n".join([
        "worlds: 0 1",
        "relations:",
        "  <=: 0 0",
        "  <=: 0 1",
        "  <=: 1 1",
        "valuation:",
        "  0:",
        "  1: a",
    ])
    assert model_to_dict(PEIRCE_MODEL) == {
        "worlds": 2,
        "valuation": {"0": [], "1": ["a"]},
        "relations": {"<=": [[0, 0], [0, 1], [1, 1]]},
    }
    nbr = NeighbourhoodModel(2, (frozenset({0b01}), frozenset()), (frozenset({"a"}), frozenset()))
    assert model_to_dict(nbr)["neighbourhoods"] == {"0": [[0]], "1": []}
    assert "  0: {0}" in render_model(nbr).splitlines()
