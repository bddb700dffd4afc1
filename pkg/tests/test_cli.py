import io
import json

import pytest
from rich.console import Console

from cli import EXIT_EXHAUSTED, EXIT_INPUT, EXIT_OK, EXIT_REFUTED, parse_logic, run
from descriptions import LogicKind
from errors import DescriptionError
from models import Calculus, load_proof_document


def invoke(*argv):
    buffer = io.StringIO()
    code = run(list(argv), Console(file=buffer, width=200))
    return code, buffer.getvalue()


def prove_to(path, formula, *extra):
    code, _ = invoke("prove", formula, "--format", "json", "--output", str(path), *extra)
    assert code == EXIT_OK
    return load_proof_document(path.read_text())


def test_parse_logic(tmp_path):
    assert parse_logic("mlj").kind == LogicKind.MLJ
    assert parse_logic("E").kind == LogicKind.E
    assert str(parse_logic("preset:s4")) == "S4"
    assert str(parse_logic("kt")) == "KT"
    desc = tmp_path / "tense.json"
    desc.write_text('{"indices": [1, 2], "order": [[1, 2]]}')
    logic = parse_logic(f"desc:{desc}")
    assert logic.name == "tense"
    assert logic.upset(1) == frozenset({1, 2})
    with pytest.raises(DescriptionError):
        parse_logic("preset:nope")


def test_prove_writes_a_document(tmp_path):
    code, out = invoke("prove", "a & b -> b & a", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["calculus"] == "sc"
    assert doc["endpoint"] == "|- a & b -> b & a"
    assert doc["metadata"]["size"] >= 3

    saved = prove_to(tmp_path / "ns.json", "[1](a -> b) -> [1]a -> [1]b", "--calc", "ns", "--logic", "k")
    assert saved.calculus == Calculus.NS
    assert saved.logic.name == "K"


def test_prove_text_output_shows_the_tree():
    code, out = invoke("prove", "a -> a", "--calc", "lns")
    assert code == EXIT_OK
    assert "impR_b" in out
    assert "lns" in out


def test_labelled_choice_resolves_to_the_frame_calculus(tmp_path):
    doc = prove_to(tmp_path / "gt.json", "[1](a & b) -> [1]a", "--calc", "labelled", "--logic", "m")
    assert doc.calculus == Calculus.GTM


def test_refutation_shows_a_countermodel():
    code, out = invoke("prove", "((a -> b) -> a) -> a")
    assert code == EXIT_REFUTED
    assert "No sc proof" in out
    assert "countermodel at world 0" in out


def test_exhausted_budget():
    code, out = invoke("prove", "[1](a -> b) -> [1]a -> [1]b", "--logic", "k", "--budget", "1")
    assert code == EXIT_EXHAUSTED
    assert "exhausted" in out


@pytest.mark.parametrize("argv", [
    ["prove", "a &"],
    ["prove", "[3]a", "--logic", "k"],
    ["prove", "a", "--logic", "preset:nope"],
    ["prove", "a", "--calc", "tableau"],
    ["check", "/nonexistent/proof.json"],
    [],
])
def test_bad_input(argv):
    code, out = invoke(*argv)
    assert code == EXIT_INPUT
    assert "Error" in out


def test_invalid_description_file(tmp_path):
    desc = tmp_path / "bad.json"
    desc.write_text('{"indices": []}')
    assert invoke("prove", "a -> a", "--logic", f"desc:{desc}")[0] == EXIT_INPUT


def test_help_exits_cleanly(capsys):
    assert run(["--help"], Console(file=io.StringIO())) == EXIT_OK


def test_check_accepts_and_rejects(tmp_path):
    path = tmp_path / "proof.json"
    prove_to(path, "(a -> b) -> (b -> c) -> a -> c", "--calc", "ns")
    assert invoke("check", str(path))[0] == EXIT_OK

    raw = json.loads(path.read_text())
    raw["derivation"]["rule"] = "andR"
    path.write_text(json.dumps(raw))
    code, out = invoke("check", str(path))
    assert code == EXIT_REFUTED
    assert "rejected at root" in out


def test_translation_chain(tmp_path):
    ns = tmp_path / "ns.json"
    prove_to(ns, "(a -> b) -> (b -> c) -> a -> c", "--calc", "ns")
    steps = [
        (ns, "lbns", tmp_path / "lbns.json", Calculus.LBNS),
        (tmp_path / "lbns.json", "labelled", tmp_path / "gt.json", Calculus.GTI),
        (tmp_path / "gt.json", "lbns", tmp_path / "back.json", Calculus.LBNS),
        (ns, "lns", tmp_path / "lns.json", Calculus.LNS),
        (tmp_path / "lns.json", "sc", tmp_path / "sc.json", Calculus.SC),
    ]
    for source, target, output, calculus in steps:
        code, _ = invoke("translate", str(source), "--to", target, "--output", str(output), "--format", "json")
        assert code == EXIT_OK
        doc = load_proof_document(output.read_text())
        assert doc.calculus == calculus
        assert doc.metadata["translated_from"]
        assert invoke("check", str(output))[0] == EXIT_OK
    assert load_proof_document((tmp_path / "back.json").read_text()).endpoint == \
        load_proof_document((tmp_path / "lbns.json").read_text()).endpoint


def test_unsupported_translation(tmp_path):
    sc = tmp_path / "sc.json"
    prove_to(sc, "a -> a")
    assert invoke("translate", str(sc), "--to", "lbns")[0] == EXIT_INPUT


def test_countermodel_command():
    code, out = invoke("countermodel", "((a -> b) -> a) -> a", "--format", "json")
    assert code == EXIT_REFUTED
    found = json.loads(out)
    assert found["world"] == 0
    assert found["mode"] == "int"
    assert "<=" in found["countermodel"]["relations"]

    code, out = invoke("countermodel", "[1](a & b) -> [1]a", "--logic", "m", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out) == {"countermodel": None}


def test_compare_command():
    code, out = invoke("compare", "a -> a", "--format", "json")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["verdict"] == "proved"
    assert report["countermodel_found"] is False
    assert [o["calculus"] for o in report["outcomes"]] == ["sc", "ns", "lns", "lbns", "gti"]

    code, _ = invoke("compare", "a | ~a")
    assert code == EXIT_REFUTED


def test_corpus_command():
    code, out = invoke("corpus", "--seed", "3", "--size", "6", "--depth", "2", "--format", "json")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["total"] == 6
    assert report["seed"] == 3
    assert report["disagreements"] == []


def test_compare_text_lists_the_rule_tables():
    code, out = invoke("compare", "[1](a -> b) -> [1]a -> [1]b", "--logic", "k")
    assert code == EXIT_OK
    assert "verdict: proved" in out
    assert "k_1/1" in out
    assert "boxR_t_1/1" in out


def test_non_normal_refutation_prints_a_neighbourhood_model():
    code, out = invoke("prove", "[](a & b) -> []a", "--logic", "E")
    assert code == EXIT_REFUTED
    assert "neighbourhoods:" in out
