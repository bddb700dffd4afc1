import pytest

from errors import ParseError
from formulas import (BOTTOM, TOP, Atom, Box, Conj, Disj, Imp, atoms_of, box_depth, box_indices, depth,
                      find_turnstile, parse_formula, render_formula, split_top_level)


def test_precedence_and_associativity():
    f = parse_formula("a & b | c -> d -> e")
    assert f == Imp(Disj(Conj(Atom("a"), Atom("b")), Atom("c")), Imp(Atom("d"), Atom("e")))


def test_unary_operators_bind_tightest():
    assert parse_formula("~a & b") == Conj(Imp(Atom("a"), BOTTOM), Atom("b"))
    assert parse_formula("[2]a -> a") == Imp(Box(2, Atom("a")), Atom("a"))
    assert parse_formula("[]a") == Box(1, Atom("a"))


def test_iff_expands_to_two_implications():
    a, b = Atom("a"), Atom("b")
    assert parse_formula("a <-> b") == Conj(Imp(a, b), Imp(b, a))


def test_constants():
    assert parse_formula("bot") == BOTTOM
    assert parse_formula("top") == TOP


@pytest.mark.parametrize("text", [
    "a -> b -> c",
    "(a -> b) -> c",
    "~~a",
    "[1](a | b) & [2]c",
    "a & (b | c)",
    "top -> a",
    "~(a & b)",
])
def test_render_is_canonical(text):
    f = parse_formula(text)
    assert render_formula(f) == text
    assert parse_formula(render_formula(f)) == f


@pytest.mark.parametrize("text", ["a &", "(a", "a b", "[0]a", "A", "a $ b"])
def test_malformed_input(text):
    with pytest.raises(ParseError):
        parse_formula(text)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse_formula("a & $")
    assert info.value.position == 4


def test_measures():
    f = parse_formula("[1](a -> [2]b) | c")
    assert atoms_of(f) == {"a", "b", "c"}
    assert box_indices(f) == {1, 2}
    assert depth(f) == 4
    assert box_depth(f) == 2


def test_top_level_splitting_skips_brackets_and_arrows():
    assert split_top_level("a, [b, c], (d, e)", ",") == ["a", " [b, c]", " (d, e)"]
    text = "x <= y ; x: a -> b |- y: a"
    assert text[find_turnstile(text):].startswith("|- y")
