"""
Object-language formulas: types, parser and printer for nestprover
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

from errors import ParseError


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Bottom:
    def __str__(self) -> str:
        return "bot"


@dataclass(frozen=True)
class Conj:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Disj:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Box:
    index: int
    body: "Formula"

    def __str__(self) -> str:
        return render_formula(self)


Formula = Union[Atom, Bottom, Conj, Disj, Imp, Box]

BOTTOM = Bottom()
TOP = Imp(BOTTOM, BOTTOM)


def neg(f: Formula) -> Formula:
    return Imp(f, BOTTOM)


def iff(a: Formula, b: Formula) -> Formula:
    return Conj(Imp(a, b), Imp(b, a))


def conjoin(items: Sequence[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is top"""
    if not items:
        return TOP
    result = items[-1]
    for f in reversed(items[:-1]):
        result = Conj(f, result)
    return result


def disjoin(items: Sequence[Formula]) -> Formula:
    if not items:
        return BOTTOM
    result = items[-1]
    for f in reversed(items[:-1]):
        result = Disj(f, result)
    return result


# --- tokenizer --------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op><->|->|\||&|~|\[|\]|\(|\))|(?P<nat>[0-9]+)|(?P<ident>[a-z][a-zA-Z0-9_]*))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "op", "nat", "ident" or "end"
    value: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            raise ParseError(f"unknown token {text[pos]!r}", pos, text)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), start))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# --- parser -----------------------------------------------------------------

class _Parser:
    """Recursive descent over the token list, one method per grammar level"""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, value: str) -> Token:
        token = self.current
        if token.value != value or token.kind != "op":
            raise ParseError(f"expected {value!r} but found {token.value or 'end of input'!r}",
                             token.position, self.text)
        return self.advance()

    def at_op(self, value: str) -> bool:
        return self.current.kind == "op" and self.current.value == value

    def parse(self) -> Formula:
        result = self.parse_iff()
        if self.current.kind != "end":
            raise ParseError(f"unexpected {self.current.value!r}", self.current.position, self.text)
        return result

    def parse_iff(self) -> Formula:
        left = self.parse_imp()
        if self.at_op("<->"):
            self.advance()
            return iff(left, self.parse_iff())
        return left

    def parse_imp(self) -> Formula:
        left = self.parse_or()
        if self.at_op("->"):
            self.advance()
            return Imp(left, self.parse_imp())
        return left

    def parse_or(self) -> Formula:
        result = self.parse_and()
        while self.at_op("|"):
            self.advance()
            result = Disj(result, self.parse_and())
        return result

    def parse_and(self) -> Formula:
        result = self.parse_unary()
        while self.at_op("&"):
            self.advance()
            result = Conj(result, self.parse_unary())
        return result

    def parse_unary(self) -> Formula:
        if self.at_op("~"):
            self.advance()
            return neg(self.parse_unary())
        if self.at_op("["):
            self.advance()
            index = 1
            if self.current.kind == "nat":
                index = int(self.advance().value)
                if index < 1:
                    raise ParseError("box index must be positive", self.tokens[self.index - 1].position,
                                     self.text)
            self.expect("]")
            return Box(index, self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Formula:
        token = self.current
        if token.kind == "ident":
            self.advance()
            if token.value == "bot":
                return BOTTOM
            if token.value == "top":
                return TOP
            return Atom(token.value)
        if self.at_op("("):
            self.advance()
            inner = self.parse_iff()
            self.expect(")")
            return inner
        raise ParseError(f"expected a formula but found {token.value or 'end of input'!r}",
                         token.position, self.text)


def parse_formula(text: str) -> Formula:
    return _Parser(text).parse()


# --- printer ----------------------------------------------------------------

_IMP, _OR, _AND, _UNARY = 1, 2, 3, 4


def _render(f: Formula, context: int) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Bottom):
        return "bot"
    if isinstance(f, Box):
        return f"[{f.index}]" + _render(f.body, _UNARY)
    if isinstance(f, Imp):
        if f == TOP:
            return "top"
        if isinstance(f.right, Bottom):
            return "~" + _render(f.left, _UNARY)
        text = _render(f.left, _OR) + " -> " + _render(f.right, _IMP)
        level = _IMP
    elif isinstance(f, Disj):
        text = _render(f.left, _OR) + " | " + _render(f.right, _AND)
        level = _OR
    elif isinstance(f, Conj):
        text = _render(f.left, _AND) + " & " + _render(f.right, _UNARY)
        level = _AND
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({text})" if level < context else text


@lru_cache(maxsize=None)
def render_formula(f: Formula) -> str:
    return _render(f, 0)


def formula_key(f: Formula) -> str:
    """Canonical sort key shared by every multiset representation"""
    return render_formula(f)


def sort_formulas(items) -> Tuple[Formula, ...]:
    return tuple(sorted(items, key=formula_key))


# --- structural helpers -----------------------------------------------------

def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (Conj, Disj, Imp)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, Box):
        yield from subformulas(f.body)


def atoms_of(f: Formula) -> FrozenSet[str]:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Atom))


def box_indices(f: Formula) -> FrozenSet[int]:
    return frozenset(g.index for g in subformulas(f) if isinstance(g, Box))


def depth(f: Formula) -> int:
    if isinstance(f, (Atom, Bottom)):
        return 0
    if isinstance(f, Box):
        return 1 + depth(f.body)
    return 1 + max(depth(f.left), depth(f.right))


def box_depth(f: Formula) -> int:
    if isinstance(f, (Atom, Bottom)):
        return 0
    if isinstance(f, Box):
        return 1 + box_depth(f.body)
    return max(box_depth(f.left), box_depth(f.right))


def parse_formula_list(text: str) -> Tuple[Formula, ...]:
    """Comma separated formulas; the empty string is the empty list"""
    if not text.strip():
        return ()
    return tuple(parse_formula(part) for part in text.split(","))


def render_formula_list(items: Sequence[Formula]) -> str:
    return ", ".join(render_formula(f) for f in items)


# --- judgment text helpers --------------------------------------------------

# multi-character operators that contain bracket or turnstile characters
_OPAQUE = ("<->", "->", "<=", "<|", "||-")
_OPEN, _CLOSE = "([<", ")]>"


def top_level_positions(text: str) -> Iterator[int]:
    """Positions of characters outside every bracket pair; operators in _OPAQUE are skipped whole"""
    depth = 0
    i = 0
    while i < len(text):
        opaque = next((op for op in _OPAQUE if text.startswith(op, i)), None)
        if opaque is not None:
            i += len(opaque)
            continue
        ch = text[i]
        if ch in _OPEN:
            depth += 1
        elif ch in _CLOSE:
            depth -= 1
            if depth < 0:
                raise ParseError(f"unbalanced {ch!r}", i, text)
        elif depth == 0:
            yield i
        i += 1
    if depth != 0:
        raise ParseError("unbalanced brackets", len(text), text)


def find_top_level(text: str, token: str) -> Optional[int]:
    for i in top_level_positions(text):
        if text.startswith(token, i):
            return i
    return None


def split_top_level(text: str, separator: str) -> List[str]:
    parts: List[str] = []
    start = 0
    for i in top_level_positions(text):
        if i >= start and text.startswith(separator, i):
            parts.append(text[start:i])
            start = i + len(separator)
    parts.append(text[start:])
    return parts


def find_turnstile(text: str) -> Optional[int]:
    return find_top_level(text, "|-")
