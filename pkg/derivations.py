"""
Generic derivations, rule tables and the focused search driver shared by every calculus
"""

import sys
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import (Any, Callable, Dict, FrozenSet, Generic, Iterable, Iterator, List, Optional,
                    Sequence, Tuple, TypeVar)

from config import DEFAULT_BUDGET, MAX_SEARCH_DEPTH, SEARCH_RECURSION_LIMIT
from descriptions import LogicSpec
from errors import BudgetExceeded
from formulas import Formula
from logger import logger

J = TypeVar("J")
S = TypeVar("S")


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class Phase(str, Enum):
    AXIOM = "axiom"
    LOCAL = "local"
    NESTING = "nesting"
    LIFT = "lift"


@dataclass(frozen=True)
class Selection:
    """Principal-occurrence descriptor; each rule reads the fields it needs"""

    principal: Optional[Formula] = None
    side: Optional[Side] = None
    partner: Optional[Formula] = None
    at: Tuple[int, ...] = ()
    child: Optional[int] = None
    context: Optional[Tuple[Formula, ...]] = None
    kept: Optional[Tuple[Formula, ...]] = None
    unboxed: Optional[Tuple[Formula, ...]] = None
    labels: Tuple[str, ...] = ()
    # image rules a labelled expansion step stands for, as (rule, selection) pairs
    origin: Tuple[Tuple[str, "Selection"], ...] = ()


@dataclass(frozen=True)
class Derivation(Generic[J]):
    conclusion: J
    rule: str
    selection: Selection = Selection()
    premises: Tuple["Derivation[J]", ...] = ()

    @property
    def height(self) -> int:
        # an axiom has height 0
        return max(depth for depth, _ in self._levels())

    @property
    def size(self) -> int:
        return sum(1 for _ in self._levels())

    def _levels(self) -> Iterator[Tuple[int, "Derivation[J]"]]:
        stack: List[Tuple[int, Derivation[J]]] = [(0, self)]
        while stack:
            depth, node = stack.pop()
            yield depth, node
            stack.extend((depth + 1, p) for p in node.premises)

    def walk(self) -> Iterator[Tuple[Tuple[int, ...], "Derivation[J]"]]:
        """Pre-order traversal yielding each node with its premise path"""
        stack: List[Tuple[Tuple[int, ...], Derivation[J]]] = [((), self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for k in range(len(node.premises) - 1, -1, -1):
                stack.append((path + (k,), node.premises[k]))

    def rule_counts(self) -> Dict[str, int]:
        return dict(Counter(node.rule for _, node in self._levels()))

    def at_path(self, path: Sequence[int]) -> "Derivation[J]":
        node = self
        for k in path:
            node = node.premises[k]
        return node

    def replace_at(self, path: Sequence[int], new: "Derivation[J]") -> "Derivation[J]":
        if not path:
            return new
        k = path[0]
        premises = list(self.premises)
        premises[k] = premises[k].replace_at(path[1:], new)
        return Derivation(self.conclusion, self.rule, self.selection, tuple(premises))


@dataclass(frozen=True)
class Rule:
    name: str
    arity: int
    phase: Phase = Phase.LOCAL
    branching: bool = False
    inter_nested: bool = False
    n_directed: bool = True
    shallow: bool = True
    on_marked: bool = False
    blocked: bool = False
    fresh: bool = False


@dataclass(frozen=True)
class RuleTable:
    calculus: str
    logic: LogicSpec
    rules: Tuple[Rule, ...]

    def __contains__(self, name: str) -> bool:
        return any(r.name == name for r in self.rules)

    def __getitem__(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def __len__(self) -> int:
        return len(self.rules)

    def names(self) -> List[str]:
        return [r.name for r in self.rules]


def rule_parts(name: str) -> Tuple[str, Tuple[int, ...]]:
    """Split 'boxL_2_1' into ('boxL', (2, 1)); non-numeric suffixes stay in the base name"""
    parts = name.split("_")
    base = parts[0]
    indices: List[int] = []
    for part in parts[1:]:
        if part.isdigit():
            indices.append(int(part))
        else:
            base += "_" + part
    return base, tuple(indices)


def indexed(base: str, *indices: int) -> str:
    return "_".join([base] + [str(i) for i in indices])


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    path: Tuple[int, ...] = ()
    reason: str = ""

    @classmethod
    def accept(cls) -> "CheckReport":
        return cls(True)

    @classmethod
    def reject(cls, path: Sequence[int], reason: str) -> "CheckReport":
        return cls(False, tuple(path), reason)


@dataclass(frozen=True)
class SearchResult(Generic[J]):
    derivation: Optional[Derivation[J]]
    exhausted: bool
    nodes: int

    @property
    def proved(self) -> bool:
        return self.derivation is not None

    @property
    def status(self) -> str:
        if self.derivation is not None:
            return "proved"
        return "exhausted" if self.exhausted else "refuted"


class Budget:
    def __init__(self, limit: int = DEFAULT_BUDGET):
        self.limit = limit
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise BudgetExceeded(self.used)


def check_tree(d: Derivation[J], apply: Callable[[Derivation[J]], List[J]]) -> CheckReport:
    """Accept iff each node's premise conclusions equal what its rule produces"""
    for path, node in d.walk():
        try:
            expected = apply(node)
        except Exception as e:  # rule errors become diagnostics
            return CheckReport.reject(path, f"{node.rule}: {e}")
        actual = [p.conclusion for p in node.premises]
        if len(expected) != len(actual):
            return CheckReport.reject(path, f"{node.rule}: expected {len(expected)} premises, got {len(actual)}")
        for k, (want, got) in enumerate(zip(expected, actual)):
            if want != got:
                return CheckReport.reject(path, f"{node.rule}: premise {k + 1} does not match the rule schema")
    return CheckReport.accept()


@dataclass
class Step(Generic[S, J]):
    """One search move: premise states plus a builder that turns premise proofs into a proof"""

    premises: Tuple[S, ...]
    build: Callable[[List[Derivation[J]]], Derivation[J]]


def chain(steps: Sequence[Tuple[J, str, Selection]], premises: Tuple[S, ...]) -> Step:
    """A block of single-premise rule applications whose last rule has the given premises"""

    def build(subs: List[Derivation[J]]) -> Derivation[J]:
        conclusion, rule, selection = steps[-1]
        d = Derivation(conclusion, rule, selection, tuple(subs))
        for conclusion, rule, selection in reversed(steps[:-1]):
            d = Derivation(conclusion, rule, selection, (d,))
        return d

    return Step(premises, build)


def leaf(conclusion: J, rule: str, selection: Selection) -> Step:
    return Step((), lambda subs: Derivation(conclusion, rule, selection, ()))


LoopKey = Tuple[FrozenSet[Formula], FrozenSet[Formula]]


class FocusedSearch(ABC, Generic[S, J]):
    """Backward search shared by all calculi.

    Axioms close eagerly, invertible rules apply without backtracking, and at a
    saturated state the non-invertible moves are tried in order. A saturated
    state whose focus sets are contained in those of a saturated ancestor is
    pruned. Proofs are memoised per state, failures are not. Both the node
    budget and the branch depth are bounded; either limit ends the search as
    exhausted.
    """

    calculus = "abstract"

    def __init__(self, logic: LogicSpec, budget: int = DEFAULT_BUDGET, max_depth: int = MAX_SEARCH_DEPTH):
        self.logic = logic
        self.budget = Budget(budget)
        self.max_depth = max_depth
        self._proved: Dict[Any, Derivation[J]] = {}

    @abstractmethod
    def close(self, state: S) -> Optional[Step]:
        ...

    @abstractmethod
    def invert(self, state: S) -> Optional[Step]:
        ...

    @abstractmethod
    def choices(self, state: S) -> Iterable[Step]:
        ...

    @abstractmethod
    def loop_key(self, state: S) -> Optional[LoopKey]:
        ...

    def subsumed(self, key: LoopKey, seen: LoopKey) -> bool:
        return key[0] <= seen[0] and key[1] <= seen[1]

    def run(self, state: S) -> SearchResult[J]:
        if sys.getrecursionlimit() < SEARCH_RECURSION_LIMIT:
            sys.setrecursionlimit(SEARCH_RECURSION_LIMIT)
        logger.debug("search_started", calculus=self.calculus, logic=str(self.logic))
        try:
            d = self._search(state, (), 0)
        except BudgetExceeded:
            logger.audit("budget_exhausted", subject=self.calculus, nodes=self.budget.used)
            return SearchResult(None, True, self.budget.used)
        logger.debug("search_finished", calculus=self.calculus, nodes=self.budget.used)
        logger.audit("proved" if d is not None else "refuted", subject=self.calculus,
                     logic=str(self.logic), nodes=self.budget.used)
        return SearchResult(d, False, self.budget.used)

    def _search(self, state: S, history: Tuple[Any, ...], depth: int) -> Optional[Derivation[J]]:
        cached = self._proved.get(state)
        if cached is not None:
            return cached
        self.budget.tick()
        if depth > self.max_depth:
            logger.debug("depth_exhausted", calculus=self.calculus, depth=depth)
            raise BudgetExceeded(self.budget.used)

        d: Optional[Derivation[J]] = None
        step = self.close(state)
        if step is not None:
            d = step.build([])
        else:
            step = self.invert(state)
            if step is not None:
                d = self._expand(step, history, depth)
            else:
                key = self.loop_key(state)
                if key is not None:
                    if any(self.subsumed(key, seen) for seen in history):
                        return None
                    history = history + (key,)
                for step in self.choices(state):
                    d = self._expand(step, history, depth)
                    if d is not None:
                        break
        if d is not None:
            self._proved[state] = d
        return d

    def _expand(self, step: Step, history: Tuple[Any, ...], depth: int) -> Optional[Derivation[J]]:
        subs: List[Derivation[J]] = []
        for premise in step.premises:
            sub = self._search(premise, history, depth + 1)
            if sub is None:
                return None
            subs.append(sub)
        return step.build(subs)
