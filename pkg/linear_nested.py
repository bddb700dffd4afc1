"""
Linear nested sequents: end-active blocked search, linearisation of nested proofs and block collapse for nestprover
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Optional, Tuple, Union

from config import DEFAULT_BUDGET
from derivations import (CheckReport, Derivation, FocusedSearch, LoopKey, Phase, Rule, RuleTable,
                         SearchResult, Selection, Side, Step, chain, check_tree, indexed, leaf, rule_parts)
from descriptions import Axiom, LogicKind, LogicSpec
from errors import DescriptionError, ParseError, RuleApplicationError, TranslationError
from formulas import BOTTOM, Box, Formula, Imp, split_top_level
from logger import logger
from nested import NestedSequent, applied_phase, node_at, phase_check
from sequents import (Sequent, check_goal_indices, choice_moves, closing_move, invertible_move,
                      local_premises, ms_add, ms_difference, ms_remove, parse_sequent, render_sequent,
                      weaken)


@dataclass(frozen=True)
class Separator:
    blocked: bool = False
    index: Optional[int] = None


@dataclass(frozen=True)
class MarkedPair:
    left: Sequent
    right: Sequent


Component = Union[Sequent, MarkedPair]


@dataclass(frozen=True)
class LinearNestedSequent:
    components: Tuple[Component, ...]
    separators: Tuple[Separator, ...] = ()

    def __post_init__(self):
        if not self.components:
            raise ParseError("a linear nested sequent needs a component")
        if len(self.separators) != len(self.components) - 1:
            raise ParseError("one separator is needed between each pair of components")

    @classmethod
    def single(cls, s: Sequent) -> "LinearNestedSequent":
        return cls((s,))

    @property
    def last(self) -> Component:
        return self.components[-1]

    @property
    def parent(self) -> Optional[Component]:
        return self.components[-2] if len(self.components) > 1 else None

    @property
    def blocked(self) -> bool:
        return bool(self.separators) and self.separators[-1].blocked

    def with_last(self, component: Component, separator: Optional[Separator] = None) -> "LinearNestedSequent":
        separators = self.separators
        if separator is not None:
            separators = separators[:-1] + (separator,)
        return LinearNestedSequent(self.components[:-1] + (component,), separators)

    def with_tail(self, parent: Component, last: Component, separator: Separator) -> "LinearNestedSequent":
        return LinearNestedSequent(self.components[:-2] + (parent, last), self.separators[:-1] + (separator,))

    def extend(self, component: Component, separator: Separator) -> "LinearNestedSequent":
        return LinearNestedSequent(self.components + (component,), self.separators + (separator,))

    def formulas(self) -> List[Formula]:
        result: List[Formula] = []
        for c in self.components:
            parts = (c,) if isinstance(c, Sequent) else (c.left, c.right)
            for s in parts:
                result.extend(s.formulas())
        return result

    def __str__(self) -> str:
        return render_linear(self)


# --- text syntax ------------------------------------------------------------

_SEPARATOR_HEAD = re.compile(r"^(\*)?(?:\^(\d+))?")


def _render_component(c: Component) -> str:
    if isinstance(c, MarkedPair):
        return f"({render_sequent(c.left)} ; {render_sequent(c.right)})"
    return render_sequent(c)


def render_linear(line: LinearNestedSequent) -> str:
    parts = [_render_component(line.components[0])]
    for sep, c in zip(line.separators, line.components[1:]):
        mark = "//" + ("*" if sep.blocked else "") + (f"^{sep.index}" if sep.index is not None else "")
        parts.append(mark)
        parts.append(_render_component(c))
    return " ".join(parts)


def _parse_component(text: str) -> Component:
    text = text.strip()
    if ";" in text:
        if not (text.startswith("(") and text.endswith(")")):
            raise ParseError("a marked pair is written '(S1 ; S2)'", None, text)
        halves = split_top_level(text[1:-1], ";")
        if len(halves) != 2:
            raise ParseError("a marked pair holds exactly two sequents", None, text)
        return MarkedPair(parse_sequent(halves[0]), parse_sequent(halves[1]))
    return parse_sequent(text)


def parse_linear(text: str) -> LinearNestedSequent:
    pieces = split_top_level(text, "//")
    components = [_parse_component(pieces[0])]
    separators = []
    for piece in pieces[1:]:
        match = _SEPARATOR_HEAD.match(piece)
        index = int(match.group(2)) if match.group(2) else None
        separators.append(Separator(bool(match.group(1)), index))
        components.append(_parse_component(piece[match.end():]))
    return LinearNestedSequent(tuple(components), tuple(separators))


# --- rule tables ------------------------------------------------------------

_LOCAL = ("init", "botL", "andL", "andR", "orL", "orR", "impL")


@lru_cache(maxsize=None)
def lns_rule_table(logic: LogicSpec) -> RuleTable:
    rules: List[Rule] = []
    for name in _LOCAL:
        axiom = name in ("init", "botL")
        arity = 0 if axiom else (2 if name in ("andR", "orL", "impL") else 1)
        rules.append(Rule(name, arity, Phase.AXIOM if axiom else Phase.LOCAL, branching=arity == 2))
    if logic.is_mlj:
        rules += [Rule("impR_b", 1, Phase.NESTING, inter_nested=True, blocked=True),
                  Rule("lift_b", 1, Phase.LIFT, inter_nested=True, blocked=True),
                  Rule("close_b", 1, Phase.LIFT, blocked=True)]
        return RuleTable("lns", logic, tuple(rules))
    rules.append(Rule("impR", 1))
    if logic.is_multimodal:
        indices = logic.description.sorted_indices()
        rules += [Rule(indexed("t", i), 1) for i in indices if logic.has(i, Axiom.T)]
        rules += [Rule(indexed("boxR", i), 1, Phase.NESTING, inter_nested=True, blocked=True) for i in indices]
        for j in indices:
            if logic.has(j, Axiom.D):
                rules += [Rule(indexed("d", i, j), 1, Phase.NESTING, inter_nested=True, blocked=True)
                          for i in sorted(logic.upset(j))]
        for j in indices:
            for i in sorted(logic.upset(j)):
                rules.append(Rule(indexed("boxL", i, j), 1, Phase.LIFT, inter_nested=True, blocked=True))
                if logic.has(i, Axiom.FOUR):
                    rules.append(Rule(indexed("4", i, j), 1, Phase.LIFT, inter_nested=True, blocked=True))
        rules.append(Rule("close", 1, Phase.LIFT, blocked=True))
    else:
        rules.append(Rule("boxR_e", 1, Phase.NESTING, inter_nested=True, blocked=True))
        if logic.kind == LogicKind.M:
            rules.append(Rule("M_l", 1, Phase.LOCAL, on_marked=True, blocked=True))
        rules.append(Rule("boxL_e", 2, Phase.LIFT, branching=True, inter_nested=True, on_marked=True))
    return RuleTable("lns", logic, tuple(rules))


# --- rule application -------------------------------------------------------

def _require(condition: bool, message: str) -> None:
    if not condition:
        raise RuleApplicationError(message)


def lns_apply(logic: LogicSpec, rule: str, goal: LinearNestedSequent, sel: Selection) -> List[LinearNestedSequent]:
    """Premises of an end-active rule; only the last one or two components change"""
    if rule not in lns_rule_table(logic):
        raise RuleApplicationError(f"{rule} is not a rule of LNS for {logic}")
    base, idx = rule_parts(rule)
    p = sel.principal
    last, parent = goal.last, goal.parent

    if base in ("close_b", "close"):
        _require(goal.blocked, f"{rule} needs a blocked separator")
        return [goal.with_last(last, Separator(False, goal.separators[-1].index))]

    if base in ("lift_b", "boxL", "4"):
        _require(goal.blocked and isinstance(parent, Sequent) and isinstance(last, Sequent),
                 f"{rule} acts across a blocked separator")
        _require(p is not None and p in parent.ante, f"{rule} needs a formula of the parent antecedent")
        if base == "lift_b":
            return [goal.with_tail(Sequent(ms_remove(parent.ante, p), parent.succ),
                                   Sequent(ms_add(last.ante, p), last.succ), goal.separators[-1])]
        i, j = idx
        _require(isinstance(p, Box) and p.index == i, f"{rule} needs a box [{i}]")
        _require(goal.separators[-1].index == j, f"{rule} needs a separator of index {j}")
        _require(i in logic.upset(j), f"{i} is not above {j}")
        if base == "4":
            _require(logic.has(i, Axiom.FOUR), f"{rule} needs 4 at index {i}")
        added = p if base == "4" else p.body
        return [goal.with_last(Sequent(ms_add(last.ante, added), last.succ))]

    if base in ("M_l", "boxL_e"):
        _require(goal.blocked and isinstance(last, MarkedPair), f"{rule} needs a blocked marked pair")
        if base == "M_l":
            right = Sequent(ms_add(last.right.ante, BOTTOM), last.right.succ)
            return [goal.with_last(MarkedPair(last.left, right))]
        _require(isinstance(parent, Sequent) and isinstance(p, Box) and p in parent.ante,
                 "boxL_e needs a box in the parent antecedent")
        rest = Sequent(ms_remove(parent.ante, p), parent.succ)
        first = Sequent(ms_add(last.left.ante, p.body), last.left.succ)
        second = Sequent(last.right.ante, ms_add(last.right.succ, p.body))
        return [goal.with_tail(rest, first, Separator()), goal.with_tail(rest, second, Separator())]

    _require(isinstance(last, Sequent), f"{rule} needs a plain last component")
    _require(not goal.blocked, f"{rule} cannot act behind a blocked separator")

    if base == "impR_b":
        _require(isinstance(p, Imp), "impR_b needs an implication")
        return [goal.with_last(Sequent(last.ante, ms_remove(last.succ, p)))
                .extend(Sequent((p.left,), (p.right,)), Separator(True))]
    if base == "boxR" and idx:
        i = idx[0]
        _require(isinstance(p, Box) and p.index == i, f"{rule} needs a box [{i}]")
        return [goal.with_last(Sequent(last.ante, ms_remove(last.succ, p)))
                .extend(Sequent((), (p.body,)), Separator(True, i))]
    if base == "d":
        i, j = idx
        _require(isinstance(p, Box) and p.index == i and p in last.ante, f"{rule} needs [{i}] in the antecedent")
        _require(i in logic.upset(j) and logic.has(j, Axiom.D), f"{rule} needs D at {j} below {i}")
        return [goal.extend(Sequent((p.body,), ()), Separator(True, j))]
    if base == "boxR_e":
        _require(isinstance(p, Box), "boxR_e needs a box in the succedent")
        pair = MarkedPair(Sequent((), (p.body,)), Sequent((p.body,), ()))
        return [goal.with_last(Sequent(last.ante, ms_remove(last.succ, p))).extend(pair, Separator(True))]
    return [goal.with_last(Sequent(a, s)) for a, s in local_premises(logic, rule, sel, last.ante, last.succ)]


def lns_check(logic: LogicSpec, d: Derivation[LinearNestedSequent]) -> CheckReport:
    return check_tree(d, lambda node: lns_apply(logic, node.rule, node.conclusion, node.selection))


# --- search -----------------------------------------------------------------

class LnsSearch(FocusedSearch[LinearNestedSequent, LinearNestedSequent]):
    """End-active search in blocked form: every block is a nesting rule, its lifts and a close"""

    calculus = "lns"

    def _step(self, state: LinearNestedSequent, rule: str, sel: Selection) -> Step:
        premises = lns_apply(self.logic, rule, state, sel)
        return Step(tuple(premises), lambda subs: Derivation(state, rule, sel, tuple(subs)))

    def close(self, state: LinearNestedSequent) -> Optional[Step]:
        last = state.last
        if not isinstance(last, Sequent):
            return None
        move = closing_move(self.logic, last.ante, last.succ)
        return leaf(state, *move) if move else None

    def invert(self, state: LinearNestedSequent) -> Optional[Step]:
        last = state.last
        if not isinstance(last, Sequent):
            return None
        move = invertible_move(self.logic, last.ante, last.succ)
        return self._step(state, *move) if move else None

    def loop_key(self, state: LinearNestedSequent) -> Optional[LoopKey]:
        last = state.last
        if not isinstance(last, Sequent):
            return None
        return frozenset(last.ante), frozenset(last.succ)

    def choices(self, state: LinearNestedSequent) -> Iterable[Step]:
        last = state.last
        if not isinstance(last, Sequent):
            return
        for rule, sel in choice_moves(self.logic, last.ante, last.succ):
            yield self._block(state, rule, sel)

    def _apply(self, steps: list, current: LinearNestedSequent, rule: str, sel: Selection) -> LinearNestedSequent:
        steps.append((current, rule, sel))
        return lns_apply(self.logic, rule, current, sel)[0]

    def _marked_block(self, current: LinearNestedSequent, steps: list, principal: Formula) -> Step:
        if self.logic.kind == LogicKind.M:
            current = self._apply(steps, current, "M_l", Selection())
        sel = Selection(principal, Side.LEFT)
        steps.append((current, "boxL_e", sel))
        return chain(steps, tuple(lns_apply(self.logic, "boxL_e", current, sel)))

    def _block(self, state: LinearNestedSequent, rule: str, sel: Selection) -> Step:
        steps: list = []
        base, idx = rule_parts(rule)
        ante = state.last.ante
        if base == "impR":
            current = self._apply(steps, state, "impR_b", Selection(sel.principal, Side.RIGHT))
            for f in ante:
                current = self._apply(steps, current, "lift_b", Selection(f, Side.LEFT))
            closing = "close_b"
        elif base in ("k", "d"):
            j = idx[0]
            if base == "k":
                current = self._apply(steps, state, indexed("boxR", j), Selection(sel.principal, Side.RIGHT))
                skip = None
            else:
                skip = sel.unboxed[0]
                current = self._apply(steps, state, indexed("d", skip.index, j), Selection(skip, Side.LEFT))
            for f in ante:
                if not isinstance(f, Box) or f.index not in self.logic.upset(j):
                    continue
                if f == skip:
                    skip = None
                else:
                    current = self._apply(steps, current, indexed("boxL", f.index, j), Selection(f, Side.LEFT))
                if self.logic.has(f.index, Axiom.FOUR):
                    current = self._apply(steps, current, indexed("4", f.index, j), Selection(f, Side.LEFT))
            closing = "close"
        else:
            current = self._apply(steps, state, "boxR_e", Selection(sel.partner, Side.RIGHT))
            return self._marked_block(current, steps, sel.principal)
        steps.append((current, closing, Selection()))
        return chain(steps, tuple(lns_apply(self.logic, closing, current, Selection())))


def check_linear_goal(logic: LogicSpec, goal: LinearNestedSequent) -> None:
    check_goal_indices(logic, goal.formulas())
    problems = []
    if any(sep.blocked for sep in goal.separators):
        problems.append("goals cannot contain a blocked separator")
    if any(isinstance(c, MarkedPair) for c in goal.components):
        problems.append("goals cannot contain a marked pair")
    if not logic.is_multimodal and any(sep.index is not None for sep in goal.separators):
        problems.append(f"separators carry no index in {logic}")
    if problems:
        raise DescriptionError(problems)


def lns_prove(logic: LogicSpec, goal: LinearNestedSequent,
              budget: int = DEFAULT_BUDGET) -> SearchResult[LinearNestedSequent]:
    check_linear_goal(logic, goal)
    return LnsSearch(logic, budget).run(goal)


# --- nested to linear -------------------------------------------------------

_NESTING_TO_LINEAR = {"impR": "impR_b", "lift": "lift_b", "M_n": "M_l"}


def _linear_rule(logic: LogicSpec, ns_rule: str) -> str:
    if logic.is_mlj:
        return _NESTING_TO_LINEAR.get(ns_rule, ns_rule)
    return "M_l" if ns_rule == "M_n" else ns_rule


def linearise(logic: LogicSpec, d: Derivation[NestedSequent]) -> Derivation[LinearNestedSequent]:
    """Follow the active path of a normal nested proof; each nested node gets exactly one counterpart"""
    report = phase_check(logic, d)
    if not report.ok:
        raise TranslationError(f"proof is not in normal form: {report.reason}")
    if d.conclusion.children:
        raise TranslationError("linearisation starts from a nested sequent without nestings")
    closing = "close_b" if logic.is_mlj else "close"
    root = LinearNestedSequent.single(d.conclusion.local())

    def walk(node: Derivation[NestedSequent], line: LinearNestedSequent, active: Tuple[int, ...]):
        phase = applied_phase(logic, node)
        at = tuple(node.selection.at)
        lifting = phase == Phase.LIFT
        if line.blocked and not lifting and not isinstance(line.last, MarkedPair):
            closed = lns_apply(logic, closing, line, Selection())[0]
            return Derivation(line, closing, Selection(), (walk(node, closed, active),))
        expected = active[:-1] if lifting else active
        if at != expected:
            raise TranslationError(f"{node.rule} at {'.'.join(map(str, at)) or 'root'} leaves the active path")
        if lifting and at + (node.selection.child,) != active:
            raise TranslationError(f"{node.rule} lifts into nesting {node.selection.child}, not the active one")
        rule = _linear_rule(logic, node.rule)
        sel = Selection(node.selection.principal, node.selection.side, node.selection.partner)
        try:
            premises = lns_apply(logic, rule, line, sel)
        except RuleApplicationError as e:
            raise TranslationError(f"{node.rule} has no linear counterpart here: {e}")
        if len(premises) != len(node.premises):
            raise TranslationError(f"{node.rule} changes arity under linearisation")
        if phase == Phase.NESTING:
            active = at + (len(node_at(node.premises[0].conclusion, at).children),)
        subs = tuple(walk(sub, line_k, active) for sub, line_k in zip(node.premises, premises))
        return Derivation(line, rule, sel, subs)

    return walk(d, root, ())


# --- blocks to sequent macro-rules ------------------------------------------

_BLOCK_OPENERS = ("impR_b", "boxR", "d", "boxR_e")


def collapse_blocks(logic: LogicSpec, d: Derivation[LinearNestedSequent]) -> Derivation[Sequent]:
    """Replace each maximal block by one sequent rule; the sequent read off a line is its last component"""

    def conclusion_of(line: LinearNestedSequent) -> Sequent:
        if not isinstance(line.last, Sequent):
            raise TranslationError("a marked pair has no sequent reading")
        return line.last

    def collapse(node: Derivation[LinearNestedSequent]) -> Derivation[Sequent]:
        base, idx = rule_parts(node.rule)
        conclusion = conclusion_of(node.conclusion)
        if base not in _BLOCK_OPENERS:
            if node.conclusion.blocked:
                raise TranslationError(f"{node.rule} outside a block acts behind a blocked separator")
            sel = Selection(node.selection.principal, node.selection.side)
            return Derivation(conclusion, node.rule, sel, tuple(collapse(p) for p in node.premises))

        opener = node
        lifted: List[Formula] = []
        boxed: List[Formula] = []
        current = node.premises[0] if node.premises else None
        while current is not None and rule_parts(current.rule)[0] in ("lift_b", "boxL", "4", "M_l"):
            kind = rule_parts(current.rule)[0]
            if kind in ("lift_b", "boxL"):
                lifted.append(current.selection.principal)
            elif kind == "4":
                boxed.append(current.selection.principal)
            current = current.premises[0]
        if current is None:
            raise TranslationError(f"block opened by {node.rule} is empty")

        if base == "boxR_e":
            if current.rule != "boxL_e":
                raise TranslationError("a marked pair must be consumed by boxL_e")
            sel = Selection(current.selection.principal, Side.LEFT, partner=opener.selection.principal)
            if logic.kind == LogicKind.E:
                return Derivation(conclusion, "E", sel, tuple(collapse(p) for p in current.premises))
            return Derivation(conclusion, "M", sel, (collapse(current.premises[0]),))

        if current.rule not in ("close_b", "close"):
            raise TranslationError(f"block opened by {node.rule} is not closed before {current.rule}")
        premise = collapse(current.premises[0])
        if base == "impR_b":
            missing = ms_difference(conclusion.ante, tuple(lifted))
            if missing:
                premise = weaken(logic, premise, missing)
            sel = Selection(opener.selection.principal, Side.RIGHT, context=conclusion.ante)
            return Derivation(conclusion, "impR", sel, (premise,))
        if base == "boxR":
            sel = Selection(opener.selection.principal, Side.RIGHT, kept=tuple(boxed), unboxed=tuple(lifted))
            return Derivation(conclusion, indexed("k", idx[0]), sel, (premise,))
        sel = Selection(kept=tuple(boxed), unboxed=(opener.selection.principal,) + tuple(lifted))
        return Derivation(conclusion, indexed("d", idx[1]), sel, (premise,))

    result = collapse(d)
    logger.debug("blocks_collapsed", logic=str(logic), lns_nodes=d.size, sc_nodes=result.size)
    return result
