"""
Nested sequents: positions, holed contexts, rule tables, normal-form search and checking for nestprover
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from config import DEFAULT_BUDGET
from derivations import (CheckReport, Derivation, FocusedSearch, LoopKey, Phase, Rule, RuleTable,
                         SearchResult, Selection, Side, Step, chain, check_tree, indexed, leaf, rule_parts)
from descriptions import Axiom, LogicKind, LogicSpec
from errors import DescriptionError, ParseError, RuleApplicationError
from formulas import (BOTTOM, Box, Formula, Imp, parse_formula, render_formula_list, sort_formulas,
                      split_top_level, find_turnstile)
from sequents import (Multiset, Sequent, check_goal_indices, choice_moves, closing_move, invertible_move,
                      local_premises, ms_add, ms_remove, parse_sequent, render_sequent)

Position = Tuple[int, ...]


@dataclass(frozen=True)
class NestedSequent:
    ante: Multiset = ()
    succ: Multiset = ()
    children: Tuple["Child", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ante", sort_formulas(self.ante))
        object.__setattr__(self, "succ", sort_formulas(self.succ))

    @classmethod
    def goal(cls, f: Formula) -> "NestedSequent":
        return cls((), (f,))

    @classmethod
    def from_sequent(cls, s: Sequent) -> "NestedSequent":
        return cls(s.ante, s.succ)

    def local(self) -> Sequent:
        return Sequent(self.ante, self.succ)

    def is_empty(self) -> bool:
        return not self.ante and not self.succ and not self.children

    def formulas(self) -> List[Formula]:
        result = list(self.ante + self.succ)
        for child in self.children:
            if isinstance(child, PlainChild):
                result.extend(child.body.formulas())
            else:
                result.extend(child.left.formulas() + child.right.formulas())
        return result

    def node_count(self) -> int:
        return 1 + sum(c.body.node_count() if isinstance(c, PlainChild) else 1 for c in self.children)

    def __str__(self) -> str:
        return render_nested(self)


@dataclass(frozen=True)
class PlainChild:
    index: Optional[int]
    body: NestedSequent


@dataclass(frozen=True)
class MarkedChild:
    """The binary nesting of a partly processed non-normal modal rule; it has no children of its own"""

    left: Sequent
    right: Sequent


Child = Union[PlainChild, MarkedChild]


# --- positions and holed contexts -------------------------------------------

def position_order(p: Sequence[int], q: Sequence[int]) -> str:
    p, q = tuple(p), tuple(q)
    if p == q:
        return "="
    if q[:len(p)] == p:
        return "≤"
    if p[:len(q)] == q:
        return "≥"
    return "∥"


def render_position(p: Sequence[int]) -> str:
    return ".".join(str(k) for k in p) or "ε"


def child_at(ns: NestedSequent, pos: Sequence[int]) -> Child:
    if not pos:
        raise RuleApplicationError("the root is not a child")
    node = node_at(ns, pos[:-1])
    k = pos[-1]
    if not 1 <= k <= len(node.children):
        raise RuleApplicationError(f"no child at {render_position(pos)}")
    return node.children[k - 1]


def node_at(ns: NestedSequent, pos: Sequence[int]) -> NestedSequent:
    node = ns
    for depth, k in enumerate(pos):
        if not 1 <= k <= len(node.children):
            raise RuleApplicationError(f"no node at {render_position(pos[:depth + 1])}")
        child = node.children[k - 1]
        if not isinstance(child, PlainChild):
            raise RuleApplicationError(f"{render_position(pos[:depth + 1])} is a marked nesting")
        node = child.body
    return node


def replace_at(ns: NestedSequent, pos: Sequence[int], new: Union[NestedSequent, Child]) -> NestedSequent:
    """Replace the node (or, for a child value, the child) at a position"""
    if not pos:
        if not isinstance(new, NestedSequent):
            raise RuleApplicationError("the root must stay a nested sequent")
        return new
    k = pos[0]
    children = list(ns.children)
    if len(pos) == 1:
        old = children[k - 1]
        if isinstance(new, NestedSequent):
            if not isinstance(old, PlainChild):
                raise RuleApplicationError(f"{k} is a marked nesting")
            new = PlainChild(old.index, new)
        children[k - 1] = new
    else:
        old = children[k - 1]
        if not isinstance(old, PlainChild):
            raise RuleApplicationError(f"{k} is a marked nesting")
        children[k - 1] = PlainChild(old.index, replace_at(old.body, pos[1:], new))
    return NestedSequent(ns.ante, ns.succ, tuple(children))


@dataclass(frozen=True)
class HoledContext:
    """A nested sequent with one hole; root None is the empty context"""

    root: Optional[NestedSequent]
    hole: Position
    index: Optional[int] = None

    @property
    def depth(self) -> int:
        return len(self.hole)


def holed(ns: NestedSequent, pos: Sequence[int]) -> Tuple[HoledContext, Child]:
    """Cut the child at a position out of a nested sequent"""
    child = child_at(ns, pos)
    parent = node_at(ns, pos[:-1])
    children = parent.children[:pos[-1] - 1] + parent.children[pos[-1]:]
    root = replace_at(ns, pos[:-1], NestedSequent(parent.ante, parent.succ, children))
    index = child.index if isinstance(child, PlainChild) else None
    return HoledContext(root, tuple(pos), index), child


def plug(ctx: HoledContext, filler: NestedSequent) -> NestedSequent:
    if ctx.root is None or (ctx.root.is_empty() and ctx.hole == (1,)):
        return filler
    if filler.is_empty():
        return ctx.root
    parent_pos, k = ctx.hole[:-1], ctx.hole[-1]
    parent = node_at(ctx.root, parent_pos)
    children = parent.children[:k - 1] + (PlainChild(ctx.index, filler),) + parent.children[k - 1:]
    return replace_at(ctx.root, parent_pos, NestedSequent(parent.ante, parent.succ, children))


# --- text syntax ------------------------------------------------------------

_BOX_PREFIX = re.compile(r"^\[\d*\]")
_INDEX_SUFFIX = re.compile(r"\^\s*(\d+)\s*$")


def render_nested(ns: NestedSequent) -> str:
    items = [render_formula_list(ns.succ)] if ns.succ else []
    for child in ns.children:
        if isinstance(child, PlainChild):
            suffix = f"^{child.index}" if child.index is not None else ""
            items.append(f"[{render_nested(child.body)}]{suffix}")
        else:
            items.append(f"< {render_sequent(child.left)} ; {render_sequent(child.right)} >")
    left = render_formula_list(ns.ante)
    return " ".join(part for part in (left, "|-", ", ".join(items)) if part)


def parse_nested(text: str) -> NestedSequent:
    turnstile = find_turnstile(text)
    if turnstile is None:
        raise ParseError("nested sequent needs a '|-'", None, text)
    left = text[:turnstile].strip()
    ante = tuple(parse_formula(part) for part in split_top_level(left, ",")) if left else ()
    succ: List[Formula] = []
    children: List[Child] = []
    right = text[turnstile + 2:].strip()
    for item in (split_top_level(right, ",") if right else []):
        item = item.strip()
        if item.startswith("[") and not _BOX_PREFIX.match(item):
            index = None
            match = _INDEX_SUFFIX.search(item)
            if match:
                index = int(match.group(1))
                item = item[:match.start()].strip()
            if not item.endswith("]"):
                raise ParseError("unterminated nesting", None, text)
            children.append(PlainChild(index, parse_nested(item[1:-1])))
        elif item.startswith("<"):
            if not item.endswith(">"):
                raise ParseError("unterminated marked nesting", None, text)
            halves = split_top_level(item[1:-1], ";")
            if len(halves) != 2:
                raise ParseError("a marked nesting holds two sequents separated by ';'", None, text)
            children.append(MarkedChild(parse_sequent(halves[0]), parse_sequent(halves[1])))
        else:
            succ.append(parse_formula(item))
    return NestedSequent(ante, tuple(succ), tuple(children))


# --- well-formedness --------------------------------------------------------

def check_nested_goal(logic: LogicSpec, ns: NestedSequent) -> None:
    check_goal_indices(logic, ns.formulas())
    problems: List[str] = []

    def visit(node: NestedSequent, pos: Position) -> None:
        for k, child in enumerate(node.children, start=1):
            where = render_position(pos + (k,))
            if isinstance(child, MarkedChild):
                if not logic.is_non_normal:
                    problems.append(f"marked nesting at {where} needs E or M")
                continue
            if logic.is_multimodal and child.index is None:
                problems.append(f"nesting at {where} needs an index")
            if logic.is_multimodal and child.index is not None and child.index not in logic.indices:
                problems.append(f"nesting index {child.index} at {where} is not an index of {logic}")
            if not logic.is_multimodal and child.index is not None:
                problems.append(f"nesting at {where} cannot carry an index in {logic}")
            visit(child.body, pos + (k,))

    visit(ns, ())
    if problems:
        raise DescriptionError(problems)


# --- rule tables ------------------------------------------------------------

_LOCAL = ("init", "botL", "andL", "andR", "orL", "orR", "impL")


def _local_rules(classical: bool) -> List[Rule]:
    rules = []
    for name in _LOCAL:
        phase = Phase.AXIOM if name in ("init", "botL") else Phase.LOCAL
        arity = 0 if phase == Phase.AXIOM else (2 if name in ("andR", "orL", "impL") else 1)
        rules.append(Rule(name, arity, phase, branching=arity == 2))
    if classical:
        rules.append(Rule("impR", 1))
    return rules


@lru_cache(maxsize=None)
def ns_rule_table(logic: LogicSpec) -> RuleTable:
    """Every rule shipped here is shallow and n-directed"""
    rules = _local_rules(classical=not logic.is_mlj)
    if logic.is_mlj:
        rules.append(Rule("impR", 1, Phase.NESTING, inter_nested=True))
        rules.append(Rule("lift", 1, Phase.LIFT, inter_nested=True))
    elif logic.is_multimodal:
        indices = logic.description.sorted_indices()
        for i in indices:
            if logic.has(i, Axiom.T):
                rules.append(Rule(indexed("t", i), 1))
        for i in indices:
            rules.append(Rule(indexed("boxR", i), 1, Phase.NESTING, inter_nested=True))
        for j in indices:
            if logic.has(j, Axiom.D):
                for i in sorted(logic.upset(j)):
                    rules.append(Rule(indexed("d", i, j), 1, Phase.NESTING, inter_nested=True))
        for j in indices:
            for i in sorted(logic.upset(j)):
                rules.append(Rule(indexed("boxL", i, j), 1, Phase.LIFT, inter_nested=True))
                if logic.has(i, Axiom.FOUR):
                    rules.append(Rule(indexed("4", i, j), 1, Phase.LIFT, inter_nested=True))
    else:
        rules.append(Rule("boxR_e", 1, Phase.NESTING, inter_nested=True))
        if logic.kind == LogicKind.M:
            rules.append(Rule("M_n", 1, Phase.LIFT, on_marked=True))
        rules.append(Rule("boxL_e", 2, Phase.LIFT, branching=True, inter_nested=True, on_marked=True))
    return RuleTable("ns", logic, tuple(rules))


# --- rule application -------------------------------------------------------

def _require(condition: bool, message: str) -> None:
    if not condition:
        raise RuleApplicationError(message)


def _plain_child(ns: NestedSequent, sel: Selection) -> Tuple[Position, PlainChild]:
    _require(sel.child is not None, "lift rules need a child")
    pos = tuple(sel.at) + (sel.child,)
    child = child_at(ns, pos)
    _require(isinstance(child, PlainChild), f"{render_position(pos)} is not a plain nesting")
    return pos, child


def _add_to_child(ns: NestedSequent, pos: Position, child: PlainChild, f: Formula) -> NestedSequent:
    body = child.body
    return replace_at(ns, pos, NestedSequent(ms_add(body.ante, f), body.succ, body.children))


def ns_apply(logic: LogicSpec, rule: str, goal: NestedSequent, sel: Selection) -> List[NestedSequent]:
    if rule not in ns_rule_table(logic):
        raise RuleApplicationError(f"{rule} is not a rule of NS for {logic}")
    base, idx = rule_parts(rule)
    at = tuple(sel.at)
    node = node_at(goal, at)
    p = sel.principal

    def with_node(ante: Multiset, succ: Multiset, children=None) -> NestedSequent:
        return replace_at(goal, at, NestedSequent(ante, succ, node.children if children is None else children))

    if base == "impR" and logic.is_mlj:
        _require(isinstance(p, Imp), "impR needs an implication")
        child = PlainChild(None, NestedSequent((p.left,), (p.right,)))
        return [with_node(node.ante, ms_remove(node.succ, p), node.children + (child,))]
    if base == "lift":
        pos, child = _plain_child(goal, sel)
        _require(p is not None and p in node.ante, "lift needs a formula of the parent antecedent")
        return [_add_to_child(goal, pos, child, p)]
    if base == "boxR" and idx:
        i = idx[0]
        _require(isinstance(p, Box) and p.index == i, f"{rule} needs a box [{i}]")
        child = PlainChild(i, NestedSequent((), (p.body,)))
        return [with_node(node.ante, ms_remove(node.succ, p), node.children + (child,))]
    if base in ("boxL", "4"):
        i, j = idx
        pos, child = _plain_child(goal, sel)
        _require(isinstance(p, Box) and p.index == i and p in node.ante, f"{rule} needs [{i}] in the antecedent")
        _require(child.index == j, f"{rule} needs a nesting of index {j}")
        _require(i in logic.upset(j), f"{i} is not above {j}")
        if base == "4":
            _require(logic.has(i, Axiom.FOUR), f"{rule} needs 4 at index {i}")
            return [_add_to_child(goal, pos, child, p)]
        return [_add_to_child(goal, pos, child, p.body)]
    if base == "d":
        i, j = idx
        _require(isinstance(p, Box) and p.index == i and p in node.ante, f"{rule} needs [{i}] in the antecedent")
        _require(i in logic.upset(j) and logic.has(j, Axiom.D), f"{rule} needs D at {j} below {i}")
        child = PlainChild(j, NestedSequent((p.body,), ()))
        return [with_node(node.ante, node.succ, node.children + (child,))]
    if base == "boxR_e":
        _require(isinstance(p, Box), "boxR_e needs a box in the succedent")
        child = MarkedChild(Sequent((), (p.body,)), Sequent((p.body,), ()))
        return [with_node(node.ante, ms_remove(node.succ, p), node.children + (child,))]
    if base in ("M_n", "boxL_e"):
        _require(sel.child is not None, f"{rule} needs a marked child")
        pos = at + (sel.child,)
        marked = child_at(goal, pos)
        _require(isinstance(marked, MarkedChild), f"{render_position(pos)} is not a marked nesting")
        if base == "M_n":
            right = Sequent(ms_add(marked.right.ante, BOTTOM), marked.right.succ)
            return [replace_at(goal, pos, MarkedChild(marked.left, right))]
        _require(isinstance(p, Box) and p in node.ante, "boxL_e needs a box in the antecedent")
        first = PlainChild(None, NestedSequent(ms_add(marked.left.ante, p.body), marked.left.succ))
        second = PlainChild(None, NestedSequent(marked.right.ante, ms_add(marked.right.succ, p.body)))
        return [replace_at(goal, pos, first), replace_at(goal, pos, second)]
    return [with_node(a, s) for a, s in local_premises(logic, rule, sel, node.ante, node.succ)]


def ns_check(logic: LogicSpec, d: Derivation[NestedSequent]) -> CheckReport:
    return check_tree(d, lambda node: ns_apply(logic, node.rule, node.conclusion, node.selection))


# --- phase discipline -------------------------------------------------------

_RANK = {Phase.LOCAL: 0, Phase.NESTING: 1, Phase.LIFT: 2}


def applied_phase(logic: LogicSpec, node: Derivation[NestedSequent]) -> Phase:
    try:
        return ns_rule_table(logic)[node.rule].phase
    except KeyError:
        raise RuleApplicationError(f"{node.rule} is not a rule of NS for {logic}")


def phase_check(logic: LogicSpec, d: Derivation[NestedSequent]) -> CheckReport:
    """Along each branch, rules at a node run Local* Nesting* Lift* and stop once a deeper node is addressed"""

    def visit(node: Derivation[NestedSequent], path: Tuple[int, ...], ranks: dict, done: frozenset) -> CheckReport:
        try:
            phase = applied_phase(logic, node)
        except RuleApplicationError as e:
            return CheckReport.reject(path, str(e))
        if phase != Phase.AXIOM:
            at = tuple(node.selection.at)
            if at in done:
                return CheckReport.reject(path, f"{node.rule} at {render_position(at)} after a deeper rule")
            rank = _RANK[phase]
            if rank < ranks.get(at, 0):
                return CheckReport.reject(path, f"{phase.value} rule {node.rule} at {render_position(at)} "
                                                f"after a later phase")
            ranks = {**ranks, at: rank}
            done = done | {at[:k] for k in range(len(at))}
        for k, sub in enumerate(node.premises):
            report = visit(sub, path + (k,), ranks, done)
            if not report.ok:
                return report
        return CheckReport.accept()

    return visit(d, (), {}, frozenset())


# --- search -----------------------------------------------------------------

@dataclass(frozen=True)
class NsFocus:
    sequent: NestedSequent
    at: Position


class NsSearch(FocusedSearch[NsFocus, NestedSequent]):
    """Depth-first normal form: saturate the focus node, then open one nesting block and move into it"""

    calculus = "ns"

    def _node(self, state: NsFocus) -> NestedSequent:
        return node_at(state.sequent, state.at)

    def _local_step(self, state: NsFocus, rule: str, sel: Selection) -> Step:
        sel = Selection(sel.principal, sel.side, at=state.at)
        premises = ns_apply(self.logic, rule, state.sequent, sel)
        return Step(tuple(NsFocus(p, state.at) for p in premises),
                    lambda subs: Derivation(state.sequent, rule, sel, tuple(subs)))

    def close(self, state: NsFocus) -> Optional[Step]:
        node = self._node(state)
        move = closing_move(self.logic, node.ante, node.succ)
        if move is None:
            return None
        rule, sel = move
        return leaf(state.sequent, rule, Selection(sel.principal, sel.side, at=state.at))

    def invert(self, state: NsFocus) -> Optional[Step]:
        node = self._node(state)
        move = invertible_move(self.logic, node.ante, node.succ)
        return self._local_step(state, *move) if move else None

    def loop_key(self, state: NsFocus) -> Optional[LoopKey]:
        node = self._node(state)
        if node.children:
            return None
        return frozenset(node.ante), frozenset(node.succ)

    def choices(self, state: NsFocus) -> Iterable[Step]:
        node = self._node(state)
        for rule, sel in choice_moves(self.logic, node.ante, node.succ):
            yield self._block(state, rule, sel)
        for k, child in enumerate(node.children, start=1):
            yield from self._descend(state, k, child)

    # blocks: one nesting rule, its lifts, then focus on the new child

    def _apply(self, steps: list, current: NestedSequent, rule: str, sel: Selection) -> NestedSequent:
        steps.append((current, rule, sel))
        premises = ns_apply(self.logic, rule, current, sel)
        return premises[0]

    def _lifts(self, steps: list, current: NestedSequent, at: Position, k: int,
               node: NestedSequent, child_index: Optional[int], skip: Optional[Formula] = None) -> NestedSequent:
        if self.logic.is_mlj:
            for f in node.ante:
                current = self._apply(steps, current, "lift", Selection(f, Side.LEFT, at=at, child=k))
            return current
        if not self.logic.is_multimodal:
            return current
        skipped = False
        for f in node.ante:
            if not isinstance(f, Box) or f.index not in self.logic.upset(child_index):
                continue
            if f == skip and not skipped:
                skipped = True
            else:
                current = self._apply(steps, current, indexed("boxL", f.index, child_index),
                                      Selection(f, Side.LEFT, at=at, child=k))
            if self.logic.has(f.index, Axiom.FOUR):
                current = self._apply(steps, current, indexed("4", f.index, child_index),
                                      Selection(f, Side.LEFT, at=at, child=k))
        return current

    def _finish(self, steps: list, current: NestedSequent, at: Position, k: int) -> Step:
        if not steps:
            return Step((NsFocus(current, at + (k,)),), lambda subs: subs[0])
        last_conclusion, last_rule, last_sel = steps[-1]
        premises = ns_apply(self.logic, last_rule, last_conclusion, last_sel)
        return chain(steps, tuple(NsFocus(p, at + (k,)) for p in premises))

    def _block(self, state: NsFocus, rule: str, sel: Selection) -> Step:
        at, current, node = state.at, state.sequent, self._node(state)
        k = len(node.children) + 1
        steps: list = []
        base, idx = rule_parts(rule)
        if base == "impR":
            current = self._apply(steps, current, "impR", Selection(sel.principal, Side.RIGHT, at=at))
            current = self._lifts(steps, current, at, k, node, None)
        elif base == "k":
            i = idx[0]
            current = self._apply(steps, current, indexed("boxR", i), Selection(sel.principal, Side.RIGHT, at=at))
            current = self._lifts(steps, current, at, k, node, i)
        elif base == "d":
            j = idx[0]
            principal = sel.unboxed[0]
            current = self._apply(steps, current, indexed("d", principal.index, j),
                                  Selection(principal, Side.LEFT, at=at))
            current = self._lifts(steps, current, at, k, node, j, skip=principal)
        else:
            current = self._apply(steps, current, "boxR_e", Selection(sel.partner, Side.RIGHT, at=at))
            if self.logic.kind == LogicKind.M:
                current = self._apply(steps, current, "M_n", Selection(at=at, child=k))
            steps.append((current, "boxL_e", Selection(sel.principal, Side.LEFT, at=at, child=k)))
            return self._finish(steps, current, at, k)
        return self._finish(steps, current, at, k)

    def _descend(self, state: NsFocus, k: int, child: Child) -> Iterable[Step]:
        at, node = state.at, self._node(state)
        if isinstance(child, MarkedChild):
            for f in dict.fromkeys(node.ante):
                if not isinstance(f, Box):
                    continue
                steps: list = []
                current = state.sequent
                if self.logic.kind == LogicKind.M:
                    current = self._apply(steps, current, "M_n", Selection(at=at, child=k))
                steps.append((current, "boxL_e", Selection(f, Side.LEFT, at=at, child=k)))
                yield self._finish(steps, current, at, k)
            return
        steps = []
        current = self._lifts(steps, state.sequent, at, k, node, child.index)
        yield self._finish(steps, current, at, k)


def ns_prove(logic: LogicSpec, goal: NestedSequent, budget: int = DEFAULT_BUDGET) -> SearchResult[NestedSequent]:
    check_nested_goal(logic, goal)
    return NsSearch(logic, budget).run(NsFocus(goal, ()))
