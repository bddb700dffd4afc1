"""
Plain sequents: rule tables, rule application, backward search and proof checking for nestprover
"""

from collections import Counter
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Set, Tuple

from config import DEFAULT_BUDGET
from derivations import (CheckReport, Derivation, FocusedSearch, LoopKey, Phase, Rule, RuleTable,
                         SearchResult, Selection, Side, Step, check_tree, indexed, leaf, rule_parts)
from descriptions import Axiom, LogicKind, LogicSpec
from errors import ParseError, RuleApplicationError
from formulas import (BOTTOM, Atom, Box, Conj, Disj, Formula, Imp, find_turnstile, parse_formula_list,
                      render_formula, render_formula_list, sort_formulas)

Multiset = Tuple[Formula, ...]
Move = Tuple[str, Selection]


@dataclass(frozen=True)
class Sequent:
    """Γ ⊢ Δ with both sides kept as sorted tuples so equal multisets compare equal"""

    ante: Multiset = ()
    succ: Multiset = ()

    def __post_init__(self):
        object.__setattr__(self, "ante", sort_formulas(self.ante))
        object.__setattr__(self, "succ", sort_formulas(self.succ))

    @classmethod
    def goal(cls, f: Formula) -> "Sequent":
        return cls((), (f,))

    def formulas(self) -> Multiset:
        return self.ante + self.succ

    def is_empty(self) -> bool:
        return not self.ante and not self.succ

    def __str__(self) -> str:
        return render_sequent(self)


def render_sequent(s: Sequent) -> str:
    left = render_formula_list(s.ante)
    right = render_formula_list(s.succ)
    return " ".join(part for part in (left, "|-", right) if part)


def parse_sequent(text: str) -> Sequent:
    turnstile = find_turnstile(text)
    if turnstile is None:
        raise ParseError("sequent needs a '|-'", None, text)
    return Sequent(parse_formula_list(text[:turnstile]), parse_formula_list(text[turnstile + 2:]))


# --- multiset helpers -------------------------------------------------------

def ms_add(items: Multiset, *added: Formula) -> Multiset:
    return sort_formulas(items + tuple(added))


def ms_remove(items: Multiset, f: Formula) -> Multiset:
    result = list(items)
    try:
        result.remove(f)
    except ValueError:
        raise RuleApplicationError(f"{render_formula(f)} does not occur")
    return tuple(result)


def ms_contains(items: Multiset, sub: Iterable[Formula]) -> bool:
    have = Counter(items)
    want = Counter(sub)
    return all(have[f] >= n for f, n in want.items())


def ms_difference(items: Multiset, sub: Multiset) -> Multiset:
    return sort_formulas((Counter(items) - Counter(sub)).elements())


# --- local rules shared by every calculus -----------------------------------

SidePair = Tuple[Multiset, Multiset]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise RuleApplicationError(message)


def local_premises(logic: LogicSpec, rule: str, sel: Selection, ante: Multiset, succ: Multiset) -> List[SidePair]:
    """Premises of a propositional rule (or t) acting on one sequent; axioms return no premises"""
    base, idx = rule_parts(rule)
    p = sel.principal
    if base == "botL":
        _require(BOTTOM in ante, "botL needs bot in the antecedent")
        return []
    _require(p is not None, f"{rule} needs a principal formula")
    if base == "init":
        _require(isinstance(p, Atom), "init is restricted to atoms")
        _require(p in ante and p in succ, f"init needs {render_formula(p)} on both sides")
        return []
    if base == "andL":
        _require(isinstance(p, Conj), "andL needs a conjunction")
        return [(ms_add(ms_remove(ante, p), p.left, p.right), succ)]
    if base == "andR":
        _require(isinstance(p, Conj), "andR needs a conjunction")
        rest = ms_remove(succ, p)
        return [(ante, ms_add(rest, p.left)), (ante, ms_add(rest, p.right))]
    if base == "orL":
        _require(isinstance(p, Disj), "orL needs a disjunction")
        rest = ms_remove(ante, p)
        return [(ms_add(rest, p.left), succ), (ms_add(rest, p.right), succ)]
    if base == "orR":
        _require(isinstance(p, Disj), "orR needs a disjunction")
        return [(ante, ms_add(ms_remove(succ, p), p.left, p.right))]
    if base == "impL":
        _require(isinstance(p, Imp), "impL needs an implication")
        rest = ms_remove(ante, p)
        # the intuitionistic rule keeps its principal in the left premise
        left = ante if logic.is_mlj else rest
        return [(left, ms_add(succ, p.left)), (ms_add(rest, p.right), succ)]
    if base == "impR" and not logic.is_mlj:
        _require(isinstance(p, Imp), "impR needs an implication")
        return [(ms_add(ante, p.left), ms_add(ms_remove(succ, p), p.right))]
    if base == "t" and logic.is_multimodal:
        _require(len(idx) == 1 and logic.has(idx[0], Axiom.T), f"{rule} needs T at its index")
        _require(isinstance(p, Box) and p in ante, "t needs a box in the antecedent")
        _require(p.index in logic.upset(idx[0]), f"box index {p.index} is not above {idx[0]}")
        return [(ms_add(ante, p.body), succ)]
    raise RuleApplicationError(f"{rule} is not a local rule of {logic}")


# --- search moves on one sequent --------------------------------------------

def closing_move(logic: LogicSpec, ante: Multiset, succ: Multiset) -> Optional[Move]:
    if BOTTOM in ante:
        return "botL", Selection(BOTTOM, Side.LEFT)
    right = set(succ)
    for f in ante:
        if isinstance(f, Atom) and f in right:
            return "init", Selection(f, Side.LEFT)
    return None


def _t_index(logic: LogicSpec, box: Box) -> Optional[int]:
    for i in sorted(logic.indices):
        if logic.has(i, Axiom.T) and box.index in logic.upset(i):
            return i
    return None


def settled_right(f: Formula, right: Set[Formula]) -> bool:
    """Adding f to the succedent gives an equivalent sequent once the invertible rules have run"""
    if f in right or f == BOTTOM:
        return True
    if isinstance(f, Disj):
        return settled_right(f.left, right) and settled_right(f.right, right)
    if isinstance(f, Conj):
        return settled_right(f.left, right) or settled_right(f.right, right)
    return False


def settled_left(f: Formula, left: Set[Formula], right: Set[Formula] = frozenset(), classical: bool = False) -> bool:
    if f in left:
        return True
    if isinstance(f, Conj):
        return settled_left(f.left, left, right, classical) and settled_left(f.right, left, right, classical)
    if isinstance(f, Disj):
        return settled_left(f.left, left, right, classical) or settled_left(f.right, left, right, classical)
    if isinstance(f, Imp):
        if classical and settled_right(f.left, right):
            return True
        return settled_left(f.right, left, right, classical)
    return False


def invertible_move(logic: LogicSpec, ante: Multiset, succ: Multiset) -> Optional[Move]:
    """The leftmost productive non-branching rule, else the leftmost productive branching one"""
    left, right = set(ante), set(succ)

    def non_branching(f: Formula, side: Side) -> Optional[str]:
        if side == Side.LEFT:
            if isinstance(f, Conj):
                return "andL"
            if isinstance(f, Box) and logic.is_multimodal and not settled_left(f.body, left, right, True):
                i = _t_index(logic, f)
                if i is not None:
                    return indexed("t", i)
            return None
        if isinstance(f, Disj):
            return "orR"
        if isinstance(f, Imp) and not logic.is_mlj:
            return "impR"
        return None

    def branching(f: Formula, side: Side) -> Optional[str]:
        if side == Side.LEFT:
            if isinstance(f, Disj):
                return "orL"
            if isinstance(f, Imp):
                if logic.is_mlj and (settled_right(f.left, right) or settled_left(f.right, left)):
                    return None
                return "impL"
            return None
        return "andR" if isinstance(f, Conj) else None

    for pick in (non_branching, branching):
        for side, items in ((Side.LEFT, ante), (Side.RIGHT, succ)):
            for f in items:
                rule = pick(f, side)
                if rule is not None:
                    return rule, Selection(f, side)
    return None


def _distinct(items: Iterable[Formula]) -> List[Formula]:
    seen = []
    for f in items:
        if f not in seen:
            seen.append(f)
    return seen


def modal_context(logic: LogicSpec, ante: Multiset, i: int) -> Tuple[Multiset, Multiset]:
    """Antecedent boxes released by a modal rule at index i: (kept boxed, unboxed)"""
    above = logic.upset(i)
    unboxed = tuple(f for f in ante if isinstance(f, Box) and f.index in above)
    kept = tuple(f for f in unboxed if logic.has(f.index, Axiom.FOUR))
    return kept, unboxed


def choice_moves(logic: LogicSpec, ante: Multiset, succ: Multiset) -> List[Move]:
    moves: List[Move] = []
    if logic.is_mlj:
        for f in _distinct(succ):
            if isinstance(f, Imp):
                moves.append(("impR", Selection(f, Side.RIGHT, context=ante)))
    elif logic.is_multimodal:
        for f in _distinct(succ):
            if isinstance(f, Box):
                kept, unboxed = modal_context(logic, ante, f.index)
                moves.append((indexed("k", f.index), Selection(f, Side.RIGHT, kept=kept, unboxed=unboxed)))
        for j in sorted(logic.indices):
            if logic.has(j, Axiom.D):
                kept, unboxed = modal_context(logic, ante, j)
                if unboxed:
                    moves.append((indexed("d", j), Selection(kept=kept, unboxed=unboxed)))
    else:
        rule = "E" if logic.kind == LogicKind.E else "M"
        for a in _distinct(ante):
            if isinstance(a, Box):
                for b in _distinct(succ):
                    if isinstance(b, Box):
                        moves.append((rule, Selection(a, Side.LEFT, partner=b)))
    return moves


# --- rule tables ------------------------------------------------------------

_PROPOSITIONAL = (
    Rule("init", 0, Phase.AXIOM),
    Rule("botL", 0, Phase.AXIOM),
    Rule("andL", 1),
    Rule("andR", 2, branching=True),
    Rule("orL", 2, branching=True),
    Rule("orR", 1),
    Rule("impL", 2, branching=True),
    Rule("impR", 1),
)


@lru_cache(maxsize=None)
def sc_rule_table(logic: LogicSpec) -> RuleTable:
    rules = list(_PROPOSITIONAL)
    if logic.is_multimodal:
        for i in logic.description.sorted_indices():
            rules.append(Rule(indexed("k", i), 1))
        for i in logic.description.sorted_indices():
            if logic.has(i, Axiom.D):
                rules.append(Rule(indexed("d", i), 1))
        for i in logic.description.sorted_indices():
            if logic.has(i, Axiom.T):
                rules.append(Rule(indexed("t", i), 1))
    elif logic.is_non_normal:
        rules.append(Rule("E", 2, branching=True) if logic.kind == LogicKind.E else Rule("M", 1))
    return RuleTable("sc", logic, tuple(rules))


def _bodies(boxes: Sequence[Formula]) -> Multiset:
    return tuple(f.body for f in boxes)


def _modal_premise(logic: LogicSpec, i: int, sel: Selection, ante: Multiset) -> Multiset:
    kept_all, unboxed_all = modal_context(logic, ante, i)
    kept = kept_all if sel.kept is None else sel.kept
    unboxed = unboxed_all if sel.unboxed is None else sel.unboxed
    _require(ms_contains(unboxed_all, unboxed), f"unboxed formulas must be boxes above {i} in the antecedent")
    _require(ms_contains(kept_all, kept), f"kept formulas must be 4-boxes above {i} in the antecedent")
    return kept + _bodies(unboxed)


def sc_apply(logic: LogicSpec, rule: str, goal: Sequent, sel: Selection) -> List[Sequent]:
    if rule not in sc_rule_table(logic):
        raise RuleApplicationError(f"{rule} is not a rule of SC for {logic}")
    base, idx = rule_parts(rule)
    p = sel.principal
    if base == "impR" and logic.is_mlj:
        _require(isinstance(p, Imp) and p in goal.succ, "impR needs an implication in the succedent")
        _require(sel.context is None or sort_formulas(sel.context) == goal.ante,
                 "impR keeps the whole antecedent")
        return [Sequent(goal.ante + (p.left,), (p.right,))]
    if base == "k":
        i = idx[0]
        _require(isinstance(p, Box) and p.index == i and p in goal.succ, f"{rule} needs a box [{i}] in the succedent")
        return [Sequent(_modal_premise(logic, i, sel, goal.ante), (p.body,))]
    if base == "d":
        premise = _modal_premise(logic, idx[0], sel, goal.ante)
        return [Sequent(premise, ())]
    if base in ("E", "M"):
        b = sel.partner
        _require(isinstance(p, Box) and p in goal.ante, f"{rule} needs a box in the antecedent")
        _require(isinstance(b, Box) and b in goal.succ, f"{rule} needs a box in the succedent")
        if base == "E":
            return [Sequent((p.body,), (b.body,)), Sequent((b.body,), (p.body,))]
        return [Sequent((p.body,), (b.body,))]
    return [Sequent(a, s) for a, s in local_premises(logic, rule, sel, goal.ante, goal.succ)]


def sc_check(logic: LogicSpec, d: Derivation[Sequent]) -> CheckReport:
    return check_tree(d, lambda node: sc_apply(logic, node.rule, node.conclusion, node.selection))


# --- search -----------------------------------------------------------------

class ScSearch(FocusedSearch[Sequent, Sequent]):
    calculus = "sc"

    def _step(self, state: Sequent, move: Move) -> Step:
        rule, sel = move
        premises = tuple(sc_apply(self.logic, rule, state, sel))
        return Step(premises, lambda subs: Derivation(state, rule, sel, tuple(subs)))

    def close(self, state: Sequent) -> Optional[Step]:
        move = closing_move(self.logic, state.ante, state.succ)
        return leaf(state, *move) if move else None

    def invert(self, state: Sequent) -> Optional[Step]:
        move = invertible_move(self.logic, state.ante, state.succ)
        return self._step(state, move) if move else None

    def choices(self, state: Sequent) -> Iterable[Step]:
        for move in choice_moves(self.logic, state.ante, state.succ):
            yield self._step(state, move)

    def loop_key(self, state: Sequent) -> Optional[LoopKey]:
        return frozenset(state.ante), frozenset(state.succ)


def check_goal_indices(logic: LogicSpec, formulas: Iterable[Formula]) -> None:
    for f in formulas:
        logic.check_formula(f)


def sc_prove(logic: LogicSpec, goal: Sequent, budget: int = DEFAULT_BUDGET) -> SearchResult[Sequent]:
    check_goal_indices(logic, goal.formulas())
    return ScSearch(logic, budget).run(goal)


# --- height-preserving weakening --------------------------------------------

def weaken(logic: LogicSpec, d: Derivation[Sequent], left: Sequence[Formula] = (),
           right: Sequence[Formula] = ()) -> Derivation[Sequent]:
    """Carry extra formulas through a proof; context-dropping rules absorb them, height is unchanged"""
    conclusion = Sequent(d.conclusion.ante + tuple(left), d.conclusion.succ + tuple(right))
    selection = d.selection
    if not d.premises:
        return Derivation(conclusion, d.rule, selection, ())
    if logic.is_mlj and d.rule == "impR":
        selection = replace(selection, context=conclusion.ante)
    new_premises = sc_apply(logic, d.rule, conclusion, selection)
    subs = []
    for old, new in zip(d.premises, new_premises):
        extra_left = ms_difference(new.ante, old.conclusion.ante)
        extra_right = ms_difference(new.succ, old.conclusion.succ)
        subs.append(weaken(logic, old, extra_left, extra_right))
    return Derivation(conclusion, d.rule, selection, tuple(subs))
