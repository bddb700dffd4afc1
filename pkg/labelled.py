"""
Labelled sequents: the labelled image of nested proofs, the labelled calculi and translations between them
"""

import re
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

from config import DEFAULT_BUDGET
from derivations import (CheckReport, Derivation, FocusedSearch, LoopKey, Rule, RuleTable, SearchResult, Selection,
                         Side, Step, chain, check_tree, indexed, leaf, rule_parts)
from descriptions import Axiom, LogicKind, LogicSpec
from errors import ParseError, RuleApplicationError, TranslationError
from formulas import BOTTOM, Atom, Box, Formula, Imp, formula_key, parse_formula, render_formula, split_top_level
from formulas import find_top_level, find_turnstile
from logger import logger
from nested import MarkedChild, NestedSequent, PlainChild, Position, node_at, ns_prove, ns_rule_table
from sequents import Multiset, Sequent, choice_moves, invertible_move, local_premises


# --- relational atoms -------------------------------------------------------

@dataclass(frozen=True)
class Rel:
    source: str
    target: str


@dataclass(frozen=True)
class Leq:
    source: str
    target: str


@dataclass(frozen=True)
class RelIdx:
    index: int
    source: str
    target: str


@dataclass(frozen=True)
class Nbr:
    source: str
    target: str


@dataclass(frozen=True)
class NbrPair:
    """x N (y1, y2): the two sides of a marked nesting"""

    source: str
    first: str
    second: str


@dataclass(frozen=True)
class InSet:
    world: str
    nbhd: str


@dataclass(frozen=True)
class NbrOf:
    nbhd: str
    world: str


@dataclass(frozen=True)
class ForcesAll:
    nbhd: str
    formula: Formula


@dataclass(frozen=True)
class Covers:
    formula: Formula
    nbhd: str


Term = Union[Rel, Leq, RelIdx, Nbr, NbrPair, InSet, NbrOf, ForcesAll, Covers]

_EDGES = (Rel, RelIdx, Nbr, NbrPair)


def term_worlds(t: Term) -> Tuple[str, ...]:
    if isinstance(t, (Rel, Leq, Nbr)):
        return t.source, t.target
    if isinstance(t, RelIdx):
        return t.source, t.target
    if isinstance(t, NbrPair):
        return t.source, t.first, t.second
    if isinstance(t, InSet):
        return (t.world,)
    if isinstance(t, NbrOf):
        return (t.world,)
    return ()


def term_nbhds(t: Term) -> Tuple[str, ...]:
    if isinstance(t, (InSet, NbrOf, ForcesAll, Covers)):
        return (t.nbhd,)
    return ()


def render_term(t: Term) -> str:
    if isinstance(t, Rel):
        return f"{t.source} R {t.target}"
    if isinstance(t, Leq):
        return f"{t.source} <= {t.target}"
    if isinstance(t, RelIdx):
        return f"{t.source} R_{t.index} {t.target}"
    if isinstance(t, Nbr):
        return f"{t.source} N {t.target}"
    if isinstance(t, NbrPair):
        return f"{t.source} N ({t.first}, {t.second})"
    if isinstance(t, InSet):
        return f"{t.world} in {t.nbhd}"
    if isinstance(t, NbrOf):
        return f"{t.nbhd} in N({t.world})"
    if isinstance(t, ForcesAll):
        return f"{t.nbhd} ||- {render_formula(t.formula)}"
    if isinstance(t, Covers):
        return f"{render_formula(t.formula)} <| {t.nbhd}"
    raise TypeError(f"not a relational atom: {t!r}")


def label_key(label: str) -> Tuple:
    """Orders x.2 before x.10"""
    return tuple((0, int(part), "") if part.isdigit() else (1, 0, part) for part in label.split("."))


# --- labelled sequents ------------------------------------------------------

@dataclass(frozen=True)
class LabelledFormula:
    label: str
    formula: Formula

    def __str__(self) -> str:
        return f"{self.label}: {render_formula(self.formula)}"


def _lf_key(lf: LabelledFormula) -> Tuple:
    return label_key(lf.label), formula_key(lf.formula)


@dataclass(frozen=True)
class LabelledSequent:
    """R, Γ ⊢ Δ; right_atoms holds membership atoms of the succedent"""

    relations: FrozenSet[Term] = frozenset()
    left: Tuple[LabelledFormula, ...] = ()
    right: Tuple[LabelledFormula, ...] = ()
    right_atoms: Tuple[InSet, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "relations", frozenset(self.relations))
        object.__setattr__(self, "left", tuple(sorted(self.left, key=_lf_key)))
        object.__setattr__(self, "right", tuple(sorted(self.right, key=_lf_key)))
        object.__setattr__(self, "right_atoms", tuple(sorted(self.right_atoms, key=render_term)))

    @classmethod
    def goal(cls, f: Formula, label: str = "x") -> "LabelledSequent":
        return cls(frozenset(), (), (LabelledFormula(label, f),))

    def labels(self) -> List[str]:
        found = {lf.label for lf in self.left + self.right}
        for t in list(self.relations) + list(self.right_atoms):
            found.update(term_worlds(t))
        return sorted(found, key=label_key)

    def names(self) -> FrozenSet[str]:
        """Every world label and neighbourhood variable"""
        found = set(self.labels())
        for t in list(self.relations) + list(self.right_atoms):
            found.update(term_nbhds(t))
        return frozenset(found)

    def formulas(self) -> List[Formula]:
        return [lf.formula for lf in self.left + self.right]

    def at(self, label: str) -> Tuple[Multiset, Multiset]:
        return (tuple(lf.formula for lf in self.left if lf.label == label),
                tuple(lf.formula for lf in self.right if lf.label == label))

    def replace_at(self, label: str, ante: Iterable[Formula], succ: Iterable[Formula]) -> "LabelledSequent":
        left = [lf for lf in self.left if lf.label != label] + [LabelledFormula(label, f) for f in ante]
        right = [lf for lf in self.right if lf.label != label] + [LabelledFormula(label, f) for f in succ]
        return LabelledSequent(self.relations, tuple(left), tuple(right), self.right_atoms)

    def extend(self, relations: Iterable[Term] = (), left: Iterable[LabelledFormula] = (),
               right: Iterable[LabelledFormula] = (), right_atoms: Iterable[InSet] = ()) -> "LabelledSequent":
        return LabelledSequent(self.relations | frozenset(relations), self.left + tuple(left),
                               self.right + tuple(right), self.right_atoms + tuple(right_atoms))

    def remove_left(self, lf: LabelledFormula) -> "LabelledSequent":
        return LabelledSequent(self.relations, _remove(self.left, lf), self.right, self.right_atoms)

    def remove_right(self, lf: LabelledFormula) -> "LabelledSequent":
        return LabelledSequent(self.relations, self.left, _remove(self.right, lf), self.right_atoms)

    def without_relation(self, t: Term) -> "LabelledSequent":
        return LabelledSequent(self.relations - {t}, self.left, self.right, self.right_atoms)

    def drop_label(self, label: str) -> "LabelledSequent":
        return LabelledSequent(self.relations, tuple(lf for lf in self.left if lf.label != label),
                               tuple(lf for lf in self.right if lf.label != label), self.right_atoms)

    def __str__(self) -> str:
        return render_labelled(self)


def _remove(items: Tuple[LabelledFormula, ...], lf: LabelledFormula) -> Tuple[LabelledFormula, ...]:
    result = list(items)
    try:
        result.remove(lf)
    except ValueError:
        raise RuleApplicationError(f"{lf} does not occur")
    return tuple(result)


# --- text syntax ------------------------------------------------------------

_LABEL = r"[A-Za-z][\w.']*"
_TERM_PATTERNS = (
    (re.compile(rf"^({_LABEL})\s*\|\|-\s*(.+)$"), lambda m: ForcesAll(m[1], parse_formula(m[2]))),
    (re.compile(rf"^(.+?)\s*<\|\s*({_LABEL})$"), lambda m: Covers(parse_formula(m[1]), m[2])),
    (re.compile(rf"^({_LABEL})\s+in\s+N\(\s*({_LABEL})\s*\)$"), lambda m: NbrOf(m[1], m[2])),
    (re.compile(rf"^({_LABEL})\s+in\s+({_LABEL})$"), lambda m: InSet(m[1], m[2])),
    (re.compile(rf"^({_LABEL})\s+R_(\d+)\s+({_LABEL})$"), lambda m: RelIdx(int(m[2]), m[1], m[3])),
    (re.compile(rf"^({_LABEL})\s+R\s+({_LABEL})$"), lambda m: Rel(m[1], m[2])),
    (re.compile(rf"^({_LABEL})\s*<=\s*({_LABEL})$"), lambda m: Leq(m[1], m[2])),
    (re.compile(rf"^({_LABEL})\s+N\s*\(\s*({_LABEL})\s*,\s*({_LABEL})\s*\)$"),
     lambda m: NbrPair(m[1], m[2], m[3])),
    (re.compile(rf"^({_LABEL})\s+N\s+({_LABEL})$"), lambda m: Nbr(m[1], m[2])),
)
_LABELLED_FORMULA = re.compile(rf"^({_LABEL})\s*:\s*(.+)$")


def parse_term(text: str) -> Term:
    text = text.strip()
    for pattern, build in _TERM_PATTERNS:
        match = pattern.match(text)
        if match:
            return build(match)
    raise ParseError(f"not a relational atom: {text!r}", None, text)


def _parse_labelled_formula(text: str) -> LabelledFormula:
    match = _LABELLED_FORMULA.match(text.strip())
    if match is None:
        raise ParseError(f"expected 'label: formula' but found {text.strip()!r}", None, text)
    return LabelledFormula(match[1], parse_formula(match[2]))


def _items(text: str) -> List[str]:
    text = text.strip()
    return [part.strip() for part in split_top_level(text, ",")] if text else []


def render_labelled(ls: LabelledSequent) -> str:
    relations = ", ".join(sorted((render_term(t) for t in ls.relations)))
    left = ", ".join(str(lf) for lf in ls.left)
    right = ", ".join([str(lf) for lf in ls.right] + [render_term(t) for t in ls.right_atoms])
    body = " ".join(part for part in (left, "|-", right) if part)
    return f"{relations} ; {body}" if relations else body


def parse_labelled(text: str) -> LabelledSequent:
    """'R ; Γ |- Δ' with comma separated relational atoms and labelled formulas; 'R ;' may be omitted"""
    relations: List[Term] = []
    split = find_top_level(text, ";")
    if split is not None:
        relations = [parse_term(item) for item in _items(text[:split])]
        text = text[split + 1:]
    turnstile = find_turnstile(text)
    if turnstile is None:
        raise ParseError("labelled sequent needs a '|-'", None, text)
    left = [_parse_labelled_formula(item) for item in _items(text[:turnstile])]
    right: List[LabelledFormula] = []
    atoms: List[InSet] = []
    for item in _items(text[turnstile + 2:]):
        if _LABELLED_FORMULA.match(item):
            right.append(_parse_labelled_formula(item))
            continue
        term = parse_term(item)
        if not isinstance(term, InSet):
            raise ParseError(f"only membership atoms may stand in a succedent: {item!r}", None, text)
        atoms.append(term)
    return LabelledSequent(frozenset(relations), tuple(left), tuple(right), tuple(atoms))


def fresh_label(base: str, used: Iterable[str]) -> str:
    taken = set(used)
    label = base
    while label in taken:
        label += "'"
    return label


# --- nested sequents as labelled trees --------------------------------------

def _edge(logic: Optional[LogicSpec], index: Optional[int], x: str, y: str) -> Term:
    if index is not None:
        return RelIdx(index, x, y)
    if logic is not None and logic.is_non_normal:
        return Nbr(x, y)
    return Rel(x, y)


def node_labels(root: str, ns: NestedSequent, given: Optional[Mapping[Position, str]] = None) -> Dict[Position, str]:
    """A label for every position; a marked nesting at q also names q.1 and q.2, its two sides"""
    given = given or {}
    labels: Dict[Position, str] = {}

    def visit(node: NestedSequent, pos: Position) -> None:
        x = labels[pos]
        for k, child in enumerate(node.children, start=1):
            q = pos + (k,)
            labels[q] = given.get(q) or f"{x}.{k}"
            if isinstance(child, PlainChild):
                visit(child.body, q)
            else:
                labels[q + (1,)] = given.get(q + (1,)) or f"{labels[q]}.1"
                labels[q + (2,)] = given.get(q + (2,)) or f"{labels[q]}.2"

    labels[()] = given.get(()) or root
    visit(ns, ())
    return labels


def tl_map(root: str, ns: NestedSequent, logic: Optional[LogicSpec] = None,
           names: Optional[Mapping[Position, str]] = None) -> LabelledSequent:
    labels = node_labels(root, ns, names)
    relations: List[Term] = []
    left: List[LabelledFormula] = []
    right: List[LabelledFormula] = []

    def put(x: str, s) -> None:
        left.extend(LabelledFormula(x, f) for f in s.ante)
        right.extend(LabelledFormula(x, f) for f in s.succ)

    def visit(node: NestedSequent, pos: Position) -> None:
        x = labels[pos]
        put(x, node)
        for k, child in enumerate(node.children, start=1):
            q = pos + (k,)
            if isinstance(child, PlainChild):
                relations.append(_edge(logic, child.index, x, labels[q]))
                visit(child.body, q)
            else:
                y1, y2 = labels[q + (1,)], labels[q + (2,)]
                relations.append(NbrPair(x, y1, y2))
                put(y1, child.left)
                put(y2, child.right)

    visit(ns, ())
    return LabelledSequent(frozenset(relations), tuple(left), tuple(right))


def _parents(ls: LabelledSequent) -> Tuple[Dict[str, Term], List[str]]:
    parents: Dict[str, Term] = {}
    problems: List[str] = []
    for t in sorted(ls.relations, key=render_term):
        if not isinstance(t, _EDGES):
            problems.append(f"{render_term(t)} has no nested counterpart")
            continue
        targets = (t.first, t.second) if isinstance(t, NbrPair) else (t.target,)
        for y in targets:
            if y in parents:
                problems.append(f"{y} has two parents")
            parents[y] = t
    return parents, problems


def lbns_conditions(ls: LabelledSequent) -> List[str]:
    """Violations of the tree shape an image of a nested sequent must have"""
    parents, problems = _parents(ls)
    if ls.right_atoms:
        problems.append("membership atoms have no nested counterpart")
    labels = ls.labels()
    roots = [x for x in labels if x not in parents]
    if len(roots) != 1:
        problems.append(f"expected one root label, found {len(roots)}")
    for x in labels:
        seen = {x}
        y = x
        while y in parents:
            y = parents[y].source
            if y in seen:
                problems.append(f"relational atoms form a cycle through {x}")
                break
            seen.add(y)
    for t in parents.values():
        if isinstance(t, NbrPair):
            for y in (t.first, t.second):
                if any(s.source == y for s in parents.values()):
                    problems.append(f"{y} sits in a marked nesting and cannot have children")
    return problems


def tl_unmap(ls: LabelledSequent, logic: Optional[LogicSpec] = None) -> Tuple[NestedSequent, str, Dict[Position, str]]:
    """Inverse of tl_map on treelike sequents; returns the nested sequent, its root label and position names"""
    problems = lbns_conditions(ls)
    if problems:
        raise TranslationError("not treelike: " + "; ".join(problems))
    parents, _ = _parents(ls)
    labels = ls.labels() or ["x"]
    root = next(x for x in labels if x not in parents)
    children: Dict[str, List[Term]] = {}
    for y, t in parents.items():
        if not isinstance(t, NbrPair) or y == t.first:
            children.setdefault(t.source, []).append(t)
    names: Dict[Position, str] = {(): root}

    def child_key(t: Term) -> Tuple:
        return label_key(t.first if isinstance(t, NbrPair) else t.target)

    def build(x: str, pos: Position) -> NestedSequent:
        ante, succ = ls.at(x)
        kids = []
        for k, t in enumerate(sorted(children.get(x, []), key=child_key), start=1):
            q = pos + (k,)
            if isinstance(t, NbrPair):
                names[q + (1,)], names[q + (2,)] = t.first, t.second
                kids.append(MarkedChild(Sequent(*ls.at(t.first)), Sequent(*ls.at(t.second))))
                continue
            names[q] = t.target
            index = t.index if isinstance(t, RelIdx) else None
            kids.append(PlainChild(index, build(t.target, q)))
        return NestedSequent(ante, succ, tuple(kids))

    return build(root, ()), root, names


# --- image rules ------------------------------------------------------------

def image_rule(ns_rule: str) -> str:
    return f"TL({ns_rule})"


def image_base(rule: str) -> str:
    if not (rule.startswith("TL(") and rule.endswith(")")):
        raise RuleApplicationError(f"{rule} is not an image rule")
    return rule[3:-1]


@lru_cache(maxsize=None)
def lbns_rule_table(logic: LogicSpec) -> RuleTable:
    rules = tuple(replace(r, name=image_rule(r.name)) for r in ns_rule_table(logic).rules)
    return RuleTable("lbns", logic, rules)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise RuleApplicationError(message)


def _labels(sel: Selection, count: int, rule: str) -> Tuple[str, ...]:
    _require(len(sel.labels) == count, f"{rule} needs {count} labels")
    return tuple(sel.labels)


def _fresh(goal: LabelledSequent, *labels: str) -> None:
    used = goal.names()
    for y in labels:
        _require(y not in used, f"{y} is not fresh")
    _require(len(set(labels)) == len(labels), "fresh labels must be distinct")


def _local(logic: LogicSpec, rule: str, goal: LabelledSequent, x: str, sel: Selection) -> List[LabelledSequent]:
    ante, succ = goal.at(x)
    return [goal.replace_at(x, a, s) for a, s in local_premises(logic, rule, sel, ante, succ)]


def tl_apply(logic: LogicSpec, rule: str, goal: LabelledSequent, sel: Selection) -> List[LabelledSequent]:
    """Apply the labelled image of a nested rule; labels[0] is the node the rule acts on"""
    ns_rule = image_base(rule)
    if ns_rule not in ns_rule_table(logic):
        raise RuleApplicationError(f"{rule} is not a rule of LbNS for {logic}")
    base, idx = rule_parts(ns_rule)
    p = sel.principal
    _require(bool(sel.labels), f"{rule} needs a label")
    x = sel.labels[0]
    has = goal.relations.__contains__

    if base == "impR" and logic.is_mlj:
        x, y = _labels(sel, 2, rule)
        _require(isinstance(p, Imp), "impR needs an implication")
        _fresh(goal, y)
        return [goal.remove_right(LabelledFormula(x, p)).extend(
            [Rel(x, y)], [LabelledFormula(y, p.left)], [LabelledFormula(y, p.right)])]
    if base == "lift":
        x, y = _labels(sel, 2, rule)
        _require(has(Rel(x, y)), f"lift needs {x} R {y}")
        _require(LabelledFormula(x, p) in goal.left, "lift needs a formula of the parent antecedent")
        return [goal.extend(left=[LabelledFormula(y, p)])]
    if base == "boxR" and idx:
        x, y = _labels(sel, 2, rule)
        i = idx[0]
        _require(isinstance(p, Box) and p.index == i, f"{rule} needs a box [{i}]")
        _fresh(goal, y)
        return [goal.remove_right(LabelledFormula(x, p)).extend([RelIdx(i, x, y)], right=[LabelledFormula(y, p.body)])]
    if base in ("boxL", "4", "d"):
        i, j = idx
        _require(isinstance(p, Box) and p.index == i and LabelledFormula(x, p) in goal.left,
                 f"{rule} needs [{i}] in the antecedent")
        _require(i in logic.upset(j), f"{i} is not above {j}")
        x, y = _labels(sel, 2, rule)
        if base == "d":
            _require(logic.has(j, Axiom.D), f"{rule} needs D at {j}")
            _fresh(goal, y)
            return [goal.extend([RelIdx(j, x, y)], [LabelledFormula(y, p.body)])]
        _require(has(RelIdx(j, x, y)), f"{rule} needs {x} R_{j} {y}")
        if base == "4":
            _require(logic.has(i, Axiom.FOUR), f"{rule} needs 4 at index {i}")
            return [goal.extend(left=[LabelledFormula(y, p)])]
        return [goal.extend(left=[LabelledFormula(y, p.body)])]
    if base == "boxR_e":
        x, y1, y2 = _labels(sel, 3, rule)
        _require(isinstance(p, Box), "boxR_e needs a box in the succedent")
        _fresh(goal, y1, y2)
        return [goal.remove_right(LabelledFormula(x, p)).extend(
            [NbrPair(x, y1, y2)], [LabelledFormula(y2, p.body)], [LabelledFormula(y1, p.body)])]
    if base in ("M_n", "boxL_e"):
        x, y1, y2 = _labels(sel, 3, rule)
        pair = NbrPair(x, y1, y2)
        _require(has(pair), f"{rule} needs {render_term(pair)}")
        if base == "M_n":
            return [goal.extend(left=[LabelledFormula(y2, BOTTOM)])]
        _require(isinstance(p, Box) and LabelledFormula(x, p) in goal.left, "boxL_e needs a box in the antecedent")
        rest = goal.without_relation(pair)
        first = rest.drop_label(y2).extend([Nbr(x, y1)], [LabelledFormula(y1, p.body)])
        second = rest.drop_label(y1).extend([Nbr(x, y2)], right=[LabelledFormula(y2, p.body)])
        return [first, second]
    return _local(logic, ns_rule, goal, x, sel)


def lbns_check(logic: LogicSpec, d: Derivation[LabelledSequent]) -> CheckReport:
    return check_tree(d, lambda node: tl_apply(logic, node.rule, node.conclusion, node.selection))


def tl_translate(logic: LogicSpec, d: Derivation[NestedSequent], root: str = "x",
                 names: Optional[Mapping[Position, str]] = None) -> Derivation[LabelledSequent]:
    """Map every sequent of a nested proof to its labelled image; new nodes get fresh labels"""

    def walk(node: Derivation[NestedSequent], env: Dict[Position, str]) -> Derivation[LabelledSequent]:
        conclusion = tl_map(root, node.conclusion, logic, env)
        sel = node.selection
        at = tuple(sel.at)
        base, _ = rule_parts(node.rule)
        x = env[at]
        labels: Tuple[str, ...] = (x,)
        envs = None
        opened = (base == "impR" and logic.is_mlj) or base in ("boxR", "d", "boxR_e")
        if base in ("lift", "boxL", "4"):
            labels = (x, env[at + (sel.child,)])
        elif opened:
            q = at + (len(node_at(node.conclusion, at).children) + 1,)
            used = conclusion.names()
            y = fresh_label(f"{x}.{q[-1]}", used)
            env = {**env, q: y}
            if base == "boxR_e":
                while f"{y}.1" in used or f"{y}.2" in used:
                    y = fresh_label(y + "'", used)
                env = {**env, q: y, q + (1,): f"{y}.1", q + (2,): f"{y}.2"}
                labels = (x, f"{y}.1", f"{y}.2")
            else:
                labels = (x, y)
        elif base in ("M_n", "boxL_e"):
            q = at + (sel.child,)
            labels = (x, env[q + (1,)], env[q + (2,)])
            if base == "boxL_e":
                plain = {k: v for k, v in env.items() if k not in (q + (1,), q + (2,))}
                envs = [{**plain, q: labels[1]}, {**plain, q: labels[2]}]
        image_sel = Selection(sel.principal, sel.side, sel.partner, labels=labels)
        subs = tuple(walk(sub, envs[k] if envs else env) for k, sub in enumerate(node.premises))
        return Derivation(conclusion, image_rule(node.rule), image_sel, subs)

    return walk(d, node_labels(root, d.conclusion, names))


# --- labelled calculi -------------------------------------------------------

class LabelledSystem(str, Enum):
    LBNS = "lbns"
    GTI = "gti"
    GTMM = "gtmm"
    GTE = "gte"
    GTM = "gtm"


def system_for(logic: LogicSpec) -> LabelledSystem:
    """The labelled calculus with explicit frame conditions for a logic"""
    return {
        LogicKind.MLJ: LabelledSystem.GTI,
        LogicKind.MULTIMODAL: LabelledSystem.GTMM,
        LogicKind.E: LabelledSystem.GTE,
        LogicKind.M: LabelledSystem.GTM,
    }[logic.kind]


def check_system(system: LabelledSystem, logic: LogicSpec) -> None:
    if system != LabelledSystem.LBNS and system != system_for(logic):
        raise RuleApplicationError(f"{system.value} is not a calculus for {logic}")


_LOCAL_T = ("andL_t", "andR_t", "orL_t", "orR_t")


@lru_cache(maxsize=None)
def gt_rule_table(logic: LogicSpec) -> RuleTable:
    rules = [Rule("init_t", 0), Rule("botL_t", 0), Rule("andL_t", 1), Rule("andR_t", 2, branching=True),
             Rule("orL_t", 2, branching=True), Rule("orR_t", 1), Rule("impL_t", 2, branching=True),
             Rule("impR_t", 1, fresh=logic.is_mlj)]
    if logic.is_mlj:
        rules += [Rule("Ref", 1), Rule("Trans", 1)]
    elif logic.is_multimodal:
        indices = logic.description.sorted_indices()
        for i in indices:
            rules += [Rule(indexed("boxL_t", i), 1), Rule(indexed("boxR_t", i), 1, fresh=True)]
            if logic.has(i, Axiom.T):
                rules.append(Rule(indexed("Ref", i), 1))
            if logic.has(i, Axiom.FOUR):
                rules.append(Rule(indexed("Trans", i), 1))
            if logic.has(i, Axiom.D):
                rules.append(Rule(indexed("Ser", i), 1, fresh=True))
        for j in indices:
            for i in sorted(logic.upset(j) - {j}):
                rules.append(Rule(indexed("Int", j, i), 1))
    elif logic.kind == LogicKind.E:
        rules += [Rule("init_in", 0), Rule("forces", 1), Rule("covers", 2, branching=True),
                  Rule("boxL_et", 1, fresh=True), Rule("boxR_et", 2, branching=True, fresh=True)]
    else:
        rules += [Rule("forces", 1), Rule("boxL_mt", 1, fresh=True), Rule("boxR_mt", 1, fresh=True)]
    return RuleTable(system_for(logic).value, logic, tuple(rules))


def gt_apply(logic: LogicSpec, rule: str, goal: LabelledSequent, sel: Selection) -> List[LabelledSequent]:
    if rule not in gt_rule_table(logic):
        raise RuleApplicationError(f"{rule} is not a rule of {system_for(logic).value} for {logic}")
    base, idx = rule_parts(rule)
    p = sel.principal
    has = goal.relations.__contains__

    if logic.is_mlj and base in ("init_t", "impL_t", "impR_t", "Ref", "Trans"):
        if base == "Ref":
            (x,) = _labels(sel, 1, rule)
            _require(x in goal.labels(), f"{x} does not occur")
            return [goal.extend([Leq(x, x)])]
        if base == "Trans":
            x, y, z = _labels(sel, 3, rule)
            _require(has(Leq(x, y)) and has(Leq(y, z)), f"Trans needs {x} <= {y} and {y} <= {z}")
            return [goal.extend([Leq(x, z)])]
        x, y = _labels(sel, 2, rule)
        if base == "impR_t":
            _require(isinstance(p, Imp), "impR_t needs an implication")
            _fresh(goal, y)
            return [goal.remove_right(LabelledFormula(x, p)).extend(
                [Leq(x, y)], [LabelledFormula(y, p.left)], [LabelledFormula(y, p.right)])]
        _require(has(Leq(x, y)), f"{rule} needs {x} <= {y}")
        if base == "init_t":
            _require(isinstance(p, Atom), "init_t is restricted to atoms")
            _require(LabelledFormula(x, p) in goal.left and LabelledFormula(y, p) in goal.right,
                     f"init_t needs {x}: {render_formula(p)} and {y}: {render_formula(p)}")
            return []
        _require(isinstance(p, Imp) and LabelledFormula(x, p) in goal.left, "impL_t needs an implication")
        return [goal.extend(right=[LabelledFormula(y, p.left)]),
                goal.remove_left(LabelledFormula(x, p)).extend(left=[LabelledFormula(y, p.right)])]

    if base in ("init_t", "botL_t", "impL_t", "impR_t") + _LOCAL_T:
        (x,) = _labels(sel, 1, rule)
        return _local(logic, base[:-2], goal, x, sel)

    if base in ("boxL_t", "boxR_t", "Ref", "Trans", "Ser"):
        i = idx[0]
        if base == "Ref":
            (x,) = _labels(sel, 1, rule)
            _require(logic.has(i, Axiom.T) and x in goal.labels(), f"{rule} needs T at {i} and a known label")
            return [goal.extend([RelIdx(i, x, x)])]
        if base == "Trans":
            x, y, z = _labels(sel, 3, rule)
            _require(has(RelIdx(i, x, y)) and has(RelIdx(i, y, z)), f"{rule} needs a two step R_{i} path")
            return [goal.extend([RelIdx(i, x, z)])]
        x, y = _labels(sel, 2, rule)
        if base == "Ser":
            _fresh(goal, y)
            return [goal.extend([RelIdx(i, x, y)])]
        _require(isinstance(p, Box) and p.index == i, f"{rule} needs a box [{i}]")
        if base == "boxR_t":
            _fresh(goal, y)
            return [goal.remove_right(LabelledFormula(x, p)).extend([RelIdx(i, x, y)],
                                                                   right=[LabelledFormula(y, p.body)])]
        _require(has(RelIdx(i, x, y)) and LabelledFormula(x, p) in goal.left, f"{rule} needs {x} R_{i} {y}")
        return [goal.extend(left=[LabelledFormula(y, p.body)])]
    if base == "Int":
        j, i = idx
        x, y = _labels(sel, 2, rule)
        _require(has(RelIdx(j, x, y)), f"{rule} needs {x} R_{j} {y}")
        return [goal.extend([RelIdx(i, x, y)])]

    if base == "init_in":
        x, a = _labels(sel, 2, rule)
        _require(has(InSet(x, a)) and InSet(x, a) in goal.right_atoms, f"init_in needs {x} in {a} on both sides")
        return []
    if base == "forces":
        x, a = _labels(sel, 2, rule)
        _require(p is not None and has(InSet(x, a)) and has(ForcesAll(a, p)),
                 f"forces needs {x} in {a} and {a} ||- {render_formula(p) if p else '?'}")
        return [goal.extend(left=[LabelledFormula(x, p)])]
    if base == "covers":
        z, a = _labels(sel, 2, rule)
        _require(p is not None and has(Covers(p, a)), "covers needs a covering atom")
        return [goal.extend(right=[LabelledFormula(z, p)]), goal.extend([InSet(z, a)])]
    _require(isinstance(p, Box), f"{rule} needs a box")
    if base in ("boxL_et", "boxL_mt"):
        x, a = _labels(sel, 2, rule)
        _fresh(goal, a)
        added = [NbrOf(a, x), ForcesAll(a, p.body)] + ([Covers(p.body, a)] if base == "boxL_et" else [])
        return [goal.remove_left(LabelledFormula(x, p)).extend(added)]
    x = sel.labels[0] if sel.labels else ""
    _require(LabelledFormula(x, p) in goal.right, f"{rule} needs a box in the succedent")
    if base == "boxR_et":
        x, a, z, y = _labels(sel, 4, rule)
        _require(has(NbrOf(a, x)), f"boxR_et needs {a} in N({x})")
        _fresh(goal, z, y)
        return [goal.extend([InSet(z, a)], right=[LabelledFormula(z, p.body)]),
                goal.extend(left=[LabelledFormula(y, p.body)], right_atoms=[InSet(y, a)])]
    x, a, y = _labels(sel, 3, rule)
    _require(has(NbrOf(a, x)), f"boxR_mt needs {a} in N({x})")
    _fresh(goal, y)
    return [goal.extend([InSet(y, a)], right=[LabelledFormula(y, p.body)])]


def lb_apply(system: LabelledSystem, logic: LogicSpec, rule: str, goal: LabelledSequent,
             sel: Selection) -> List[LabelledSequent]:
    check_system(system, logic)
    if system == LabelledSystem.LBNS:
        return tl_apply(logic, rule, goal, sel)
    return gt_apply(logic, rule, goal, sel)


def lb_check(system: LabelledSystem, logic: LogicSpec, d: Derivation[LabelledSequent]) -> CheckReport:
    """Rule-by-rule check, freshness conditions included"""
    return check_tree(d, lambda node: lb_apply(system, logic, node.rule, node.conclusion, node.selection))


# --- goals ------------------------------------------------------------------

def image_goal(logic: LogicSpec, ls: LabelledSequent) -> LabelledSequent:
    """The image-calculus reading of a goal of the frame-condition calculus"""
    if ls.right_atoms:
        raise TranslationError("membership atoms in a goal are not supported")
    relations: List[Term] = []
    for t in ls.relations:
        if logic.is_mlj and isinstance(t, Leq):
            relations.append(Rel(t.source, t.target))
        elif logic.is_multimodal and isinstance(t, RelIdx):
            relations.append(t)
        else:
            raise TranslationError(f"{render_term(t)} is not supported in a {system_for(logic).value} goal")
    return LabelledSequent(frozenset(relations), ls.left, ls.right)


def system_goal(logic: LogicSpec, ls: LabelledSequent) -> LabelledSequent:
    relations = [Leq(t.source, t.target) if isinstance(t, Rel) else t for t in ls.relations]
    if logic.is_non_normal and relations:
        raise TranslationError("relational atoms in a non-normal goal are not supported")
    return LabelledSequent(frozenset(relations), ls.left, ls.right)


# --- expansion of image proofs ----------------------------------------------

Entry = Tuple[LabelledSequent, str, Selection]
Virtual = Dict[Tuple[str, Formula], str]
Parents = Dict[str, Tuple[str, Optional[int]]]


def _wrap(steps: List[Entry], tail: Derivation[LabelledSequent]) -> Derivation[LabelledSequent]:
    for conclusion, rule, sel in reversed(steps):
        tail = Derivation(conclusion, rule, sel, (tail,))
    return tail


def _nbhd_name(used: Iterable[str]) -> str:
    taken = set(used)
    n = 1
    while f"a{n}" in taken:
        n += 1
    return f"a{n}"


def _mark(d: Derivation[LabelledSequent], origin: Tuple[Tuple[str, Selection], ...]) -> Derivation[LabelledSequent]:
    return Derivation(d.conclusion, d.rule, replace(d.selection, origin=origin), d.premises)


class _Expansion:
    """Rebuilds an image proof in the frame-condition calculus.

    Lifted formulas (lift, and 4 for boxes) get no node of their own: they are
    remembered as virtual occurrences pointing at the label they came from, and
    rules on them act at that label after the relational atom is derived.
    """

    def __init__(self, logic: LogicSpec):
        self.logic = logic

    def apply(self, rule: str, seq: LabelledSequent, sel: Selection) -> List[LabelledSequent]:
        try:
            return gt_apply(self.logic, rule, seq, sel)
        except RuleApplicationError as e:
            raise TranslationError(f"{rule} does not apply during expansion: {e}")

    def step(self, steps: List[Entry], seq: LabelledSequent, rule: str, sel: Selection) -> LabelledSequent:
        premises = self.apply(rule, seq, sel)
        steps.append((seq, rule, sel))
        return premises[0]

    def node(self, steps: List[Entry], seq: LabelledSequent, rule: str, sel: Selection,
             subs: Iterable) -> Derivation[LabelledSequent]:
        return _wrap(steps, Derivation(seq, rule, sel, tuple(subs)))

    def resolve(self, seq: LabelledSequent, virtual: Virtual, x: str, f: Formula) -> str:
        if LabelledFormula(x, f) in seq.left:
            return x
        origin = virtual.get((x, f))
        if origin is None or LabelledFormula(origin, f) not in seq.left:
            raise TranslationError(f"{x}: {render_formula(f)} has no occurrence to act on")
        return origin

    def path(self, parents: Parents, top: str, bottom: str) -> List[str]:
        labels = [bottom]
        while labels[-1] != top:
            if labels[-1] not in parents:
                raise TranslationError(f"{bottom} is not below {top}")
            labels.append(parents[labels[-1]][0])
        return list(reversed(labels))

    def leq(self, steps: List[Entry], seq: LabelledSequent, parents: Parents, o: str, y: str) -> LabelledSequent:
        if Leq(o, y) in seq.relations:
            return seq
        if o == y:
            return self.step(steps, seq, "Ref", Selection(labels=(y,)))
        path = self.path(parents, o, y)
        for m in range(2, len(path)):
            if Leq(o, path[m]) not in seq.relations:
                seq = self.step(steps, seq, "Trans", Selection(labels=(o, path[m - 1], path[m])))
        return seq

    def rel(self, steps: List[Entry], seq: LabelledSequent, parents: Parents, i: int, o: str,
            y: str) -> LabelledSequent:
        if RelIdx(i, o, y) in seq.relations:
            return seq
        if o == y:
            return self.step(steps, seq, indexed("Ref", i), Selection(labels=(y,)))
        path = self.path(parents, o, y)
        for a, b in zip(path, path[1:]):
            e = parents[b][1]
            if RelIdx(i, a, b) not in seq.relations:
                seq = self.step(steps, seq, indexed("Int", e, i), Selection(labels=(a, b)))
        for m in range(2, len(path)):
            if RelIdx(i, o, path[m]) not in seq.relations:
                seq = self.step(steps, seq, indexed("Trans", i), Selection(labels=(o, path[m - 1], path[m])))
        return seq

    def expand(self, node: Derivation[LabelledSequent], seq: LabelledSequent, virtual: Virtual,
               parents: Parents, pending: Tuple[Tuple[str, Selection], ...] = ()) -> Derivation[LabelledSequent]:
        try:
            base, idx = rule_parts(image_base(node.rule))
        except RuleApplicationError as e:
            raise TranslationError(str(e))
        sel = node.selection
        here = pending + ((node.rule, sel),)
        if base in ("lift", "4"):
            x, y = sel.labels
            origin = self.resolve(seq, virtual, x, sel.principal)
            return self.expand(node.premises[0], seq, {**virtual, (y, sel.principal): origin}, parents, here)
        if base == "boxR_e":
            return self.neighbourhood_block(node, seq, virtual, parents, pending)
        if self.logic.is_mlj:
            d = self.intuitionistic(base, node, seq, virtual, parents)
        else:
            d = self.classical(base, idx, node, seq, virtual, parents)
        return _mark(d, here)

    def sub(self, node: Derivation[LabelledSequent], k: int, seq: LabelledSequent, virtual: Virtual,
            parents: Parents) -> Derivation[LabelledSequent]:
        return self.expand(node.premises[k], seq, virtual, parents)

    def intuitionistic(self, base: str, node, seq: LabelledSequent, virtual: Virtual,
                       parents: Parents) -> Derivation[LabelledSequent]:
        sel = node.selection
        p = sel.principal
        y = sel.labels[0]
        steps: List[Entry] = []
        if base == "impR":
            x, y = sel.labels
            t_sel = Selection(p, Side.RIGHT, labels=(x, y))
            (premise,) = self.apply("impR_t", seq, t_sel)
            return Derivation(seq, "impR_t", t_sel, (self.sub(node, 0, premise, virtual, {**parents, y: (x, None)}),))
        if base in ("andR", "orR"):
            t_sel = Selection(p, Side.RIGHT, labels=(y,))
            premises = self.apply(base + "_t", seq, t_sel)
            return Derivation(seq, base + "_t", t_sel,
                              tuple(self.sub(node, k, q, virtual, parents) for k, q in enumerate(premises)))
        o = self.resolve(seq, virtual, y, p)
        rest = {k: v for k, v in virtual.items() if k != (y, p)}
        if base == "botL":
            return Derivation(seq, "botL_t", Selection(p, Side.LEFT, labels=(o,)))
        if base in ("init", "impL"):
            seq = self.leq(steps, seq, parents, o, y)
            t_sel = Selection(p, Side.LEFT, labels=(o, y))
            if base == "init":
                self.apply("init_t", seq, t_sel)
                return self.node(steps, seq, "init_t", t_sel, ())
            first, second = self.apply("impL_t", seq, t_sel)
            return self.node(steps, seq, "impL_t", t_sel,
                             (self.sub(node, 0, first, virtual, parents), self.sub(node, 1, second, rest, parents)))
        # andL and orL on a lifted occurrence decompose it at its origin
        t_sel = Selection(p, Side.LEFT, labels=(o,))
        premises = self.apply(base + "_t", seq, t_sel)
        subs = []
        for k, q in enumerate(premises):
            moved = dict(rest)
            if o != y:
                parts = (p.left, p.right) if base == "andL" else ((p.left, p.right)[k],)
                moved.update({(y, f): o for f in parts})
            subs.append(self.sub(node, k, q, moved, parents))
        return Derivation(seq, base + "_t", t_sel, tuple(subs))

    def classical(self, base: str, idx: Tuple[int, ...], node, seq: LabelledSequent, virtual: Virtual,
                  parents: Parents) -> Derivation[LabelledSequent]:
        sel = node.selection
        p = sel.principal
        steps: List[Entry] = []
        if base in ("boxR", "d"):
            x, y = sel.labels
            if base == "boxR":
                i = idx[0]
                t_sel = Selection(p, Side.RIGHT, labels=(x, y))
                (premise,) = self.apply(indexed("boxR_t", i), seq, t_sel)
                return Derivation(seq, indexed("boxR_t", i), t_sel,
                                  (self.sub(node, 0, premise, virtual, {**parents, y: (x, i)}),))
            i, j = idx
            seq = self.step(steps, seq, indexed("Ser", j), Selection(labels=(x, y)))
            parents = {**parents, y: (x, j)}
            return self.box_left(steps, node, seq, virtual, parents, i, self.resolve(seq, virtual, x, p), y)
        if base == "boxL":
            x, y = sel.labels
            return self.box_left(steps, node, seq, virtual, parents, idx[0], self.resolve(seq, virtual, x, p), y)
        if base == "t":
            (x,) = sel.labels
            i, j = idx[0], p.index
            o = self.resolve(seq, virtual, x, p)
            if o == x and RelIdx(j, x, x) not in seq.relations:
                seq = self.step(steps, seq, indexed("Ref", i), Selection(labels=(x,)))
                if i != j:
                    seq = self.step(steps, seq, indexed("Int", i, j), Selection(labels=(x, x)))
            return self.box_left(steps, node, seq, virtual, parents, j, o, x)
        (x,) = sel.labels
        if sel.side == Side.LEFT and p is not None and self.resolve(seq, virtual, x, p) != x:
            raise TranslationError(f"{image_base(node.rule)} acts on a lifted {render_formula(p)}")
        t_sel = Selection(p, sel.side, labels=(x,))
        premises = self.apply(base + "_t", seq, t_sel)
        return Derivation(seq, base + "_t", t_sel,
                          tuple(self.sub(node, k, q, virtual, parents) for k, q in enumerate(premises)))

    def box_left(self, steps: List[Entry], node, seq: LabelledSequent, virtual: Virtual, parents: Parents,
                 i: int, o: str, y: str) -> Derivation[LabelledSequent]:
        seq = self.rel(steps, seq, parents, i, o, y)
        t_sel = Selection(node.selection.principal, Side.LEFT, labels=(o, y))
        (premise,) = self.apply(indexed("boxL_t", i), seq, t_sel)
        return self.node(steps, seq, indexed("boxL_t", i), t_sel, (self.sub(node, 0, premise, virtual, parents),))

    def neighbourhood_block(self, node, seq: LabelledSequent, virtual: Virtual, parents: Parents,
                            pending: Tuple[Tuple[str, Selection], ...] = ()) -> Derivation[LabelledSequent]:
        """boxR_e, then M_n for M, then boxL_e on the same marked nesting, as one block"""
        x, y1, y2 = node.selection.labels
        boxed = node.selection.principal
        origin = list(pending) + [(node.rule, node.selection)]
        nxt = node.premises[0]
        if self.logic.kind == LogicKind.M:
            if nxt.rule != image_rule("M_n"):
                raise TranslationError("boxR_e is not followed by M_n")
            origin.append((nxt.rule, nxt.selection))
            nxt = nxt.premises[0]
        if nxt.rule != image_rule("boxL_e") or tuple(nxt.selection.labels) != (x, y1, y2):
            raise TranslationError("boxR_e is not followed by boxL_e on the same marked nesting")
        origin.append((nxt.rule, nxt.selection))
        box = nxt.selection.principal
        e = self.logic.kind == LogicKind.E
        steps: List[Entry] = []
        a = next((t.nbhd for t in sorted(seq.relations, key=render_term)
                  if isinstance(t, NbrOf) and t.world == x and ForcesAll(t.nbhd, box.body) in seq.relations
                  and (not e or Covers(box.body, t.nbhd) in seq.relations)), None)
        if a is None:
            a = _nbhd_name(seq.names())
            seq = self.step(steps, seq, "boxL_et" if e else "boxL_mt", Selection(box, Side.LEFT, labels=(x, a)))
        forces_sel = Selection(box.body, Side.LEFT, labels=(y1, a))
        if e:
            r_sel = Selection(boxed, Side.RIGHT, labels=(x, a, y1, y2))
            first, second = self.apply("boxR_et", seq, r_sel)
        else:
            r_sel = Selection(boxed, Side.RIGHT, labels=(x, a, y1))
            (first,) = self.apply("boxR_mt", seq, r_sel)
        (forced,) = self.apply("forces", first, forces_sel)
        left = Derivation(first, "forces", forces_sel, (self.sub(nxt, 0, forced, virtual, parents),))
        subs = [left]
        if e:
            covers_sel = Selection(box.body, Side.RIGHT, labels=(y2, a))
            covered, member = self.apply("covers", second, covers_sel)
            in_sel = Selection(labels=(y2, a))
            self.apply("init_in", member, in_sel)
            subs.append(Derivation(second, "covers", covers_sel,
                                   (self.sub(nxt, 1, covered, virtual, parents), Derivation(member, "init_in", in_sel))))
        rule = "boxR_et" if e else "boxR_mt"
        return _mark(self.node(steps, seq, rule, r_sel, subs), tuple(origin))


def lbns_to_labelled(logic: LogicSpec, d: Derivation[LabelledSequent]) -> Derivation[LabelledSequent]:
    """Expand an image proof into the frame-condition calculus of its logic"""
    root = system_goal(logic, d.conclusion)
    parents: Parents = {}
    for t in root.relations:
        if isinstance(t, Leq):
            parents[t.target] = (t.source, None)
        elif isinstance(t, RelIdx):
            parents[t.target] = (t.source, t.index)
    result = _Expansion(logic).expand(d, root, {}, parents)
    logger.debug("labelled_expansion", system=system_for(logic).value, image=d.size, size=result.size)
    return result


def _heads(node: Derivation[LabelledSequent]) -> List[Derivation[LabelledSequent]]:
    found: List[Derivation[LabelledSequent]] = []
    for p in node.premises:
        found.extend([p] if p.selection.origin else _heads(p))
    return found


def _close_image(logic: LogicSpec, ls: LabelledSequent) -> Derivation[LabelledSequent]:
    for lf in ls.left:
        if lf.formula == BOTTOM:
            sel = Selection(BOTTOM, Side.LEFT, labels=(lf.label,))
            tl_apply(logic, image_rule("botL"), ls, sel)
            return Derivation(ls, image_rule("botL"), sel)
    raise TranslationError("an image premise has no counterpart and is not an axiom")


def labelled_to_lbns(logic: LogicSpec, d: Derivation[LabelledSequent]) -> Derivation[LabelledSequent]:
    """Restrict an expanded proof back to the image calculus using the image steps recorded on its nodes"""

    def restrict(node: Derivation[LabelledSequent], goal: LabelledSequent) -> Derivation[LabelledSequent]:
        marker = node.selection.origin
        if not marker:
            raise TranslationError(f"{node.rule} does not record the image step it stands for")
        steps: List[Entry] = []
        current = goal
        premises: List[LabelledSequent] = []
        for k, (rule, sel) in enumerate(marker):
            try:
                premises = tl_apply(logic, rule, current, sel)
            except RuleApplicationError as e:
                raise TranslationError(f"{rule} does not apply during restriction: {e}")
            steps.append((current, rule, sel))
            if k < len(marker) - 1:
                if len(premises) != 1:
                    raise TranslationError(f"{rule} branches inside a recorded block")
                current = premises[0]
        heads = _heads(node)
        if len(heads) > len(premises):
            raise TranslationError(f"{node.rule} has more continuations than its image rule")
        subs = [restrict(h, q) for h, q in zip(heads, premises)]
        subs += [_close_image(logic, q) for q in premises[len(heads):]]
        conclusion, rule, sel = steps[-1]
        return _wrap(steps[:-1], Derivation(conclusion, rule, sel, tuple(subs)))

    return restrict(d, image_goal(logic, d.conclusion))


# --- search in the frame-condition calculi ----------------------------------

Origin = Tuple[Tuple[str, Selection], ...]


@dataclass(frozen=True)
class GtState:
    """A labelled sequent, the relational atoms its label tree is built from, and the label in focus"""

    sequent: LabelledSequent
    edges: FrozenSet[Term] = frozenset()
    focus: Optional[str] = None


class _Block:
    """Single-premise rule applications collected into one search step.

    The first application after begin() carries the image steps it stands for,
    so a proof found here can be restricted back to the image calculus.
    """

    def __init__(self, logic: LogicSpec, seq: LabelledSequent):
        self.logic = logic
        self.seq = seq
        self.steps: List[Entry] = []
        self._origin: Origin = ()

    def begin(self, origin: Iterable[Tuple[str, Selection]]) -> None:
        self._origin = tuple(origin)

    def _marked(self, sel: Selection) -> Selection:
        if self._origin:
            sel, self._origin = replace(sel, origin=self._origin), ()
        return sel

    def step(self, rule: str, sel: Selection) -> None:
        sel = self._marked(sel)
        (premise,) = gt_apply(self.logic, rule, self.seq, sel)
        self.steps.append((self.seq, rule, sel))
        self.seq = premise

    def last(self, rule: str, sel: Selection) -> List[LabelledSequent]:
        sel = self._marked(sel)
        premises = gt_apply(self.logic, rule, self.seq, sel)
        self.steps.append((self.seq, rule, sel))
        return premises


def _lifts(f: Formula, path: List[Term]) -> List[Tuple[str, Selection]]:
    return [(image_rule("lift"), Selection(f, Side.LEFT, labels=(t.source, t.target))) for t in path]


def _child_name(names: FrozenSet[str], x: str, width: int = 0) -> str:
    """x.k with x.k and its first width sub-labels unused"""
    k = 1
    while any(n in names for n in [f"{x}.{k}"] + [f"{x}.{k}.{m}" for m in range(1, width + 1)]):
        k += 1
    return f"{x}.{k}"


class GtSearch(FocusedSearch[GtState, LabelledSequent]):
    """Depth-first search over labels: saturate the focus label, then open or enter a successor and move there.

    Formulas of ancestor labels are not copied down. A rule on such a formula
    acts at its own label once the relational atom linking the two labels is
    derived from the edges of the tree.
    """

    calculus = "gt"

    def __init__(self, logic: LogicSpec, budget: int = DEFAULT_BUDGET):
        super().__init__(logic, budget)
        self.calculus = system_for(logic).value

    # routes along the edges of the label tree

    def _path(self, edges: FrozenSet[Term], x: str, y: str, k: Optional[int] = None) -> Optional[List[Term]]:
        if x == y:
            return []
        came: Dict[str, Term] = {}
        frontier = [x]
        ordered = sorted(edges, key=render_term)
        while frontier and y not in came:
            nxt = []
            for a in frontier:
                for t in ordered:
                    if t.source == a and t.target != x and t.target not in came and \
                            (k is None or k in self.logic.upset(t.index)):
                        came[t.target] = t
                        nxt.append(t.target)
            frontier = nxt
        if y not in came:
            return None
        path = []
        while y != x:
            path.append(came[y])
            y = came[y].source
        return path[::-1]

    def _t_at(self, k: int) -> Optional[int]:
        return next((i for i in sorted(self.logic.indices) if self.logic.has(i, Axiom.T) and k in self.logic.upset(i)),
                    None)

    def _box_path(self, edges: FrozenSet[Term], k: int, x: str, y: str) -> Optional[List[Term]]:
        """Edges along which a box [k] at x reaches y; empty when it reaches x itself by reflexivity"""
        if x == y:
            if self._t_at(k) is not None:
                return []
            loop = [t for t in sorted(edges, key=render_term)
                    if t.source == x and t.target == x and k in self.logic.upset(t.index)]
            return loop[:1] or None
        path = self._path(edges, x, y, k)
        if path is None or (len(path) > 1 and not self.logic.has(k, Axiom.FOUR)):
            return None
        return path

    def _box_image(self, box: Box, x: str, path: List[Term], last: str = "boxL") -> List[Tuple[str, Selection]]:
        if not path:
            return [(image_rule(indexed("t", self._t_at(box.index))), Selection(box, Side.LEFT, labels=(x,)))]
        steps = [(image_rule(indexed("4", box.index, t.index)), Selection(box, Side.LEFT, labels=(t.source, t.target)))
                 for t in path[:-1]]
        t = path[-1]
        return steps + [(image_rule(indexed(last, box.index, t.index)),
                         Selection(box, Side.LEFT, labels=(t.source, t.target)))]

    def _order(self, block: _Block, path: List[Term], x: str, y: str) -> None:
        if Leq(x, y) in block.seq.relations:
            return
        if x == y:
            block.step("Ref", Selection(labels=(x,)))
            return
        for m in range(1, len(path)):
            z = path[m].target
            if Leq(x, z) not in block.seq.relations:
                block.step("Trans", Selection(labels=(x, path[m].source, z)))

    def _relate(self, block: _Block, k: int, path: List[Term], x: str, y: str) -> None:
        def has(t: Term) -> bool:
            return t in block.seq.relations

        if has(RelIdx(k, x, y)):
            return
        if not path:
            i = self._t_at(k)
            if not has(RelIdx(i, x, x)):
                block.step(indexed("Ref", i), Selection(labels=(x,)))
            if i != k:
                block.step(indexed("Int", i, k), Selection(labels=(x, x)))
            return
        for t in path:
            if t.index != k and not has(RelIdx(k, t.source, t.target)):
                block.step(indexed("Int", t.index, k), Selection(labels=(t.source, t.target)))
        for m in range(1, len(path)):
            z = path[m].target
            if not has(RelIdx(k, x, z)):
                block.step(indexed("Trans", k), Selection(labels=(x, path[m].source, z)))

    def _box_left(self, block: _Block, box: Box, path: List[Term], x: str, y: str) -> None:
        self._relate(block, box.index, path, x, y)
        block.step(indexed("boxL_t", box.index), Selection(box, Side.LEFT, labels=(x, y)))

    def _release(self, block: _Block, edges: FrozenSet[Term], y: str, skip: Optional[LabelledFormula] = None) -> None:
        """Unbox at y every box of another label that reaches it"""
        for lf in [lf for lf in block.seq.left if isinstance(lf.formula, Box)]:
            if lf.label == y or lf == skip or LabelledFormula(y, lf.formula.body) in block.seq.left:
                continue
            path = self._box_path(edges, lf.formula.index, lf.label, y)
            if path is not None:
                block.begin(self._box_image(lf.formula, lf.label, path))
                self._box_left(block, lf.formula, path, lf.label, y)

    # the view of the focus label

    def _view(self, state: GtState) -> List[Tuple[str, Formula, List[Term]]]:
        """Antecedent formulas available at the focus, own occurrences first, each with its route down"""
        f, seq = state.focus, state.sequent
        found = []
        for lf in seq.left:
            if lf.label == f:
                found.append((lf.label, lf.formula, []))
            elif self.logic.is_mlj:
                path = self._path(state.edges, lf.label, f)
                if path is not None:
                    found.append((lf.label, lf.formula, path))
            elif self.logic.is_multimodal and isinstance(lf.formula, Box) and self.logic.has(lf.formula.index,
                                                                                              Axiom.FOUR):
                path = self._box_path(state.edges, lf.formula.index, lf.label, f)
                if path:
                    found.append((lf.label, lf.formula, path))
        return sorted(found, key=lambda item: len(item[2]))

    def _sides(self, state: GtState) -> Tuple[Multiset, Multiset]:
        return tuple(f for _, f, _ in self._view(state)), state.sequent.at(state.focus)[1]

    def _children(self, state: GtState) -> List[str]:
        return [t.target for t in sorted(state.edges, key=render_term)
                if t.source == state.focus and t.target != state.focus]

    # search

    def close(self, state: GtState) -> Optional[Step]:
        seq = state.sequent
        for lf in seq.left:
            if lf.formula == BOTTOM:
                sel = Selection(BOTTOM, Side.LEFT, labels=(lf.label,),
                                origin=((image_rule("botL"), Selection(BOTTOM, Side.LEFT, labels=(lf.label,))),))
                return leaf(seq, "botL_t", sel)
        for rf in seq.right:
            if not isinstance(rf.formula, Atom):
                continue
            z, p = rf.label, rf.formula
            for lf in seq.left:
                if lf.formula != p:
                    continue
                x = lf.label
                here = (image_rule("init"), Selection(p, Side.LEFT, labels=(z,)))
                if not self.logic.is_mlj:
                    if x == z:
                        return leaf(seq, "init_t", Selection(p, Side.LEFT, labels=(z,), origin=(here,)))
                    continue
                path = self._path(state.edges, x, z)
                if path is None:
                    continue
                block = _Block(self.logic, seq)
                block.begin(_lifts(p, path) + [here])
                self._order(block, path, x, z)
                block.last("init_t", Selection(p, Side.LEFT, labels=(x, z)))
                return chain(block.steps, ())
        return None

    def invert(self, state: GtState) -> Optional[Step]:
        f = state.focus
        if f is None:
            return None
        ante, succ = self._sides(state)
        move = invertible_move(self.logic, ante, succ)
        if move is None:
            return None
        rule, sel = move
        p = sel.principal
        block = _Block(self.logic, state.sequent)
        if sel.side == Side.RIGHT:
            at = Selection(p, Side.RIGHT, labels=(f,))
            block.begin([(image_rule(rule), at)])
            premises = block.last(rule + "_t", at)
            return chain(block.steps, tuple(replace(state, sequent=q) for q in premises))
        x, _, path = next(item for item in self._view(state) if item[1] == p)
        base, idx = rule_parts(rule)
        if base == "t":
            block.begin(self._box_image(p, x, path))
            self._box_left(block, p, path, x, f)
            return chain(block.steps, (replace(state, sequent=block.seq),))
        if base == "impL" and self.logic.is_mlj:
            block.begin(_lifts(p, path) + [(image_rule("impL"), Selection(p, Side.LEFT, labels=(f,)))])
            self._order(block, path, x, f)
            premises = block.last("impL_t", Selection(p, Side.LEFT, labels=(x, f)))
        else:
            # decomposing an ancestor's formula happens at its own label, in both calculi
            at = Selection(p, Side.LEFT, labels=(x,))
            block.begin([(image_rule(rule), at)])
            premises = block.last(rule + "_t", at)
        return chain(block.steps, tuple(replace(state, sequent=q) for q in premises))

    def loop_key(self, state: GtState) -> Optional[LoopKey]:
        if state.focus is None or self._children(state):
            return None
        ante, succ = self._sides(state)
        return frozenset(ante), frozenset(succ)

    def choices(self, state: GtState) -> Iterable[Step]:
        if state.focus is None:
            for label in state.sequent.labels():
                yield Step((replace(state, focus=label),), lambda subs: subs[0])
            return
        ante, succ = self._sides(state)
        for rule, sel in choice_moves(self.logic, ante, succ):
            step = self._open(state, rule, sel)
            if step is not None:
                yield step
        for y in self._children(state):
            block = _Block(self.logic, state.sequent)
            if self.logic.is_multimodal:
                self._release(block, state.edges, y)
            target = GtState(block.seq, state.edges, y)
            yield chain(block.steps, (target,)) if block.steps else Step((target,), lambda subs: subs[0])

    def _open(self, state: GtState, rule: str, sel: Selection) -> Optional[Step]:
        f, seq = state.focus, state.sequent
        names = seq.names()
        base, idx = rule_parts(rule)
        block = _Block(self.logic, seq)
        p = sel.principal
        if base in ("E", "M"):
            return self._neighbourhood(state, sel)
        y = _child_name(names, f)
        if base == "impR":
            at = Selection(p, Side.RIGHT, labels=(f, y))
            block.begin([(image_rule("impR"), at)])
            (premise,) = block.last("impR_t", at)
            return chain(block.steps, (GtState(premise, state.edges | {Leq(f, y)}, y),))
        if base == "k":
            i = idx[0]
            edges = state.edges | {RelIdx(i, f, y)}
            at = Selection(p, Side.RIGHT, labels=(f, y))
            block.begin([(image_rule(indexed("boxR", i)), at)])
            block.step(indexed("boxR_t", i), at)
            self._release(block, edges, y)
            return chain(block.steps, (GtState(block.seq, edges, y),))
        j = idx[0]
        if any(isinstance(t, RelIdx) and t.index == j and t.source == f for t in state.edges):
            return None
        edges = state.edges | {RelIdx(j, f, y)}
        # the first box to reach the new label is the one the image rule d unboxes
        first = next(((lf, path) for lf in seq.left if isinstance(lf.formula, Box)
                      for path in [self._box_path(edges, lf.formula.index, lf.label, y)] if path is not None), None)
        if first is None:
            return None
        lf, path = first
        block.begin(self._box_image(lf.formula, lf.label, path, last="d"))
        block.step(indexed("Ser", j), Selection(labels=(f, y)))
        self._box_left(block, lf.formula, path, lf.label, y)
        self._release(block, edges, y, skip=lf)
        return chain(block.steps, (GtState(block.seq, edges, y),))

    def _neighbourhood(self, state: GtState, sel: Selection) -> Step:
        """boxL, boxR, forces and (for E) covers on one pair of boxes"""
        f, seq = state.focus, state.sequent
        e = self.logic.kind == LogicKind.E
        boxed, box = sel.partner, sel.principal
        base = _child_name(seq.names(), f, width=2)
        z, y = f"{base}.1", f"{base}.2"
        a = _nbhd_name(seq.names())
        labels = (f, z, y)
        origin = [(image_rule("boxR_e"), Selection(boxed, Side.RIGHT, labels=labels))]
        if not e:
            origin.append((image_rule("M_n"), Selection(labels=labels)))
        origin.append((image_rule("boxL_e"), Selection(box, Side.LEFT, labels=labels)))
        block = _Block(self.logic, seq)
        block.begin(origin)
        block.step("boxL_et" if e else "boxL_mt", Selection(box, Side.LEFT, labels=(f, a)))
        top = block.seq
        forces_sel = Selection(box.body, Side.LEFT, labels=(z, a))
        if not e:
            r_sel = Selection(boxed, Side.RIGHT, labels=(f, a, z))
            (first,) = gt_apply(self.logic, "boxR_mt", top, r_sel)
            (forced,) = gt_apply(self.logic, "forces", first, forces_sel)

            def build_m(subs: List[Derivation[LabelledSequent]]) -> Derivation[LabelledSequent]:
                left = Derivation(first, "forces", forces_sel, (subs[0],))
                return _wrap(block.steps, Derivation(top, "boxR_mt", r_sel, (left,)))

            return Step((GtState(forced, state.edges, z),), build_m)
        r_sel = Selection(boxed, Side.RIGHT, labels=(f, a, z, y))
        first, second = gt_apply(self.logic, "boxR_et", top, r_sel)
        (forced,) = gt_apply(self.logic, "forces", first, forces_sel)
        covers_sel = Selection(box.body, Side.RIGHT, labels=(y, a))
        covered, member = gt_apply(self.logic, "covers", second, covers_sel)
        in_sel = Selection(labels=(y, a))

        def build_e(subs: List[Derivation[LabelledSequent]]) -> Derivation[LabelledSequent]:
            left = Derivation(first, "forces", forces_sel, (subs[0],))
            right = Derivation(second, "covers", covers_sel, (subs[1], Derivation(member, "init_in", in_sel)))
            return _wrap(block.steps, Derivation(top, "boxR_et", r_sel, (left, right)))

        return Step((GtState(forced, state.edges, z), GtState(covered, state.edges, y)), build_e)


# --- proving ----------------------------------------------------------------

def lb_prove(system: LabelledSystem, logic: LogicSpec, goal: LabelledSequent,
             budget: int = DEFAULT_BUDGET) -> SearchResult[LabelledSequent]:
    """Prove a labelled goal.

    LbNS goals must be treelike: the nested calculus is searched on the
    unlabelled goal and the proof is labelled. The frame-condition calculi are
    searched directly, so their goals may be any graph of order or indexed
    relation atoms.
    """
    check_system(system, logic)
    if system == LabelledSystem.LBNS:
        ns_goal, root, names = tl_unmap(goal, logic)
        result = ns_prove(logic, ns_goal, budget)
        if result.derivation is None:
            return SearchResult(None, result.exhausted, result.nodes)
        return SearchResult(tl_translate(logic, result.derivation, root, names), False, result.nodes)
    image_goal(logic, goal)  # rejects atoms of another calculus
    labels = goal.labels()
    start = GtState(goal, frozenset(goal.relations), labels[0] if len(labels) == 1 else None)
    return GtSearch(logic, budget).run(start)
