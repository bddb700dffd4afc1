"""
Seeded random formulas and cross-calculus comparison for nestprover
"""

import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from config import CORPUS_ATOMS, CORPUS_BOX_DEPTH, CORPUS_DEPTH, CORPUS_SIZE, DEFAULT_BUDGET
from derivations import SearchResult
from descriptions import LogicSpec
from formulas import BOTTOM, Atom, Box, Conj, Disj, Formula, Imp, render_formula
from labelled import LabelledSequent, LabelledSystem, lb_prove, system_for
from linear_nested import LinearNestedSequent, lns_prove
from logger import logger
from models import Calculus
from nested import NestedSequent, ns_prove
from semantics import countermodel
from sequents import Sequent, sc_prove

# the four engines of an agreement run; lbns shares its search with ns
ENGINES = (Calculus.SC, Calculus.NS, Calculus.LNS, Calculus.LABELLED)


def random_formula(rng: random.Random, logic: LogicSpec, depth: int = CORPUS_DEPTH, atoms: int = CORPUS_ATOMS,
                   box_depth: int = CORPUS_BOX_DEPTH) -> Formula:
    names = [chr(ord("a") + k) for k in range(max(1, atoms))]
    indices = sorted(logic.indices)

    def gen(d: int, b: int) -> Formula:
        if d == 0 or rng.random() < 0.25:
            return BOTTOM if rng.random() < 0.05 else Atom(rng.choice(names))
        ops = ["and", "or", "imp", "imp"]
        if b > 0 and indices:
            ops += ["box", "box"]
        op = rng.choice(ops)
        if op == "box":
            return Box(rng.choice(indices), gen(d - 1, b - 1))
        left, right = gen(d - 1, b), gen(d - 1, b)
        return {"and": Conj, "or": Disj, "imp": Imp}[op](left, right)

    return gen(depth, box_depth)


def generate_corpus(logic: LogicSpec, seed: int, size: int = CORPUS_SIZE, depth: int = CORPUS_DEPTH,
                    atoms: int = CORPUS_ATOMS, box_depth: int = CORPUS_BOX_DEPTH) -> List[Formula]:
    """The same seed always yields the same list"""
    rng = random.Random(seed)
    return [random_formula(rng, logic, depth, atoms, box_depth) for _ in range(size)]


def resolve_calculus(calculus: Calculus, logic: LogicSpec) -> Calculus:
    """Map the generic labelled choice to the frame calculus of the logic"""
    if calculus == Calculus.LABELLED:
        return Calculus(system_for(logic).value)
    return calculus


def prove_formula(calculus: Calculus, logic: LogicSpec, f: Formula, budget: int = DEFAULT_BUDGET) -> SearchResult:
    calculus = resolve_calculus(calculus, logic)
    if calculus == Calculus.SC:
        return sc_prove(logic, Sequent.goal(f), budget)
    if calculus == Calculus.NS:
        return ns_prove(logic, NestedSequent.goal(f), budget)
    if calculus == Calculus.LNS:
        return lns_prove(logic, LinearNestedSequent.single(Sequent.goal(f)), budget)
    return lb_prove(LabelledSystem(calculus.value), logic, LabelledSequent.goal(f), budget)


@dataclass
class Outcome:
    calculus: Calculus
    status: str
    nodes: int


@dataclass
class Comparison:
    formula: Formula
    outcomes: List[Outcome] = field(default_factory=list)
    countermodel_found: Optional[bool] = None

    @property
    def statuses(self) -> List[str]:
        return [o.status for o in self.outcomes]

    @property
    def agreed(self) -> bool:
        """Engines that finished within budget all agree"""
        decided = {s for s in self.statuses if s != "exhausted"}
        return len(decided) <= 1

    @property
    def exhausted(self) -> bool:
        return "exhausted" in self.statuses

    @property
    def verdict(self) -> str:
        if not self.agreed:
            return "disagreement"
        if self.exhausted:
            return "exhausted"
        return self.statuses[0] if self.statuses else "empty"


def compare(logic: LogicSpec, f: Formula, budget: int = DEFAULT_BUDGET,
            calculi: Sequence[Calculus] = ENGINES, oracle: bool = False) -> Comparison:
    logic.check_formula(f)
    result = Comparison(f)
    for calculus in calculi:
        search = prove_formula(calculus, logic, f, budget)
        result.outcomes.append(Outcome(resolve_calculus(calculus, logic), search.status, search.nodes))
    if oracle:
        result.countermodel_found = countermodel(logic, f) is not None
    if not result.agreed:
        logger.warning("engines_disagree", formula=render_formula(f), logic=str(logic),
                       outcomes={o.calculus.value: o.status for o in result.outcomes})
    return result


@dataclass
class AgreementReport:
    logic: str
    comparisons: List[Comparison]

    @property
    def total(self) -> int:
        return len(self.comparisons)

    @property
    def disagreements(self) -> List[Comparison]:
        return [c for c in self.comparisons if not c.agreed]

    @property
    def exhausted(self) -> int:
        return sum(1 for c in self.comparisons if c.exhausted)

    @property
    def proved(self) -> int:
        return sum(1 for c in self.comparisons if c.verdict == "proved")


def agreement(logic: LogicSpec, formulas: Sequence[Formula], budget: int = DEFAULT_BUDGET,
              calculi: Sequence[Calculus] = ENGINES) -> AgreementReport:
    """Compare every formula in input order"""
    report = AgreementReport(str(logic), [compare(logic, f, budget, calculi) for f in formulas])
    logger.audit("corpus_compared", subject=str(logic), total=report.total, proved=report.proved,
                 exhausted=report.exhausted, disagreements=len(report.disagreements))
    return report
