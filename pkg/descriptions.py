"""
Logic descriptions (N, order, F), presets and upset computations for nestprover
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from errors import DescriptionError
from formulas import Formula, box_indices


class Axiom(str, Enum):
    D = "D"
    T = "T"
    FOUR = "4"


class LogicKind(str, Enum):
    MLJ = "mlj"
    MULTIMODAL = "multimodal"
    E = "e"
    M = "m"


# Axioms whose nested rules exist but are not n-directed
NOT_N_DIRECTED = {"5", "B"}


@dataclass(frozen=True)
class Description:
    """A finite index set, an order given as pairs (j, i) meaning j below i, and axioms per index"""

    indices: FrozenSet[int]
    order: FrozenSet[Tuple[int, int]]
    axioms: Tuple[Tuple[int, FrozenSet[Axiom]], ...] = ()

    def axioms_of(self, index: int) -> FrozenSet[Axiom]:
        for i, axs in self.axioms:
            if i == index:
                return axs
        return frozenset()

    def has(self, index: int, axiom: Axiom) -> bool:
        return axiom in self.axioms_of(index)

    def below(self, j: int, i: int) -> bool:
        return (j, i) in self.order

    def sorted_indices(self) -> List[int]:
        return sorted(self.indices)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: Tuple[str, ...] = ()


def make_description(indices: Iterable[int], order: Iterable[Tuple[int, int]] = (),
                     axioms: Optional[Mapping[int, Iterable]] = None) -> Description:
    """Build a description from generating pairs; reflexive and transitive closure is added"""
    idx = frozenset(indices)
    pairs = {(i, i) for i in idx} | {tuple(p) for p in order}
    changed = True
    while changed:
        changed = False
        for (a, b) in list(pairs):
            for (c, d) in list(pairs):
                if b == c and (a, d) not in pairs:
                    pairs.add((a, d))
                    changed = True
    axiom_map = []
    for i in sorted(idx):
        raw = (axioms or {}).get(i, ())
        axiom_map.append((i, frozenset(_axiom(i, a) for a in raw)))
    return Description(idx, frozenset(pairs), tuple(axiom_map))


def _axiom(index: int, value) -> Axiom:
    if isinstance(value, Axiom):
        return value
    if str(value) in NOT_N_DIRECTED:
        raise DescriptionError([f"axiom {value} at index {index}: its nested rules are not n-directed"])
    try:
        return Axiom(str(value))
    except ValueError:
        raise DescriptionError([f"unknown axiom {value!r} at index {index}"])


def validate_description(d: Description) -> ValidationReport:
    violations: List[str] = []
    for (j, i) in sorted(d.order):
        if j not in d.indices or i not in d.indices:
            violations.append(f"unknown index in order pair ({j},{i})")
    for i in sorted(d.indices):
        if (i, i) not in d.order:
            violations.append(f"reflexivity fails at ({i},{i})")
    for (a, b) in sorted(d.order):
        for (c, e) in sorted(d.order):
            if b == c and (a, e) not in d.order:
                violations.append(f"transitivity fails at ({a},{b}),({c},{e})")
            if a == e and b == c and a != b and a < b:
                violations.append(f"antisymmetry fails at ({a},{b})")
    for (j, i) in sorted(d.order):
        if d.has(j, Axiom.FOUR) and not d.has(i, Axiom.FOUR):
            violations.append(f"transitive-closed fails at ({j},{i})")
    for i, _ in d.axioms:
        if i not in d.indices:
            violations.append(f"axioms given for unknown index {i}")
    return ValidationReport(not violations, tuple(violations))


def upset(d: Description, j: int, only: Optional[Axiom] = None,
          without: Optional[Axiom] = None) -> FrozenSet[int]:
    """Indices i with j below i, optionally filtered on whether F(i) contains an axiom"""
    if j not in d.indices:
        raise DescriptionError([f"unknown index {j}"])
    result = set()
    for i in d.indices:
        if not d.below(j, i):
            continue
        if only is not None and not d.has(i, only):
            continue
        if without is not None and d.has(i, without):
            continue
        result.add(i)
    return frozenset(result)


PRESETS: Dict[str, Description] = {
    "k": make_description([1]),
    "kd": make_description([1], axioms={1: [Axiom.D]}),
    "kt": make_description([1], axioms={1: [Axiom.T]}),
    "k4": make_description([1], axioms={1: [Axiom.FOUR]}),
    "s4": make_description([1], axioms={1: [Axiom.T, Axiom.FOUR]}),
    "kd4": make_description([1], axioms={1: [Axiom.D, Axiom.FOUR]}),
    "bimodal": make_description([1, 2], order=[(1, 2)]),
}


@dataclass(frozen=True)
class LogicSpec:
    kind: LogicKind
    description: Optional[Description] = None
    name: str = field(default="", compare=False)

    @classmethod
    def intuitionistic(cls) -> "LogicSpec":
        return cls(LogicKind.MLJ, None, "mLJ")

    @classmethod
    def multimodal(cls, description: Description, name: str = "") -> "LogicSpec":
        report = validate_description(description)
        if not report.ok:
            raise DescriptionError(list(report.violations))
        return cls(LogicKind.MULTIMODAL, description, name or "multimodal")

    @classmethod
    def preset(cls, key: str) -> "LogicSpec":
        try:
            description = PRESETS[key.lower()]
        except KeyError:
            raise DescriptionError([f"unknown preset {key!r}; known: {', '.join(sorted(PRESETS))}"])
        return cls.multimodal(description, key.upper() if key.lower() != "bimodal" else "bimodal")

    @classmethod
    def non_normal_e(cls) -> "LogicSpec":
        return cls(LogicKind.E, None, "E")

    @classmethod
    def non_normal_m(cls) -> "LogicSpec":
        return cls(LogicKind.M, None, "M")

    @property
    def is_mlj(self) -> bool:
        return self.kind == LogicKind.MLJ

    @property
    def is_multimodal(self) -> bool:
        return self.kind == LogicKind.MULTIMODAL

    @property
    def is_non_normal(self) -> bool:
        return self.kind in (LogicKind.E, LogicKind.M)

    @property
    def indices(self) -> FrozenSet[int]:
        if self.is_multimodal:
            return self.description.indices
        if self.is_non_normal:
            return frozenset({1})
        return frozenset()

    def check_formula(self, f: Formula) -> None:
        """Reject box indices outside the index set of the logic"""
        unknown = sorted(box_indices(f) - self.indices)
        if unknown:
            raise DescriptionError([f"box index {i} is not an index of {self.name or self.kind.value}"
                                    for i in unknown])

    def upset(self, j: int, only: Optional[Axiom] = None, without: Optional[Axiom] = None) -> FrozenSet[int]:
        return upset(self.description, j, only, without)

    def has(self, index: int, axiom: Axiom) -> bool:
        return self.is_multimodal and self.description.has(index, axiom)

    def __str__(self) -> str:
        return self.name or self.kind.value
