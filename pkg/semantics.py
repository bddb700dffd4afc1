"""
Finite Kripke and neighbourhood models: evaluation, frame conditions and bounded countermodel search for nestprover
"""

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

from config import KRIPKE_WORLDS, NBR_WORLDS
from descriptions import Axiom, LogicKind, LogicSpec, ValidationReport
from errors import ModelError
from formulas import Atom, Bottom, Box, Conj, Disj, Formula, Imp, atoms_of
from logger import logger

# the intuitionistic order is stored as relation 0
ORDER = 0

Pairs = FrozenSet[Tuple[int, int]]


class Mode(str, Enum):
    INT = "int"
    MULTI = "multi"
    NBR_E = "nbr-e"
    NBR_M = "nbr-m"


@dataclass(frozen=True)
class KripkeModel:
    size: int
    relations: Tuple[Tuple[int, Pairs], ...]
    valuation: Tuple[FrozenSet[str], ...]

    def relation(self, index: int) -> Pairs:
        for i, pairs in self.relations:
            if i == index:
                return pairs
        return frozenset()

    def successors(self, index: int) -> List[int]:
        """Bitmask of successors per world"""
        masks = [0] * self.size
        for w, v in self.relation(index):
            masks[w] |= 1 << v
        return masks


@dataclass(frozen=True)
class NeighbourhoodModel:
    size: int
    nbr: Tuple[FrozenSet[int], ...]  # per world, neighbourhoods as bitmasks
    valuation: Tuple[FrozenSet[str], ...]


Model = Union[KripkeModel, NeighbourhoodModel]


@dataclass(frozen=True)
class Countermodel:
    model: Model
    world: int
    mode: Mode


def mode_for(logic: LogicSpec) -> Mode:
    return {
        LogicKind.MLJ: Mode.INT,
        LogicKind.MULTIMODAL: Mode.MULTI,
        LogicKind.E: Mode.NBR_E,
        LogicKind.M: Mode.NBR_M,
    }[logic.kind]


# --- evaluation -------------------------------------------------------------

def truth_set(model: Model, f: Formula, mode: Mode) -> int:
    """Worlds forcing f, as a bitmask"""
    kripke = mode in (Mode.INT, Mode.MULTI)
    if kripke != isinstance(model, KripkeModel):
        raise ModelError(f"{mode.value} evaluation needs a {'Kripke' if kripke else 'neighbourhood'} model")
    full = (1 << model.size) - 1
    up = model.successors(ORDER) if mode == Mode.INT else []
    succ: Dict[int, List[int]] = {}

    def ev(g: Formula) -> int:
        if isinstance(g, Atom):
            return sum(1 << w for w in range(model.size) if g.name in model.valuation[w])
        if isinstance(g, Bottom):
            return 0
        if isinstance(g, Conj):
            return ev(g.left) & ev(g.right)
        if isinstance(g, Disj):
            return ev(g.left) | ev(g.right)
        if isinstance(g, Imp):
            a, b = ev(g.left), ev(g.right)
            if mode == Mode.INT:
                return sum(1 << w for w in range(model.size) if up[w] & a & ~b == 0)
            return (full & ~a) | b
        if isinstance(g, Box):
            if mode == Mode.INT:
                raise ModelError("intuitionistic evaluation has no boxes")
            a = ev(g.body)
            if mode == Mode.MULTI:
                if g.index not in succ:
                    succ[g.index] = model.successors(g.index)
                return sum(1 << w for w in range(model.size) if succ[g.index][w] & ~a == 0)
            if mode == Mode.NBR_E:
                return sum(1 << w for w in range(model.size) if a in model.nbr[w])
            return sum(1 << w for w in range(model.size) if any(x & ~a == 0 for x in model.nbr[w]))
        raise TypeError(f"not a formula: {g!r}")

    return ev(f)


def evaluate(model: Model, world: int, f: Formula, mode: Mode) -> bool:
    if not 0 <= world < model.size:
        raise ModelError(f"no world {world}")
    return bool(truth_set(model, f, mode) >> world & 1)


# --- frame conditions -------------------------------------------------------

def _reflexive(pairs: Pairs, size: int) -> Optional[int]:
    return next((w for w in range(size) if (w, w) not in pairs), None)


def _transitive(pairs: Pairs) -> Optional[Tuple[int, int, int]]:
    for (a, b) in sorted(pairs):
        for (c, d) in sorted(pairs):
            if b == c and (a, d) not in pairs:
                return a, b, d
    return None


def _serial(pairs: Pairs, size: int) -> Optional[int]:
    sources = {w for w, _ in pairs}
    return next((w for w in range(size) if w not in sources), None)


def check_frame(model: Model, logic: LogicSpec) -> ValidationReport:
    violations: List[str] = []
    if logic.is_non_normal:
        if not isinstance(model, NeighbourhoodModel):
            return ValidationReport(False, (f"{logic} needs a neighbourhood model",))
        if logic.kind == LogicKind.M:
            full = (1 << model.size) - 1
            for w in range(model.size):
                for x in sorted(model.nbr[w]):
                    missing = [y for y in range(full + 1) if y & x == x and y not in model.nbr[w]]
                    if missing:
                        violations.append(f"supplementation fails at world {w}: {_render_set(x)} is missing "
                                          f"the superset {_render_set(missing[0])}")
        return ValidationReport(not violations, tuple(violations))
    if not isinstance(model, KripkeModel):
        return ValidationReport(False, (f"{logic} needs a Kripke model",))
    if logic.is_mlj:
        order = model.relation(ORDER)
        w = _reflexive(order, model.size)
        if w is not None:
            violations.append(f"reflexivity fails at world {w}")
        bad = _transitive(order)
        if bad is not None:
            violations.append("transitivity fails at {} <= {} <= {}".format(*bad))
        for (w, v) in sorted(order):
            for atom in sorted(model.valuation[w] - model.valuation[v]):
                violations.append(f"persistence fails for {atom} at {w} <= {v}")
        return ValidationReport(not violations, tuple(violations))
    for i in sorted(logic.indices):
        pairs = model.relation(i)
        if logic.has(i, Axiom.D) and _serial(pairs, model.size) is not None:
            violations.append(f"seriality of R_{i} fails at world {_serial(pairs, model.size)}")
        if logic.has(i, Axiom.T) and _reflexive(pairs, model.size) is not None:
            violations.append(f"reflexivity of R_{i} fails at world {_reflexive(pairs, model.size)}")
        if logic.has(i, Axiom.FOUR) and _transitive(pairs) is not None:
            violations.append("transitivity of R_{} fails at {} {} {}".format(i, *_transitive(pairs)))
        for j in sorted(logic.indices):
            if j != i and i in logic.upset(j):
                extra = sorted(model.relation(j) - pairs)
                if extra:
                    violations.append(f"inclusion of R_{j} in R_{i} fails at {extra[0]}")
    return ValidationReport(not violations, tuple(violations))


# --- enumeration ------------------------------------------------------------

def _subsets(items: Sequence) -> List[FrozenSet]:
    """All subsets, smallest first"""
    return [frozenset(c) for r in range(len(items) + 1) for c in itertools.combinations(items, r)]


def _valuations(size: int, atoms: Sequence[str], allowed: Sequence[int]) -> Iterator[Tuple[FrozenSet[str], ...]]:
    for masks in itertools.product(allowed, repeat=len(atoms)):
        yield tuple(frozenset(a for a, m in zip(atoms, masks) if m >> w & 1) for w in range(size))


def _up_closed(size: int, order: Pairs) -> List[int]:
    return [m for m in range(1 << size) if all(not (m >> w & 1) or m >> v & 1 for w, v in order)]


def kripke_frames(logic: LogicSpec, size: int) -> List[Tuple[Tuple[int, Pairs], ...]]:
    """Frames of one size accepted by the logic, fewest edges first"""
    worlds = range(size)
    if logic.is_mlj:
        diagonal = frozenset((w, w) for w in worlds)
        off = [(w, v) for w in worlds for v in worlds if w != v]
        frames = [((ORDER, diagonal | s),) for s in _subsets(off) if _transitive(diagonal | s) is None]
        return frames
    pairs = [(w, v) for w in worlds for v in worlds]
    per_index = []
    for i in sorted(logic.indices):
        candidates = [s for s in _subsets(pairs)
                      if not (logic.has(i, Axiom.D) and _serial(s, size) is not None)
                      and not (logic.has(i, Axiom.T) and _reflexive(s, size) is not None)
                      and not (logic.has(i, Axiom.FOUR) and _transitive(s) is not None)]
        per_index.append([(i, s) for s in candidates])
    frames = []
    for combo in itertools.product(*per_index):
        rel = dict(combo)
        if all(rel[j] <= rel[i] for j in rel for i in rel if j != i and i in logic.upset(j)):
            frames.append(tuple(combo))
    frames.sort(key=lambda frame: sum(len(s) for _, s in frame))
    return frames


def neighbourhood_frames(logic: LogicSpec, size: int) -> List[Tuple[FrozenSet[int], ...]]:
    sets = list(range(1 << size))
    families = _subsets(sets)
    frames = []
    for combo in itertools.product(families, repeat=size):
        frame = tuple(combo)
        empty = NeighbourhoodModel(size, frame, tuple(frozenset() for _ in range(size)))
        if check_frame(empty, logic).ok:
            frames.append(frame)
    frames.sort(key=lambda frame: sum(len(x) for x in frame))
    return frames


def enumerate_models(logic: LogicSpec, atoms: Sequence[str], max_worlds: int) -> Iterator[Model]:
    """Every frame-accepted model up to a size, ordered by size, edge count and valuation bits"""
    atoms = sorted(atoms)
    for size in range(1, max_worlds + 1):
        if logic.is_non_normal:
            for frame in neighbourhood_frames(logic, size):
                for valuation in _valuations(size, atoms, range(1 << size)):
                    yield NeighbourhoodModel(size, frame, valuation)
            continue
        for frame in kripke_frames(logic, size):
            allowed = _up_closed(size, frame[0][1]) if logic.is_mlj else range(1 << size)
            for valuation in _valuations(size, atoms, allowed):
                yield KripkeModel(size, frame, valuation)


def countermodel(logic: LogicSpec, f: Formula, kripke_worlds: int = KRIPKE_WORLDS,
                 nbr_worlds: int = NBR_WORLDS) -> Optional[Countermodel]:
    """The first enumerated model whose world 0 falsifies f, or None within the bounds"""
    if kripke_worlds < 1 or nbr_worlds < 1:
        raise ModelError("countermodel bounds must be positive")
    logic.check_formula(f)
    mode = mode_for(logic)
    bound = nbr_worlds if logic.is_non_normal else kripke_worlds
    checked = 0
    for model in enumerate_models(logic, sorted(atoms_of(f)), bound):
        checked += 1
        if not truth_set(model, f, mode) & 1:
            logger.debug("countermodel_found", logic=str(logic), worlds=model.size, checked=checked)
            return Countermodel(model, 0, mode)
    logger.debug("countermodel_none", logic=str(logic), bound=bound, checked=checked)
    return None


# --- text and dict forms ----------------------------------------------------

def _render_set(mask: int) -> str:
    return "{" + " ".join(str(w) for w in range(mask.bit_length()) if mask >> w & 1) + "}"


def render_model(model: Model) -> str:
    lines = ["worlds: " + " ".join(str(w) for w in range(model.size))]
    if isinstance(model, KripkeModel):
        lines.append("relations:")
        for i, pairs in model.relations:
            name = "<=" if i == ORDER else str(i)
            lines.extend(f"  {name}: {w} {v}" for w, v in sorted(pairs))
    else:
        lines.append("neighbourhoods:")
        for w in range(model.size):
            lines.append(f"  {w}: " + " ".join(_render_set(x) for x in sorted(model.nbr[w])))
    lines.append("valuation:")
    for w in range(model.size):
        lines.append(f"  {w}: " + " ".join(sorted(model.valuation[w])))
    return "\n".join(line.rstrip() for line in lines)


def model_to_dict(model: Model) -> Dict[str, Any]:
    result: Dict[str, Any] = {"worlds": model.size,
                              "valuation": {str(w): sorted(model.valuation[w]) for w in range(model.size)}}
    if isinstance(model, KripkeModel):
        result["relations"] = {("<=" if i == ORDER else str(i)): [list(p) for p in sorted(pairs)]
                               for i, pairs in model.relations}
    else:
        result["neighbourhoods"] = {str(w): [[v for v in range(model.size) if x >> v & 1]
                                             for x in sorted(model.nbr[w])] for w in range(model.size)}
    return result
