"""
Data models for nestprover documents
"""

from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator

from config import ENGINE_VERSION
from derivations import Derivation, Selection, Side
from descriptions import Description, LogicKind, LogicSpec, make_description
from errors import DocumentError, ProverError
from formulas import parse_formula, render_formula


class Calculus(str, Enum):
    SC = "sc"
    NS = "ns"
    LNS = "lns"
    LBNS = "lbns"
    LABELLED = "labelled"
    GTI = "gti"
    GTMM = "gtmm"
    GTE = "gte"
    GTM = "gtm"


class DescriptionConfig(BaseModel):
    """JSON form of a description: order pairs [j, i] mean j below i, axioms map an index to its names"""

    indices: List[int]
    order: List[Tuple[int, int]] = []
    axioms: Dict[str, List[str]] = {}

    @field_validator("indices")
    @classmethod
    def indices_positive(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("a description needs at least one index")
        if any(i < 1 for i in value):
            raise ValueError("indices must be positive")
        return value

    def to_description(self) -> Description:
        return make_description(self.indices, self.order, {int(k): v for k, v in self.axioms.items()})

    @classmethod
    def from_description(cls, d: Description) -> "DescriptionConfig":
        return cls(indices=d.sorted_indices(),
                   order=sorted((j, i) for (j, i) in d.order if j != i),
                   axioms={str(i): sorted(a.value for a in axs) for i, axs in d.axioms if axs})


class LogicDocument(BaseModel):
    kind: LogicKind
    name: str = ""
    description: Optional[DescriptionConfig] = None

    def to_logic(self) -> LogicSpec:
        if self.kind == LogicKind.MLJ:
            return LogicSpec.intuitionistic()
        if self.kind == LogicKind.E:
            return LogicSpec.non_normal_e()
        if self.kind == LogicKind.M:
            return LogicSpec.non_normal_m()
        if self.description is None:
            raise DocumentError("a multimodal logic needs a description")
        return LogicSpec.multimodal(self.description.to_description(), self.name)

    @classmethod
    def from_logic(cls, logic: LogicSpec) -> "LogicDocument":
        config = DescriptionConfig.from_description(logic.description) if logic.description else None
        return cls(kind=logic.kind, name=logic.name, description=config)


class OriginStep(BaseModel):
    rule: str
    selection: "SelectionDocument"


class SelectionDocument(BaseModel):
    principal: Optional[str] = None
    side: Optional[Side] = None
    partner: Optional[str] = None
    at: List[int] = []
    child: Optional[int] = None
    context: Optional[List[str]] = None
    kept: Optional[List[str]] = None
    unboxed: Optional[List[str]] = None
    labels: List[str] = []
    origin: List[OriginStep] = []


class DerivationNode(BaseModel):
    conclusion: str
    rule: str
    selection: SelectionDocument = Field(default_factory=SelectionDocument)
    premises: List["DerivationNode"] = []


OriginStep.model_rebuild()
DerivationNode.model_rebuild()


class ProofDocument(BaseModel):
    calculus: Calculus
    logic: LogicDocument
    endpoint: str
    derivation: DerivationNode
    metadata: Dict[str, Any] = {}


class OutcomeDocument(BaseModel):
    calculus: Calculus
    status: str
    nodes: int


class CompareReport(BaseModel):
    formula: str
    logic: str
    outcomes: List[OutcomeDocument]
    verdict: str
    countermodel_found: Optional[bool] = None


class CorpusReport(BaseModel):
    logic: str
    seed: int
    total: int
    proved: int
    exhausted: int
    disagreements: List[CompareReport] = []


# --- encoding ---------------------------------------------------------------

def _formulas(items) -> Optional[List[str]]:
    return None if items is None else [render_formula(f) for f in items]


def _parsed(items: Optional[List[str]]):
    return None if items is None else tuple(parse_formula(t) for t in items)


def selection_to_document(sel: Selection) -> SelectionDocument:
    return SelectionDocument(
        principal=render_formula(sel.principal) if sel.principal is not None else None,
        side=sel.side,
        partner=render_formula(sel.partner) if sel.partner is not None else None,
        at=list(sel.at),
        child=sel.child,
        context=_formulas(sel.context),
        kept=_formulas(sel.kept),
        unboxed=_formulas(sel.unboxed),
        labels=list(sel.labels),
        origin=[OriginStep(rule=rule, selection=selection_to_document(s)) for rule, s in sel.origin],
    )


def selection_from_document(doc: SelectionDocument) -> Selection:
    return Selection(
        principal=parse_formula(doc.principal) if doc.principal is not None else None,
        side=doc.side,
        partner=parse_formula(doc.partner) if doc.partner is not None else None,
        at=tuple(doc.at),
        child=doc.child,
        context=_parsed(doc.context),
        kept=_parsed(doc.kept),
        unboxed=_parsed(doc.unboxed),
        labels=tuple(doc.labels),
        origin=tuple((step.rule, selection_from_document(step.selection)) for step in doc.origin),
    )


def derivation_to_document(d: Derivation, render: Callable[[Any], str]) -> DerivationNode:
    return DerivationNode(conclusion=render(d.conclusion), rule=d.rule,
                          selection=selection_to_document(d.selection),
                          premises=[derivation_to_document(p, render) for p in d.premises])


def derivation_from_document(node: DerivationNode, parse: Callable[[str], Any]) -> Derivation:
    try:
        conclusion = parse(node.conclusion)
        selection = selection_from_document(node.selection)
    except ProverError as e:
        raise DocumentError(f"node {node.rule}: {e}")
    return Derivation(conclusion, node.rule, selection,
                      tuple(derivation_from_document(p, parse) for p in node.premises))


def make_proof_document(calculus: Calculus, logic: LogicSpec, d: Derivation, render: Callable[[Any], str],
                        nodes: Optional[int] = None, **metadata: Any) -> ProofDocument:
    meta: Dict[str, Any] = {"engine_version": ENGINE_VERSION, "height": d.height, "size": d.size}
    if nodes is not None:
        meta["nodes"] = nodes
    meta.update(metadata)
    return ProofDocument(calculus=calculus, logic=LogicDocument.from_logic(logic), endpoint=render(d.conclusion),
                         derivation=derivation_to_document(d, render), metadata=meta)


def load_proof_document(text: str) -> ProofDocument:
    try:
        return ProofDocument.model_validate_json(text)
    except ValidationError as e:
        raise DocumentError(f"malformed proof document: {e.error_count()} validation errors") from e
