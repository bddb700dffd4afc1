"""
Exception hierarchy for nestprover
"""

from typing import List, Optional


class ProverError(Exception):
    """Base class for every error raised by the engines"""


class ParseError(ProverError):
    """Malformed formula, judgment or document text"""

    def __init__(self, message: str, position: Optional[int] = None, text: str = ""):
        self.position = position
        self.text = text
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class DescriptionError(ProverError):
    """A logic description violates the partial-order or transitive-closure conditions"""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("invalid description: " + "; ".join(self.violations))


class RuleApplicationError(ProverError):
    """A rule does not apply to the goal at the given selection"""


class BudgetExceeded(ProverError):
    def __init__(self, nodes: int):
        self.nodes = nodes
        super().__init__(f"search budget exhausted after {nodes} nodes")


class TranslationError(ProverError):
    """A proof does not meet the preconditions of a translation"""


class ModelError(ProverError):
    """Evaluation mode and model kind do not match"""


class DocumentError(ProverError):
    """A proof document cannot be decoded"""
