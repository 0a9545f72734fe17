"""Report and certificate records returned by the checking operations."""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class Violation(BaseModel):
    """One failed axiom (or structural defect) with the tuple that exhibits it."""
    axiom: str
    witness: List[Any] = Field(default_factory=list)

    def __str__(self) -> str:
        return f"{self.axiom}: {tuple(self.witness)}"


class ValidationReport(BaseModel):
    """Outcome of validating a table-backed structure.

    `structural` holds dangling-id style defects; `violations` holds axiom
    failures. The report is clean iff both are empty.
    """
    subject: str
    structural: List[Violation] = Field(default_factory=list)
    violations: List[Violation] = Field(default_factory=list)
    checks: int = 0

    @property
    def ok(self) -> bool:
        return not self.structural and not self.violations

    def add_structural(self, axiom: str, *witness: Any) -> None:
        self.structural.append(Violation(axiom=axiom, witness=list(witness)))

    def add(self, axiom: str, *witness: Any) -> None:
        self.violations.append(Violation(axiom=axiom, witness=list(witness)))

    def axioms_failed(self) -> List[str]:
        return sorted({v.axiom for v in self.structural + self.violations})

    def merge(self, other: "ValidationReport", prefix: str = "") -> None:
        for v in other.structural:
            self.structural.append(Violation(axiom=prefix + v.axiom, witness=v.witness))
        for v in other.violations:
            self.violations.append(Violation(axiom=prefix + v.axiom, witness=v.witness))
        self.checks += other.checks


class Certificate(BaseModel):
    """A machine-checked claim: what was checked, how many cases, and the verdict."""
    claim: str
    verified: bool
    checks: int = 0
    witnesses: List[Any] = Field(default_factory=list)
    detail: Dict[str, Any] = Field(default_factory=dict)


class StageRecord(BaseModel):
    """One line of a pipeline transcript."""
    stage: str
    ok: bool
    detail: Dict[str, Any] = Field(default_factory=dict)
    message: Optional[str] = None
