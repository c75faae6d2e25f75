from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class TraceRecord(BaseModel):
    """One evaluated cell: value at index n for a test object"""
    n: int
    object_id: str
    value: str  # "p/q", "sqrt(p/q)" or a decimal


class WitnessRecord(BaseModel):
    n: int
    object_id: Optional[str] = None  # verdicts
    lhs: Optional[str] = None
    rhs: Optional[str] = None
    quantity: Optional[str] = None  # probes
    value: Optional[str] = None


class VerdictRecord(BaseModel):
    check: str
    notion: str
    status: str  # "supported" | "refuted"
    horizon: int
    tolerance: str
    max_deviation: str
    exact: bool = True
    witness: Optional[WitnessRecord] = None
    details: Dict[str, Any] = Field(default_factory=dict)
    expected: Optional[str] = None
    matched: Optional[bool] = None


class ProbeRecord(BaseModel):
    property: str
    status: str  # "pass" | "fail" | "vacuous"
    horizon: int
    tolerance: str
    witness: Optional[WitnessRecord] = None
    probe_basis: List[str] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)
    expected: Optional[str] = None
    matched: Optional[bool] = None


class EnvironmentRecord(BaseModel):
    exact: bool  # every reported value was computed in exact arithmetic
    threads: int
    tail_samples: int
    seed: Optional[int] = None


class Report(BaseModel):
    """Result file of one scenario, probe or built-in run"""
    schema_version: int = 1
    scenario: str
    description: str = ""
    verdicts: List[VerdictRecord] = Field(default_factory=list)
    probes: List[ProbeRecord] = Field(default_factory=list)
    traces: List[TraceRecord] = Field(default_factory=list)
    results: Dict[str, Any] = Field(default_factory=dict)  # construction outputs of built-ins
    expected: Optional[str] = None
    matched: bool = True
    environment: EnvironmentRecord
    wall_time: Optional[float] = None  # only with timing enabled; keeps reports reproducible

    def records(self) -> List[Any]:
        return [*self.verdicts, *self.probes]
