# Pydantic data models package

from .scenario import (
    CheckSpec,
    EpigraphSpec,
    ExprStr,
    FamilySpec,
    FunctionalSequenceSpec,
    HalfspaceSpec,
    HyperplaneSpec,
    IntersectionSpec,
    MinkowskiSumSpec,
    NormBallSpec,
    NormSpecModel,
    PieceSpec,
    PolytopeSpec,
    ProbeConfig,
    RationalStr,
    ScenarioConfig,
    SequenceSpec,
    SetSpec,
    SlabSpec,
    SubspaceSliceSpec,
    VectorSequenceSpec,
    VectorSpec,
)
from .report import (
    EnvironmentRecord,
    ProbeRecord,
    Report,
    TraceRecord,
    VerdictRecord,
    WitnessRecord,
)

__all__ = [
    # Scenario files
    "CheckSpec",
    "EpigraphSpec",
    "ExprStr",
    "FamilySpec",
    "FunctionalSequenceSpec",
    "HalfspaceSpec",
    "HyperplaneSpec",
    "IntersectionSpec",
    "MinkowskiSumSpec",
    "NormBallSpec",
    "NormSpecModel",
    "PieceSpec",
    "PolytopeSpec",
    "ProbeConfig",
    "RationalStr",
    "ScenarioConfig",
    "SequenceSpec",
    "SetSpec",
    "SlabSpec",
    "SubspaceSliceSpec",
    "VectorSequenceSpec",
    "VectorSpec",
    # Reports
    "EnvironmentRecord",
    "ProbeRecord",
    "Report",
    "TraceRecord",
    "VerdictRecord",
    "WitnessRecord",
]
