from typing import Annotated, Any, List, Literal, Optional, Tuple, Union

from pydantic import AfterValidator, BaseModel, Field, model_validator

from convlab.engine.convex_sets import Direction
from convlab.engine.kadec_engine import ProbeProperty, ProbeStatus
from convlab.engine.sequences import FamilyKind
from convlab.engine.space import NormFamily
from convlab.utils.expressions import Expression, ExpressionError
from convlab.utils.rationals import format_rational, parse_rational


def _expression(value: Any) -> str:
    try:
        return Expression(value).source
    except ExpressionError as exc:
        raise ValueError(str(exc)) from exc


def _rational(value: Any) -> str:
    return format_rational(parse_rational(value))


# Rational arithmetic in n, e.g. "1 + 1/n"
ExprStr = Annotated[Union[str, int], AfterValidator(_expression)]
# Exact rational, e.g. "1/3", 2 or "0.25"
RationalStr = Annotated[Union[str, int], AfterValidator(_rational)]
# [[index, value], ...]; both sides may use n
VectorSpec = List[Tuple[ExprStr, ExprStr]]


class SlabSpec(BaseModel):
    """|<L, direction>| <= bound"""
    direction: VectorSpec
    bound: RationalStr = "1"


class NormSpecModel(BaseModel):
    """Norm descriptor"""
    family: NormFamily
    slabs: List[SlabSpec] = Field(default_factory=list)
    radius: Optional[RationalStr] = None  # predualOfBall only
    base: Optional["NormSpecModel"] = None  # predualOfBall only
    inner: Optional["NormSpecModel"] = None  # product2 only
    slot: Optional[int] = None  # product2 only

    @model_validator(mode="after")
    def _fields_match_family(self):
        if self.family == NormFamily.PREDUAL_OF_BALL:
            if self.base is None or self.radius is None:
                raise ValueError("predualOfBall needs base and radius")
        elif self.slabs or self.radius is not None or self.base is not None:
            raise ValueError("slabs, radius and base belong to predualOfBall")
        if self.family == NormFamily.PRODUCT2:
            if self.inner is None or self.slot is None:
                raise ValueError("product2 needs inner and slot")
            if self.slot < 0:
                raise ValueError("slot must be a non-negative index")
        elif self.inner is not None or self.slot is not None:
            raise ValueError("inner and slot belong to product2")
        return self


# =============================================================================
# Sets
# =============================================================================

class HyperplaneSpec(BaseModel):
    kind: Literal["hyperplane"]
    functional: VectorSpec
    level: ExprStr = "0"


class HalfspaceSpec(BaseModel):
    kind: Literal["halfspace"]
    functional: VectorSpec
    level: ExprStr = "0"
    direction: Direction = Direction.LE


class NormBallSpec(BaseModel):
    kind: Literal["ball"]
    center: VectorSpec = Field(default_factory=list)
    radius: ExprStr
    norm: Optional[NormSpecModel] = None  # defaults to the scenario norm


class PolytopeSpec(BaseModel):
    kind: Literal["polytope"] = "polytope"
    vertices: List[VectorSpec] = Field(min_length=1)


class MinkowskiSumSpec(BaseModel):
    """base + ball of the scenario norm around 0"""
    kind: Literal["minkowski_sum"]
    base: "SetSpec"
    radius: ExprStr


class IntersectionSpec(BaseModel):
    kind: Literal["intersection"]
    members: List["SetSpec"] = Field(min_length=1)


class SubspaceSliceSpec(BaseModel):
    kind: Literal["subspace_slice"]
    constraints: List[VectorSpec] = Field(min_length=1)
    base: "SetSpec"


class PieceSpec(BaseModel):
    slope: VectorSpec = Field(default_factory=list)
    offset: ExprStr = "0"


class EpigraphSpec(BaseModel):
    """Epigraph of max(pieces) on domain; no pieces means the indicator of domain."""
    kind: Literal["epigraph"]
    pieces: List[PieceSpec] = Field(default_factory=list)
    domain: Optional[PolytopeSpec] = None

    @model_validator(mode="after")
    def _has_function(self):
        if not self.pieces and self.domain is None:
            raise ValueError("an epigraph needs pieces or a domain")
        return self


SetSpec = Annotated[
    Union[HyperplaneSpec, HalfspaceSpec, NormBallSpec, PolytopeSpec, MinkowskiSumSpec,
          IntersectionSpec, SubspaceSliceSpec, EpigraphSpec],
    Field(discriminator="kind"),
]

MinkowskiSumSpec.model_rebuild()
IntersectionSpec.model_rebuild()
SubspaceSliceSpec.model_rebuild()
NormSpecModel.model_rebuild()


# =============================================================================
# Sequences and families
# =============================================================================

class SequenceSpec(BaseModel):
    """C_n given by expressions in n, with a constant declared limit"""
    generator: SetSpec
    limit: SetSpec
    start_index: int = Field(default=1, ge=1)


class FunctionalSequenceSpec(BaseModel):
    generator: VectorSpec
    limit: VectorSpec
    start_index: int = Field(default=1, ge=1)


class VectorSequenceSpec(BaseModel):
    generator: VectorSpec
    limit: VectorSpec = Field(default_factory=list)
    start_index: int = Field(default=1, ge=1)


class FamilySpec(BaseModel):
    id: str
    kind: FamilyKind
    points: List[VectorSpec] = Field(default_factory=list)
    sets: List[SetSpec] = Field(default_factory=list)
    member_ids: Optional[List[str]] = None

    @model_validator(mode="after")
    def _members_match_kind(self):
        if self.kind == FamilyKind.POINTS:
            if not self.points or self.sets:
                raise ValueError("a points family lists points only")
        elif not self.sets or self.points:
            raise ValueError(f"a {self.kind.value} family lists sets only")
        if self.kind in (FamilyKind.COMPACT, FamilyKind.WEAK_COMPACT):
            if any(s.kind != "polytope" for s in self.sets):
                raise ValueError(f"{self.kind.value} families hold polytopes")
        count = len(self.points) + len(self.sets)
        if self.member_ids is not None and len(self.member_ids) != count:
            raise ValueError("member_ids needs one id per member")
        return self


_POINT_CHECKS = {"wijsman", "mosco", "level_set"}
_GAP_KINDS = {
    "compact_gap": {FamilyKind.POINTS, FamilyKind.COMPACT},
    "weak_compact_gap": {FamilyKind.WEAK_COMPACT},
    "slice": {FamilyKind.BOUNDED},
}


class CheckSpec(BaseModel):
    check: Literal["wijsman", "compact_gap", "weak_compact_gap", "slice", "mosco", "upper_gap",
                   "level_set"]
    family: str
    expect: Optional[Literal["supported", "refuted"]] = None


class ScenarioConfig(BaseModel):
    """One scenario file"""
    name: str = Field(min_length=1)
    description: str = ""
    schema_version: int = 1
    norm: NormSpecModel
    horizon: Optional[int] = Field(default=None, ge=4)
    tolerance: RationalStr = "0"
    tail_samples: Optional[int] = Field(default=None, ge=0)
    sequence: Optional[SequenceSpec] = None
    functionals: Optional[FunctionalSequenceSpec] = None
    level: RationalStr = "1"
    families: List[FamilySpec] = Field(default_factory=list)
    checks: List[CheckSpec] = Field(min_length=1)

    @model_validator(mode="after")
    def _checks_reference_families(self):
        kinds = {}
        for family in self.families:
            if family.id in kinds:
                raise ValueError(f"duplicate family id {family.id!r}")
            kinds[family.id] = family.kind
        for check in self.checks:
            if check.family not in kinds:
                raise ValueError(f"check {check.check} references unknown family {check.family!r}")
            kind = kinds[check.family]
            if check.check in _POINT_CHECKS and kind != FamilyKind.POINTS:
                raise ValueError(f"{check.check} needs a points family, {check.family!r} is {kind.value}")
            if check.check in _GAP_KINDS and kind not in _GAP_KINDS[check.check]:
                raise ValueError(f"{check.check} cannot use the {kind.value} family {check.family!r}")
            if check.check == "level_set":
                if self.functionals is None:
                    raise ValueError("level_set needs a functionals sequence")
            elif self.sequence is None:
                raise ValueError(f"{check.check} needs a set sequence")
        return self


class ProbeConfig(BaseModel):
    """One probe file"""
    name: str = Field(min_length=1)
    description: str = ""
    schema_version: int = 1
    probe: ProbeProperty
    norm: NormSpecModel
    horizon: Optional[int] = Field(default=None, ge=4)
    tolerance: RationalStr = "0"
    tail_samples: Optional[int] = Field(default=None, ge=0)
    functionals: Optional[FunctionalSequenceSpec] = None
    vectors: Optional[VectorSequenceSpec] = None
    points: List[VectorSpec] = Field(default_factory=list)
    family: List[PolytopeSpec] = Field(default_factory=list)
    expect: Optional[ProbeStatus] = None

    @model_validator(mode="after")
    def _inputs_match_probe(self):
        needs_functionals = self.probe != ProbeProperty.LUR
        needs_vectors = self.probe in (ProbeProperty.LUR, ProbeProperty.PROPERTY_STAR)
        if needs_functionals and self.functionals is None:
            raise ValueError(f"{self.probe.value} needs functionals")
        if needs_vectors and self.vectors is None:
            raise ValueError(f"{self.probe.value} needs vectors")
        if self.probe == ProbeProperty.W_STAR_TAU_KADEC and not self.family:
            raise ValueError("wStarTauKadec needs a polytope family")
        return self
