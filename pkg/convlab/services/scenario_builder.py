"""
Scenario builder.

Turns validated scenario and probe descriptors into engine objects: norms,
sets, set/functional/vector sequences and test families. Errors carry the
descriptor path that produced them.
"""
import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from convlab.config import config
from convlab.engine.convex_sets import (CompactFamily, ConvexSet, Epigraph, Halfspace, Hyperplane,
                                        Intersection, MinkowskiSum, NormBall, PolyFunc, Polytope,
                                        SubspaceSlice)
from convlab.engine.errors import LabError, ScenarioConfigError
from convlab.engine.sequences import (FunctionalSequence, SetSequence, TestFamily,
                                      VectorSequence)
from convlab.engine.space import (DualBallDescription, Functional, NormFamily, NormSpec, Vector,
                                  Window)
from convlab.models.scenario import (FamilySpec, FunctionalSequenceSpec, NormSpecModel,
                                     PolytopeSpec, SequenceSpec, VectorSequenceSpec)
from convlab.utils.expressions import ExpressionError, compile_expression

logger = logging.getLogger(__name__)


def _value(source: str, n: Optional[int], path: str) -> Fraction:
    try:
        expression = compile_expression(source)
        if n is None:
            if not expression.constant:
                raise ScenarioConfigError(f"{path}: {source!r} uses n where a constant is required",
                                          [path])
            return expression(0)
        return expression(n)
    except ExpressionError as exc:
        raise ScenarioConfigError(f"{path}: {exc}", [path]) from exc


def _index(source: str, n: Optional[int], path: str) -> int:
    value = _value(source, n, path)
    if value.denominator != 1 or value < 0:
        raise ScenarioConfigError(f"{path}: index {source!r} is not a natural number at n = {n}",
                                  [path])
    return int(value)


def build_norm(model: NormSpecModel, path: str = "norm") -> NormSpec:
    try:
        if model.family == NormFamily.PREDUAL_OF_BALL:
            constraints = tuple(
                (build_vector(slab.direction, None, f"{path}.slabs.{k}.direction"),
                 Fraction(slab.bound))
                for k, slab in enumerate(model.slabs))
            base = build_norm(model.base, f"{path}.base")
            return NormSpec.predual_of_ball(
                DualBallDescription(constraints, Fraction(model.radius), base))
        if model.family == NormFamily.PRODUCT2:
            return NormSpec.product2(build_norm(model.inner, f"{path}.inner"), model.slot)
        return NormSpec(model.family)
    except (ValueError, LabError) as exc:
        if isinstance(exc, ScenarioConfigError):
            raise
        raise ScenarioConfigError(f"{path}: {exc}", [path]) from exc


def build_vector(spec: Sequence[Tuple[str, str]], n: Optional[int], path: str, cls=Vector):
    entries = {}
    for k, (index, value) in enumerate(spec):
        i = _index(index, n, f"{path}.{k}.0")
        entries[i] = entries.get(i, Fraction(0)) + _value(value, n, f"{path}.{k}.1")
    return cls(entries)


class ScenarioBuilder:
    """Builds engine objects for one ambient norm."""

    def __init__(self, norm: NormSpec):
        self.norm = norm

    def vector(self, spec, n: Optional[int], path: str, cls=Vector):
        """A vector whose window carries the coordinates the norm always reads."""
        v = build_vector(spec, n, path, cls)
        norm = self.norm.inner if self.norm.family == NormFamily.PRODUCT2 else self.norm
        required = norm.required_indices
        if required and not v.window.covers(required):
            return v.rehome(Window.of(v.window, required))
        return v

    def functional(self, spec, n: Optional[int], path: str) -> Functional:
        return self.vector(spec, n, path, Functional)

    def polytope(self, spec: PolytopeSpec, n: Optional[int], path: str) -> Polytope:
        vertices = [self.vector(v, n, f"{path}.vertices.{k}") for k, v in enumerate(spec.vertices)]
        return Polytope(tuple(vertices))

    def set(self, spec, n: Optional[int], path: str) -> ConvexSet:
        try:
            return self._set(spec, n, path)
        except ScenarioConfigError:
            raise
        except (ValueError, LabError) as exc:
            raise ScenarioConfigError(f"{path}: {exc}", [path]) from exc

    def _set(self, spec, n: Optional[int], path: str) -> ConvexSet:
        kind = spec.kind
        if kind == "hyperplane":
            return Hyperplane(self.functional(spec.functional, n, f"{path}.functional"),
                              _value(spec.level, n, f"{path}.level"))
        if kind == "halfspace":
            return Halfspace(self.functional(spec.functional, n, f"{path}.functional"),
                             _value(spec.level, n, f"{path}.level"), spec.direction)
        if kind == "ball":
            norm = build_norm(spec.norm, f"{path}.norm") if spec.norm else self.norm
            return NormBall(self.vector(spec.center, n, f"{path}.center"),
                            _value(spec.radius, n, f"{path}.radius"), norm)
        if kind == "polytope":
            return self.polytope(spec, n, path)
        if kind == "minkowski_sum":
            ball = NormBall(self.vector([], None, path), _value(spec.radius, n, f"{path}.radius"),
                            self.norm)
            return MinkowskiSum(self.set(spec.base, n, f"{path}.base"), ball)
        if kind == "intersection":
            return Intersection(tuple(self.set(m, n, f"{path}.members.{k}")
                                      for k, m in enumerate(spec.members)))
        if kind == "subspace_slice":
            constraints = tuple((self.functional(g, n, f"{path}.constraints.{k}"), Fraction(0))
                                for k, g in enumerate(spec.constraints))
            return SubspaceSlice(constraints, self.set(spec.base, n, f"{path}.base"))
        if kind == "epigraph":
            if self.norm.family != NormFamily.PRODUCT2:
                raise ScenarioConfigError(f"{path}: epigraphs need a product2 scenario norm", [path])
            domain = self.polytope(spec.domain, n, f"{path}.domain") if spec.domain else None
            if spec.pieces:
                pieces = tuple((self.functional(p.slope, n, f"{path}.pieces.{k}.slope"),
                                _value(p.offset, n, f"{path}.pieces.{k}.offset"))
                               for k, p in enumerate(spec.pieces))
                func = PolyFunc(pieces, domain)
            else:
                func = PolyFunc.indicator(domain)
            return Epigraph(func, self.norm)
        raise ScenarioConfigError(f"{path}: unknown set kind {kind!r}", [path])

    # ------------------------------------------------------------------
    # Sequences and families
    # ------------------------------------------------------------------

    def set_sequence(self, spec: SequenceSpec, horizon: Optional[int],
                     tail_samples: Optional[int], path: str = "sequence") -> SetSequence:
        limit = self.set(spec.limit, None, f"{path}.limit")
        horizon = config.DEFAULT_HORIZON if horizon is None else horizon
        try:
            seq = SetSequence(lambda n: self.set(spec.generator, n, f"{path}.generator"), limit,
                              self.norm, horizon=horizon, start_index=spec.start_index,
                              tail_samples=tail_samples)
        except ValueError as exc:
            raise ScenarioConfigError(f"{path}: {exc}", [path]) from exc
        for n in range(seq.start_index, seq.horizon + 1):
            seq.at(n)
        logger.debug("built %d members of %s", seq.horizon - seq.start_index + 1, path)
        return seq

    def functional_sequence(self, spec: FunctionalSequenceSpec, horizon: Optional[int],
                            tail_samples: Optional[int],
                            path: str = "functionals") -> FunctionalSequence:
        limit = self.functional(spec.limit, None, f"{path}.limit")
        horizon = config.DEFAULT_HORIZON if horizon is None else horizon
        self.functional(spec.generator, horizon, f"{path}.generator")
        try:
            return FunctionalSequence(lambda n: self.functional(spec.generator, n, f"{path}.generator"),
                                      limit, self.norm, horizon=horizon,
                                      start_index=spec.start_index, tail_samples=tail_samples)
        except ValueError as exc:
            raise ScenarioConfigError(f"{path}: {exc}", [path]) from exc

    def vector_sequence(self, spec: VectorSequenceSpec, horizon: Optional[int],
                        tail_samples: Optional[int],
                        path: str = "vectors") -> Tuple[VectorSequence, Vector]:
        limit = self.vector(spec.limit, None, f"{path}.limit")
        horizon = config.DEFAULT_HORIZON if horizon is None else horizon
        self.vector(spec.generator, horizon, f"{path}.generator")
        try:
            seq = VectorSequence(lambda n: self.vector(spec.generator, n, f"{path}.generator"),
                                 horizon=horizon, start_index=spec.start_index,
                                 tail_samples=tail_samples)
        except ValueError as exc:
            raise ScenarioConfigError(f"{path}: {exc}", [path]) from exc
        return seq, limit

    def family(self, spec: FamilySpec, path: str) -> TestFamily:
        if spec.points:
            members = [self.vector(p, None, f"{path}.points.{k}") for k, p in enumerate(spec.points)]
        else:
            members = [self.set(s, None, f"{path}.sets.{k}") for k, s in enumerate(spec.sets)]
        try:
            return TestFamily(spec.kind, members, spec.member_ids)
        except ValueError as exc:
            raise ScenarioConfigError(f"{path}: {exc}", [path]) from exc

    def compact_family(self, specs: List[PolytopeSpec], path: str = "family") -> CompactFamily:
        try:
            return CompactFamily([self.polytope(p, None, f"{path}.{k}") for k, p in enumerate(specs)])
        except ValueError as exc:
            raise ScenarioConfigError(f"{path}: {exc}", [path]) from exc
