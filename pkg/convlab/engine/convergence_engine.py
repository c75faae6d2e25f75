"""
Convergence Engine

Horizon-bounded checkers for Wijsman, compact gap, weak compact gap, slice
and Mosco convergence of set sequences, the upper-gap half of gap
convergence, and the level-set criterion for hyperplane sequences.

Every verdict is a statement about the supplied horizon and tolerance: the
tail traces are fitted and compared against the declared limit, never
proved.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

from convlab.engine.cell_pool import cell_pool
from convlab.engine.convex_sets import Hyperplane, contains
from convlab.engine.errors import PreconditionError
from convlab.engine.geometry_engine import GeometryEngine
from convlab.engine.sequences import (FamilyKind, FunctionalSequence, SetSequence, TestFamily,
                                      VectorSequence)
from convlab.engine.space import (NormFamily, Scalar, Vector, Window, compare,
                                  dual_norm_eval, format_scalar, is_exact, norm_eval,
                                  to_float)
from convlab.engine.tail import TailFit, analyze, cauchy_check, limsup_within, vector_limit

logger = logging.getLogger(__name__)


class Notion(str, Enum):
    WIJSMAN = "wijsman"
    COMPACT_GAP = "compact_gap"
    WEAK_COMPACT_GAP = "weak_compact_gap"
    SLICE = "slice"
    MOSCO = "mosco"
    LEVEL_SET = "level_set"
    UPPER_GAP = "upper_gap"


class VerdictStatus(str, Enum):
    SUPPORTED = "supported"
    REFUTED = "refuted"


_GAP_NOTIONS = {
    FamilyKind.POINTS: Notion.COMPACT_GAP,
    FamilyKind.COMPACT: Notion.COMPACT_GAP,
    FamilyKind.WEAK_COMPACT: Notion.WEAK_COMPACT_GAP,
    FamilyKind.BOUNDED: Notion.SLICE,
}


@dataclass(frozen=True)
class Witness:
    object_id: str
    n: int
    lhs: Scalar
    rhs: Scalar

    def to_dict(self) -> Dict[str, Any]:
        return {
            "object_id": self.object_id,
            "n": self.n,
            "lhs": format_scalar(self.lhs),
            "rhs": format_scalar(self.rhs),
        }


@dataclass(frozen=True)
class TraceRow:
    n: int
    object_id: str
    value: Scalar

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "object_id": self.object_id, "value": format_scalar(self.value)}


@dataclass
class ConvergenceVerdict:
    """Outcome of one convergence check."""
    notion: Notion
    status: VerdictStatus
    horizon: int
    tolerance: Fraction
    witness: Optional[Witness] = None
    max_deviation: Scalar = Fraction(0)
    trace: List[TraceRow] = field(default_factory=list)
    exact: bool = True
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def supported(self) -> bool:
        return self.status == VerdictStatus.SUPPORTED

    def to_dict(self) -> Dict[str, Any]:
        return {
            "notion": self.notion.value,
            "status": self.status.value,
            "horizon": self.horizon,
            "tolerance": format_scalar(self.tolerance),
            "witness": self.witness.to_dict() if self.witness else None,
            "max_deviation": format_scalar(self.max_deviation),
            "exact": self.exact,
            "details": self.details,
        }


@dataclass
class TraceOutcome:
    """Per-object reduction of a tail trace."""
    object_id: str
    fit: TailFit
    target: Scalar
    values: Dict[int, Scalar]


def _sorted_rows(rows: Sequence[TraceRow]) -> List[TraceRow]:
    return sorted(rows, key=lambda r: (r.n, r.object_id))


def _worst(outcomes: Sequence[TraceOutcome]) -> Scalar:
    worst: Scalar = Fraction(0)
    for outcome in outcomes:
        if compare(outcome.fit.max_deviation, worst) > 0:
            worst = outcome.fit.max_deviation
    return worst


def _first_failure(outcomes: Sequence[TraceOutcome]) -> Optional[TraceOutcome]:
    for outcome in outcomes:
        if not outcome.fit.converged:
            return outcome
    return None


def _witness_of(outcome: TraceOutcome) -> Witness:
    n = outcome.fit.argmax_n
    return Witness(outcome.object_id, n, outcome.values[n], outcome.target)


def _as_fraction(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(to_float(value)).limit_denominator(10 ** 12)


class ConvergenceEngine:
    """
    Checkers for one set sequence.

    Cells (object, n) are evaluated through the shared cell pool; traces are
    reduced in (n, object id) order.
    """

    def __init__(self, seq: SetSequence, tol: Fraction):
        tol = Fraction(tol)
        if tol < 0:
            raise ValueError("tolerance must be non-negative")
        self.seq = seq
        self.tol = tol
        self.geometry = GeometryEngine(seq.norm)

    # ------------------------------------------------------------------
    # Shared reduction
    # ------------------------------------------------------------------

    def _evaluate(self, objects: Sequence[Tuple[str, Any]], measure) -> Dict[str, Dict[int, Scalar]]:
        tail = self.seq.tail()
        cells = [(oid, obj, n) for oid, obj in objects for n in tail]
        values = cell_pool.map(lambda cell: measure(cell[1], self.seq.at(cell[2])), cells)
        traces: Dict[str, Dict[int, Scalar]] = {oid: {} for oid, _ in objects}
        for (oid, _, n), value in zip(cells, values):
            traces[oid][n] = value
        return traces

    def build_verdict(self, notion: Notion, outcomes: Sequence[TraceOutcome],
                 details: Optional[Dict[str, Any]] = None) -> ConvergenceVerdict:
        rows = [TraceRow(n, o.object_id, v) for o in outcomes for n, v in o.values.items()]
        exact = all(is_exact(r.value) or math.isinf(to_float(r.value)) for r in rows)
        if not exact:
            logger.warning("%s verdict uses inexact (float) values", notion.value)
        failure = _first_failure(outcomes)
        verdict = ConvergenceVerdict(
            notion=notion,
            status=VerdictStatus.REFUTED if failure else VerdictStatus.SUPPORTED,
            horizon=self.seq.horizon,
            tolerance=self.tol,
            witness=_witness_of(failure) if failure else None,
            max_deviation=_worst(outcomes),
            trace=_sorted_rows(rows),
            exact=exact,
            details=details or {},
        )
        logger.info("%s check finished: %s (horizon %d, tol %s)", notion.value,
                    verdict.status.value, self.seq.horizon, format_scalar(self.tol))
        return verdict

    def announce(self, notion: Notion, count: int) -> None:
        logger.info("%s check started: %d test objects, horizon %d, tol %s", notion.value,
                    count, self.seq.horizon, format_scalar(self.tol))

    # ------------------------------------------------------------------
    # Checks
    # ------------------------------------------------------------------

    def wijsman_check(self, pts: TestFamily) -> ConvergenceVerdict:
        """d(x, C_n) -> d(x, C) on the tail for every test point."""
        if pts.kind != FamilyKind.POINTS:
            raise PreconditionError(f"wijsman_check needs a point family, got {pts.kind.value}")
        self.announce(Notion.WIJSMAN, len(pts))
        objects = list(pts.items())
        traces = self._evaluate(objects, self.geometry.distance)
        outcomes = []
        for oid, x in objects:
            target = self.geometry.distance(x, self.seq.limit)
            outcomes.append(TraceOutcome(oid, analyze(traces[oid], target, self.tol), target, traces[oid]))
        return self.build_verdict(Notion.WIJSMAN, outcomes)

    def gap_convergence_check(self, fam: TestFamily, notion: Optional[Notion] = None) -> ConvergenceVerdict:
        """gap(W, C_n) -> gap(W, C) for every W; the family kind fixes the notion."""
        expected = _GAP_NOTIONS[fam.kind]
        if notion is not None and Notion(notion) != expected:
            raise PreconditionError(
                f"{Notion(notion).value} needs a matching family, got {fam.kind.value}")
        self.announce(expected, len(fam))
        objects = fam.as_sets()
        traces = self._evaluate(objects, self.geometry.gap)
        outcomes = []
        for oid, W in objects:
            target = self.geometry.gap(W, self.seq.limit)
            outcomes.append(TraceOutcome(oid, analyze(traces[oid], target, self.tol), target, traces[oid]))
        return self.build_verdict(expected, outcomes)

    def upper_gap_check(self, fam: TestFamily) -> ConvergenceVerdict:
        """limsup gap(W, C_n) <= gap(W, C) + tol for every W."""
        self.announce(Notion.UPPER_GAP, len(fam))
        objects = fam.as_sets()
        traces = self._evaluate(objects, self.geometry.gap)
        outcomes = []
        for oid, W in objects:
            target = self.geometry.gap(W, self.seq.limit)
            fit = limsup_within(traces[oid], target, self.tol)
            outcomes.append(TraceOutcome(oid, fit, target, traces[oid]))
        return self.build_verdict(Notion.UPPER_GAP, outcomes)

    def mosco_check(self, probes: TestFamily) -> ConvergenceVerdict:
        """
        M(i) on the projections of the probes onto C, M(ii) on the
        nearest-point selections of each C_n to each probe.
        """
        if probes.kind != FamilyKind.POINTS:
            raise PreconditionError(f"mosco_check needs a point family, got {probes.kind.value}")
        self.announce(Notion.MOSCO, len(probes))
        limit = self.seq.limit
        recovery = []
        for oid, p in probes.items():
            projected = self.geometry.nearest_point(p, limit)
            if projected.point is not None:
                recovery.append((f"{oid}:M(i)", projected.point))
        first = self._recovery_outcomes(recovery)

        second: List[TraceOutcome] = []
        skipped: List[str] = []
        tail = self.seq.tail()
        for oid, p in probes.items():
            found = cell_pool.map(lambda n: self.geometry.nearest_point(p, self.seq.at(n)).point, tail)
            selection = {n: point for n, point in zip(tail, found) if point is not None}
            label = f"{oid}:M(ii)"
            if len(selection) < len(tail):
                skipped.append(f"{label} (empty C_n)")
                continue
            outcome = self._selection_outcome(label, selection, (p.window,))
            if outcome is None:
                skipped.append(f"{label} (unbounded selection)")
            else:
                second.append(outcome)
        return self._mosco_verdict(first, second, skipped)

    def mosco_selection_check(self, selection: VectorSequence) -> ConvergenceVerdict:
        """M(ii) for an explicit selection x_n in C_n."""
        self.announce(Notion.MOSCO, 1)
        points = {}
        for n in self.seq.tail():
            x = selection.at(n)
            if not contains(self.seq.at(n), x):
                raise PreconditionError(f"selection point x_{n} is not in C_{n}")
            points[n] = x
        outcome = self._selection_outcome("selection:M(ii)", points)
        skipped = [] if outcome is not None else ["selection:M(ii) (unbounded selection)"]
        return self._mosco_verdict([], [outcome] if outcome else [], skipped,
                                   include_first=False)

    # ------------------------------------------------------------------
    # Mosco helpers
    # ------------------------------------------------------------------

    def _recovery_outcomes(self, points: Sequence[Tuple[str, Vector]]) -> List[TraceOutcome]:
        traces = self._evaluate(points, self.geometry.distance)
        return [TraceOutcome(oid, analyze(traces[oid], Fraction(0), self.tol), Fraction(0), traces[oid])
                for oid, _ in points]

    def _selection_outcome(self, label: str, points: Dict[int, Vector],
                           anchors: Sequence[Window] = ()) -> Optional[TraceOutcome]:
        norm = self.seq.norm
        norms = {n: norm_eval(norm, x) for n, x in points.items()}
        if _grows(norms, self.tol):
            logger.info("%s: selection norms grow on the tail; skipped", label)
            return None
        core = self._stable_core(points, anchors)
        if norm.family == NormFamily.ELL1 and not self._escape_vanishes(points, core):
            # weakly convergent sequences in ell1 converge in norm
            logger.info("%s: escaping ell1 mass does not vanish; skipped", label)
            return None
        candidate, allowance = self._weak_limit(points, sorted(core))
        distances = {n: self.geometry.distance(candidate, self.seq.limit) for n in points}
        fit = limsup_within(distances, allowance, self.tol)
        return TraceOutcome(label, fit, allowance, distances)

    def _stable_core(self, points: Dict[int, Vector], anchors: Sequence[Window]) -> FrozenSet[int]:
        """
        Coordinates a weak limit may live on: indices before the tail, the
        limit's window, every anchor window and the window shared by all
        tail members. Mass elsewhere escapes.
        """
        fixed = set(self.seq.limit.window.indices)
        for window in anchors:
            fixed.update(window.indices)
        shared: Optional[set] = None
        for n in points:
            members = set(self.seq.at(n).window.indices)
            shared = members if shared is None else shared & members
        fixed.update(shared or ())
        start = self.seq.tail_start
        return frozenset(i for x in points.values() for i in x.support if i < start or i in fixed)

    def _escape_vanishes(self, points: Dict[int, Vector], core: FrozenSet[int]) -> bool:
        escape = {n: sum((abs(v) for i, v in x.entries if i not in core), Fraction(0))
                  for n, x in points.items()}
        return analyze(escape, Fraction(0), self.tol).converged

    def _weak_limit(self, points: Dict[int, Vector], core: Sequence[int]) -> Tuple[Vector, Fraction]:
        """Candidate weak limit and the ell1 size of its extrapolation error."""
        coords = {n: {i: x.get(i) for i in core} for n, x in points.items()}
        if not core:
            return Vector({}), Fraction(0)
        limit, errors, cauchy = vector_limit(coords, core)
        if cauchy:
            # the ell1 size bounds the sup, ell2 and bvC0 norms
            allowance = sum((_as_fraction(e) for e in errors.values()), Fraction(0))
            return Vector({i: _as_fraction(v) for i, v in limit.items()}), allowance
        return self._cluster_representative(points, core), Fraction(0)

    def _cluster_representative(self, points: Dict[int, Vector], core: Sequence[int]) -> Vector:
        """Farthest-from-C representative of the tol-ball clusters on the last quarter."""
        indices = sorted(points)
        late = indices[len(indices) - max(1, len(indices) // 4):]
        representatives: List[Vector] = []
        for n in late:
            x = Vector({i: points[n].get(i) for i in core})
            if not any(compare(norm_eval(self.seq.norm, x - r), self.tol) <= 0
                       for r in representatives):
                representatives.append(x)
        logger.debug("selection is not Cauchy on the core; %d clusters", len(representatives))
        return max(representatives,
                   key=lambda r: to_float(self.geometry.distance(r, self.seq.limit)))

    def _mosco_verdict(self, first: List[TraceOutcome], second: List[TraceOutcome], skipped: List[str],
                       include_first: bool = True) -> ConvergenceVerdict:
        details: Dict[str, Any] = {
            "M(ii)": _label(second),
            "skipped": skipped,
        }
        if include_first:
            details["M(i)"] = _label(first)
        if not first and include_first:
            details["M(i)"] = "vacuous"
        return self.build_verdict(Notion.MOSCO, first + second, details)


def _label(outcomes: Sequence[TraceOutcome]) -> str:
    if not outcomes:
        return "vacuous"
    failed = _first_failure(outcomes)
    return VerdictStatus.REFUTED.value if failed else VerdictStatus.SUPPORTED.value


def _grows(norms: Dict[int, Scalar], tol: Fraction) -> bool:
    """Norm trace is not Cauchy and keeps climbing on the later half."""
    if any(math.isinf(to_float(v)) for v in norms.values()):
        return True
    if cauchy_check(norms, tol):
        return False
    indices = sorted(norms)
    mid = indices[len(indices) // 2]
    early = max((to_float(norms[n]) for n in indices if n <= mid))
    late = max((to_float(norms[n]) for n in indices if n > mid), default=early)
    return late > early


# =============================================================================
# Module-level operations
# =============================================================================

def wijsman_check(seq: SetSequence, pts: TestFamily, tol) -> ConvergenceVerdict:
    return ConvergenceEngine(seq, tol).wijsman_check(pts)


def gap_convergence_check(seq: SetSequence, fam: TestFamily, tol,
                          notion: Optional[Notion] = None) -> ConvergenceVerdict:
    return ConvergenceEngine(seq, tol).gap_convergence_check(fam, notion)


def upper_gap_check(seq: SetSequence, fam: TestFamily, tol) -> ConvergenceVerdict:
    return ConvergenceEngine(seq, tol).upper_gap_check(fam)


def mosco_check(seq: SetSequence, probes: TestFamily, tol) -> ConvergenceVerdict:
    return ConvergenceEngine(seq, tol).mosco_check(probes)


def mosco_selection_check(seq: SetSequence, selection: VectorSequence, tol) -> ConvergenceVerdict:
    return ConvergenceEngine(seq, tol).mosco_selection_check(selection)


def hyperplane_sequence(fseq: FunctionalSequence, level) -> SetSequence:
    """The level sets {f_n = a} with limit {f = a}."""
    level = Fraction(level)
    return SetSequence(lambda n: Hyperplane(fseq.at(n), level), Hyperplane(fseq.limit, level),
                       fseq.norm, horizon=fseq.horizon, start_index=fseq.start_index,
                       tail_samples=fseq.tail_samples)


def level_set_wijsman_criterion(fseq: FunctionalSequence, a, pts: TestFamily, tol) -> ConvergenceVerdict:
    """
    Pointwise convergence f_n(x) -> f(x) plus ||f_n||* -> ||f||*.

    The verdict is cross-checked against wijsman_check on the level sets
    {f_n = a}; the comparison is recorded under details["consistent"].
    """
    if fseq.limit.is_zero():
        raise PreconditionError("level-set criterion needs a nonzero limit functional")
    if pts.kind != FamilyKind.POINTS:
        raise PreconditionError(f"level-set criterion needs a point family, got {pts.kind.value}")
    tol = Fraction(tol)
    level_sets = hyperplane_sequence(fseq, a)
    engine = ConvergenceEngine(level_sets, tol)
    engine.announce(Notion.LEVEL_SET, len(pts))
    tail = fseq.tail()

    outcomes: List[TraceOutcome] = []
    for oid, x in pts.items():
        values = dict(zip(tail, cell_pool.map(lambda n: fseq.at(n).pair(x), tail)))
        target = fseq.limit.pair(x)
        outcomes.append(TraceOutcome(f"{oid}:pair", analyze(values, target, tol), target, values))
    norms = dict(zip(tail, cell_pool.map(lambda n: dual_norm_eval(fseq.norm, fseq.at(n)), tail)))
    norm_target = dual_norm_eval(fseq.norm, fseq.limit)
    outcomes.append(TraceOutcome("dual_norm", analyze(norms, norm_target, tol), norm_target, norms))

    direct = engine.wijsman_check(pts)
    verdict = engine.build_verdict(Notion.LEVEL_SET, outcomes)
    consistent = direct.status == verdict.status
    if not consistent:
        logger.warning("level-set criterion (%s) disagrees with the direct Wijsman check (%s)",
                       verdict.status.value, direct.status.value)
    verdict.details.update({"wijsman": direct.status.value, "consistent": consistent})
    return verdict
