"""
Certificate Engine

Verifies sufficient-condition certificates for slice, weak compact gap and
Wijsman convergence, builds the separating functionals between a compact
exhaustion of a hyperplane and a set at gap close to 1, and produces that
exhaustion.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from convlab.config import config
from convlab.engine.cell_pool import cell_pool
from convlab.engine.convergence_engine import (ConvergenceEngine, ConvergenceVerdict, Notion,
                                               TraceOutcome)
from convlab.engine.convex_sets import CompactFamily, ConvexSet, Hyperplane, Polytope, contains
from convlab.engine.errors import CertificateError, ConsistencyError, PreconditionError
from convlab.engine.geometry_engine import GeometryEngine, support_value
from convlab.engine.kadec_engine import mackey_sup
from convlab.engine.sequences import SetSequence, VectorSequence
from convlab.engine.space import (Functional, NormSpec, Vector, Window, compare, dual_norm_eval,
                                  format_scalar, norm_eval, polytope_vertices)
from convlab.engine.tail import analyze, limsup_within

logger = logging.getLogger(__name__)


class CertificateMode(str, Enum):
    NORM = "norm"
    MACKEY = "mackey"
    W_STAR = "wStar"


_MODE_NOTIONS = {
    CertificateMode.NORM: Notion.SLICE,
    CertificateMode.MACKEY: Notion.WEAK_COMPACT_GAP,
    CertificateMode.W_STAR: Notion.WIJSMAN,
}


@dataclass
class SliceCertificate:
    """
    A unit functional x0* attaining sup_C at attain_point, and functionals
    cert(n) of dual norm at most 1 converging to x0* in the mode's sense.
    """
    x0_star: Functional
    attain_point: Vector
    cert: Callable[[int], Functional]
    mode: CertificateMode = CertificateMode.NORM
    family: Optional[CompactFamily] = None
    points: Tuple[Vector, ...] = ()

    def __post_init__(self):
        self.mode = CertificateMode(self.mode)
        self.points = tuple(self.points)
        if self.mode == CertificateMode.MACKEY and not self.family:
            raise CertificateError("a Mackey certificate needs a compact family")
        if self.mode == CertificateMode.W_STAR and not self.points:
            raise CertificateError("a weak* certificate needs probe points")

    def validate(self, limit: ConvexSet, norm: NormSpec) -> None:
        if compare(dual_norm_eval(norm, self.x0_star), 1) != 0:
            raise CertificateError("x0* must have dual norm 1")
        if not contains(limit, self.attain_point):
            raise CertificateError("attain point is not in the limit set")
        top = GeometryEngine(norm).support_value(self.x0_star, limit)
        if compare(self.x0_star.pair(self.attain_point), top) != 0:
            raise CertificateError(
                f"x0* does not attain sup_C = {format_scalar(top)} at the attain point")


@dataclass
class SeparationInstance:
    """K_n and C_j whose gap should sit in (1 - 1/n, 1 + 1/n)."""
    n: int
    j: int
    k_n: Polytope
    c_j: ConvexSet

    @property
    def radius(self) -> Fraction:
        return 1 - Fraction(1, self.n)


class CertificateEngine:
    def __init__(self, seq: SetSequence, tol):
        self.checker = ConvergenceEngine(seq, tol)
        self.seq = seq
        self.tol = self.checker.tol
        self.geometry = self.checker.geometry

    def _trace(self, fn) -> Dict[int, object]:
        tail = self.seq.tail()
        return dict(zip(tail, cell_pool.map(fn, tail)))

    def _checked_cert(self, cert: SliceCertificate) -> Callable[[int], Functional]:
        norm = self.seq.norm

        def member(n: int) -> Functional:
            f = cert.cert(n)
            if compare(dual_norm_eval(norm, f), 1) > 0:
                raise CertificateError(f"cert({n}) has dual norm above 1")
            return f
        return member

    def _limsup_outcome(self, cert: SliceCertificate, member) -> TraceOutcome:
        bound = self.geometry.support_value(cert.x0_star, self.seq.limit)
        trace = self._trace(lambda n: self.geometry.support_value(member(n), self.seq.at(n)))
        return TraceOutcome("limsup sup_Cn cert(n)", limsup_within(trace, bound, self.tol), bound, trace)

    def _mode_outcomes(self, cert: SliceCertificate, member) -> List[TraceOutcome]:
        zero = Fraction(0)
        norm = self.seq.norm
        if cert.mode == CertificateMode.NORM:
            trace = self._trace(lambda n: dual_norm_eval(norm, member(n) - cert.x0_star))
            return [TraceOutcome("dual_norm(cert(n) - x0*)", analyze(trace, zero, self.tol), zero, trace)]
        outcomes = []
        if cert.mode == CertificateMode.MACKEY:
            for k, K in enumerate(cert.family):
                trace = self._trace(lambda n, K=K: mackey_sup(member(n) - cert.x0_star, K))
                outcomes.append(TraceOutcome(f"sup_K{k} |cert(n) - x0*|", analyze(trace, zero, self.tol),
                                             zero, trace))
            return outcomes
        for k, p in enumerate(cert.points):
            target = cert.x0_star.pair(p)
            trace = self._trace(lambda n, p=p: member(n).pair(p))
            outcomes.append(TraceOutcome(f"<cert(n), p{k}>", analyze(trace, target, self.tol), target, trace))
        return outcomes

    def verify_certificate(self, cert: SliceCertificate,
                           samples: Sequence[Vector] = ()) -> ConvergenceVerdict:
        """
        Condition (i) on the attain point and the projections of samples onto
        C, then the limsup condition and the mode's convergence.
        """
        cert.validate(self.seq.limit, self.seq.norm)
        notion = _MODE_NOTIONS[cert.mode]
        self.checker.announce(notion, 1 + len(samples))
        recovery = [("(i) attain point", cert.attain_point)]
        for k, p in enumerate(samples):
            projected = self.geometry.nearest_point(p, self.seq.limit).point
            if projected is not None:
                recovery.append((f"(i) sample{k}", projected))
        outcomes = []
        for oid, x0 in recovery:
            trace = self._trace(lambda n, x0=x0: self.geometry.distance(x0, self.seq.at(n)))
            outcomes.append(TraceOutcome(oid, analyze(trace, Fraction(0), self.tol), Fraction(0), trace))
        member = self._checked_cert(cert)
        outcomes.append(self._limsup_outcome(cert, member))
        outcomes.extend(self._mode_outcomes(cert, member))
        return self.checker.build_verdict(notion, outcomes,
                                          {"certificate": cert.mode.value})

    def verify_wijsman_certificate(self, cert: SliceCertificate,
                                   recovery: VectorSequence) -> ConvergenceVerdict:
        """Recovery points x_n in C_n tending to x0, plus a weak* certificate."""
        if cert.mode != CertificateMode.W_STAR:
            raise CertificateError("Wijsman certificates use weak* mode")
        cert.validate(self.seq.limit, self.seq.norm)
        self.checker.announce(Notion.WIJSMAN, 1)
        norm = self.seq.norm

        def recovery_gap(n: int):
            x = recovery.at(n)
            if not contains(self.seq.at(n), x):
                raise CertificateError(f"recovery point x_{n} is not in C_{n}")
            return norm_eval(norm, x - cert.attain_point)

        trace = self._trace(recovery_gap)
        outcomes = [TraceOutcome("(i) recovery", analyze(trace, Fraction(0), self.tol), Fraction(0), trace)]
        member = self._checked_cert(cert)
        outcomes.extend(self._mode_outcomes(cert, member))
        outcomes.append(self._limsup_outcome(cert, member))
        return self.checker.build_verdict(Notion.WIJSMAN, outcomes,
                                          {"certificate": cert.mode.value})


def nearest_point_recovery(seq: SetSequence, x0: Vector) -> VectorSequence:
    """x_n = nearest point of C_n to x0; the canonical recovery sequence."""
    geometry = GeometryEngine(seq.norm)

    def recover(n: int) -> Vector:
        point = geometry.nearest_point(x0, seq.at(n)).point
        if point is None:
            raise PreconditionError(f"C_{n} is empty")
        return point

    return VectorSequence(recover, horizon=seq.horizon, start_index=seq.start_index,
                          tail_samples=seq.tail_samples)


def verify_certificate(cert: SliceCertificate, seq: SetSequence, tol,
                       samples: Sequence[Vector] = ()) -> ConvergenceVerdict:
    return CertificateEngine(seq, tol).verify_certificate(cert, samples)


def verify_wijsman_certificate(cert: SliceCertificate, seq: SetSequence,
                               recovery: VectorSequence, tol) -> ConvergenceVerdict:
    return CertificateEngine(seq, tol).verify_wijsman_certificate(cert, recovery)


# =============================================================================
# Separation between an exhaustion and a far set
# =============================================================================

def construct_separating_sequence(inst: SeparationInstance, norm: NormSpec) -> Functional:
    """
    Unit functional L with sup_{C_j} L + (1 - 1/n) <= min_{K_n} L, exactly.

    Requires 1 - 1/n < d(K_n, C_j) < 1 + 1/n.
    """
    geometry = GeometryEngine(norm)
    d = geometry.gap(inst.k_n, inst.c_j)
    if compare(d, inst.radius) <= 0:
        raise PreconditionError(
            f"d(K_{inst.n}, C_{inst.j}) = {format_scalar(d)} is not above {format_scalar(inst.radius)}")
    upper = 1 + Fraction(1, inst.n)
    if compare(d, upper) >= 0:
        raise PreconditionError(
            f"gap pattern violated: d(K_{inst.n}, C_{inst.j}) = {format_scalar(d)} is not below {format_scalar(upper)}")
    separation = geometry.separate(inst.c_j, inst.k_n)
    functional = separation.functional
    lhs, rhs = separation_inequality(inst, functional)
    if lhs > rhs:
        raise ConsistencyError(
            f"separator fails: sup_C + radius = {format_scalar(lhs)} > min_K = {format_scalar(rhs)}")
    if dual_norm_eval(norm, functional) != 1:
        raise ConsistencyError("separator is not a unit functional")
    return functional


def separation_inequality(inst: SeparationInstance, functional: Functional) -> Tuple[Fraction, Fraction]:
    """(sup_{C_j} L + (1 - 1/n), min_{K_n} L), by direct support values."""
    sup_c = support_value(functional, inst.c_j)
    min_k = -support_value(-functional, inst.k_n)
    return sup_c + inst.radius, min_k


def exhaust_hyperplane(L: Hyperplane, anchor: Vector, count: int, norm: NormSpec,
                       box_radius: Optional[int] = None) -> CompactFamily:
    """
    Nested polytopes K_1 in K_2 in ... inside L: the sections of L by the
    boxes of radius (1 - 1/n) M around the point of L nearest the anchor.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    M = Fraction(config.EXHAUST_BOX_RADIUS if box_radius is None else box_radius)
    if L.functional.pair(anchor) == L.level:
        raise PreconditionError("the anchor lies on the hyperplane")
    geometry = GeometryEngine(norm)
    nearest = geometry.nearest_point(anchor, L)
    if compare(nearest.value, 1) < 0:
        raise PreconditionError(f"d(anchor, L) = {format_scalar(nearest.value)} is below 1")
    center = nearest.point
    window = Window.of(L.functional.window, anchor.window, center.support, norm.required_indices)
    f = L.functional.rehome(window)
    plane = [(f, L.level), (-f, -L.level)]

    members: List[Polytope] = []
    for n in range(1, count + 1):
        r = (1 - Fraction(1, n)) * M
        box = []
        for i in window:
            e = Functional({i: 1}, window)
            box.append((e, center.get(i) + r))
            box.append((-e, r - center.get(i)))
        vertices = polytope_vertices(plane + box, window)
        members.append(Polytope(tuple(vertices)))

    for n, K in enumerate(members, start=1):
        if not all(contains(L, v) for v in K.vertices):
            raise ConsistencyError(f"K_{n} leaves the hyperplane")
        if n > 1 and not all(contains(K, v) for v in members[n - 2].vertices):
            raise ConsistencyError(f"K_{n - 1} is not inside K_{n}")
        d = geometry.gap(K, Polytope.point(anchor))
        if compare(d, 1 + Fraction(1, n)) >= 0:
            raise ConsistencyError(f"d(K_{n}, anchor) = {format_scalar(d)} is not below 1 + 1/{n}")
    logger.debug("exhausted hyperplane with %d nested sections", count)
    return CompactFamily(members)
