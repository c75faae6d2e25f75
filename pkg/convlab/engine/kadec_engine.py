"""
Kadec Probe Engine

Instance-level probes of dual-norm geometry along explicit sequences:
sequential w*-Kadec, sequential w*-tau-Kadec (Mackey), LUR and the pairing
property of weak/weak* convergent pairs. Also builds the slab renorming
that turns a pairing failure into a Mackey failure, and the level-set
sequence whose Mosco limit fails the selection condition.

A probe checks its hypotheses first. When they do not hold on the tail the
report is vacuous, never a pass.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from convlab.engine.cell_pool import cell_pool
from convlab.engine.convex_sets import CompactFamily, Hyperplane
from convlab.engine.errors import ConsistencyError, PreconditionError
from convlab.engine.sequences import FunctionalSequence, SetSequence, VectorSequence
from convlab.engine.space import (DualBallDescription, Functional, NormSpec, Scalar, Vector,
                                  compare, dual_norm_eval, format_scalar, norm_eval,
                                  square_of)
from convlab.engine.tail import TailFit, analyze

logger = logging.getLogger(__name__)


class ProbeProperty(str, Enum):
    W_STAR_KADEC = "wStarKadec"
    W_STAR_TAU_KADEC = "wStarTauKadec"
    LUR = "lur"
    PROPERTY_STAR = "propertyStar"


class ProbeStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    VACUOUS = "vacuous"


@dataclass(frozen=True)
class ProbeWitness:
    n: int
    quantity: str
    value: Scalar

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "quantity": self.quantity, "value": format_scalar(self.value)}


@dataclass
class ProbeReport:
    """Outcome of one probe, with every trace it looked at."""
    property: ProbeProperty
    status: ProbeStatus
    horizon: int
    tolerance: Fraction
    witness: Optional[ProbeWitness] = None
    traces: Dict[str, Dict[int, Scalar]] = field(default_factory=dict)
    probe_basis: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "property": self.property.value,
            "status": self.status.value,
            "horizon": self.horizon,
            "tolerance": format_scalar(self.tolerance),
            "witness": self.witness.to_dict() if self.witness else None,
            "probe_basis": list(self.probe_basis),
            "details": self.details,
        }

    def trace_rows(self) -> List[Tuple[int, str, Scalar]]:
        rows = [(n, name, v) for name, trace in self.traces.items() for n, v in trace.items()]
        return sorted(rows, key=lambda r: (r[0], r[1]))


class _Probe:
    """Collects named traces and judges hypotheses and conclusions on them."""

    def __init__(self, prop: ProbeProperty, tail: Sequence[int], horizon: int, tol):
        tol = Fraction(tol)
        if tol < 0:
            raise ValueError("tolerance must be non-negative")
        self.prop = prop
        self.tail = list(tail)
        self.horizon = horizon
        self.tol = tol
        self.traces: Dict[str, Dict[int, Scalar]] = {}
        self.failed_hypotheses: List[str] = []
        logger.info("%s probe started: horizon %d, tol %s", prop.value, horizon,
                    format_scalar(tol))

    def trace(self, name: str, fn) -> Dict[int, Scalar]:
        values = dict(zip(self.tail, cell_pool.map(fn, self.tail)))
        self.traces[name] = values
        return values

    def hypothesis(self, name: str, fn, target: Scalar) -> bool:
        fit = analyze(self.trace(name, fn), target, self.tol)
        if not fit.converged:
            self.failed_hypotheses.append(name)
        return fit.converged

    def conclude(self, checks: Sequence[Tuple[str, TailFit]], probe_basis: Sequence[str] = (),
                 details: Optional[Dict[str, Any]] = None) -> ProbeReport:
        details = dict(details or {})
        witness = None
        if self.failed_hypotheses:
            status = ProbeStatus.VACUOUS
            details["failed_hypotheses"] = list(self.failed_hypotheses)
        else:
            status = ProbeStatus.PASS
            for name, fit in checks:
                if not fit.converged:
                    status = ProbeStatus.FAIL
                    n = fit.argmax_n
                    witness = ProbeWitness(n, name, self.traces[name][n])
                    break
        report = ProbeReport(self.prop, status, self.horizon, self.tol, witness,
                             self.traces, list(probe_basis), details)
        logger.info("%s probe finished: %s", self.prop.value, status.value)
        return report


def _basis_labels(pts: Sequence[Vector]) -> List[str]:
    return [p.describe() for p in pts]


def _hypotheses_w_star(probe: _Probe, fseq: FunctionalSequence, pts: Sequence[Vector]) -> None:
    probe.hypothesis("dual_norm(f_n)", lambda n: dual_norm_eval(fseq.norm, fseq.at(n)),
                     dual_norm_eval(fseq.norm, fseq.limit))
    for k, x in enumerate(pts):
        probe.hypothesis(f"<f_n, p{k}>", lambda n, x=x: fseq.at(n).pair(x), fseq.limit.pair(x))


def probe_w_star_kadec(fseq: FunctionalSequence, pts: Sequence[Vector], tol) -> ProbeReport:
    """w*-convergence and norm convergence of f_n should force ||f_n - f||* -> 0."""
    probe = _Probe(ProbeProperty.W_STAR_KADEC, fseq.tail(), fseq.horizon, tol)
    _hypotheses_w_star(probe, fseq, pts)
    name = "dual_norm(f_n - f)"
    fit = analyze(probe.trace(name, lambda n: dual_norm_eval(fseq.norm, fseq.at(n) - fseq.limit)),
                  Fraction(0), probe.tol)
    return probe.conclude([(name, fit)], _basis_labels(pts))


def mackey_sup(f: Functional, K) -> Fraction:
    """sup over the polytope K of |f|, attained at a vertex."""
    return max(abs(f.pair(v)) for v in K.vertices)


def probe_w_star_tau_kadec(fseq: FunctionalSequence, pts: Sequence[Vector], fam: CompactFamily,
                           tol) -> ProbeReport:
    """Same hypotheses; conclusion is uniform convergence on each member of fam."""
    if not len(fam):
        raise PreconditionError("Mackey probe needs a non-empty compact family")
    probe = _Probe(ProbeProperty.W_STAR_TAU_KADEC, fseq.tail(), fseq.horizon, tol)
    _hypotheses_w_star(probe, fseq, pts)
    checks = []
    for k, K in enumerate(fam):
        name = f"sup_K{k} |f_n - f|"
        trace = probe.trace(name, lambda n, K=K: mackey_sup(fseq.at(n) - fseq.limit, K))
        checks.append((name, analyze(trace, Fraction(0), probe.tol)))
    return probe.conclude(checks, _basis_labels(pts), {"family_size": len(fam)})


def lur_expression(norm: NormSpec, xn: Vector, x: Vector) -> Scalar:
    """2||x_n||^2 + 2||x||^2 - ||x_n + x||^2, exact on squares."""
    return (2 * square_of(norm_eval(norm, xn)) + 2 * square_of(norm_eval(norm, x))
            - square_of(norm_eval(norm, xn + x)))


def probe_lur(norm: NormSpec, xseq: VectorSequence, x: Vector, tol) -> ProbeReport:
    probe = _Probe(ProbeProperty.LUR, xseq.tail(), xseq.horizon, tol)
    probe.hypothesis("lur_expression", lambda n: lur_expression(norm, xseq.at(n), x), Fraction(0))
    name = "norm(x_n - x)"
    fit = analyze(probe.trace(name, lambda n: norm_eval(norm, xseq.at(n) - x)), Fraction(0), probe.tol)
    return probe.conclude([(name, fit)], details={"norm": norm.label})


def _coordinate_probes(fseq: FunctionalSequence, xseq: VectorSequence, x: Vector) -> List[int]:
    first = fseq.tail()[0]
    bound = min(fseq.tail_start, xseq.tail_start)
    indices = set(fseq.limit.support) | set(x.support)
    indices |= set(fseq.at(first).support) | set(xseq.at(first).support)
    core = sorted(i for i in indices if i < bound)
    return core or [0]


def property_star_check(fseq: FunctionalSequence, xseq: VectorSequence, x: Vector, tol,
                        probes: Optional[Sequence[int]] = None) -> ProbeReport:
    """
    <x_n*, x_n> -> <x*, x> for a weak* convergent x_n* and a weakly
    convergent x_n.

    Both convergence hypotheses are checked on the coordinates in probes
    (default: the supports seen below the tail start).
    """
    probe = _Probe(ProbeProperty.PROPERTY_STAR, fseq.tail(), fseq.horizon, tol)
    coords = list(probes) if probes is not None else _coordinate_probes(fseq, xseq, x)
    for i in coords:
        probe.hypothesis(f"x_n*[{i}]", lambda n, i=i: fseq.at(n).get(i), fseq.limit.get(i))
        probe.hypothesis(f"x_n[{i}]", lambda n, i=i: xseq.at(n).get(i), x.get(i))
    name = "<x_n*, x_n>"
    fit = analyze(probe.trace(name, lambda n: fseq.at(n).pair(xseq.at(n))), fseq.limit.pair(x),
                  probe.tol)
    return probe.conclude([(name, fit)], [f"e{i}" for i in coords])


# =============================================================================
# Renorming and level-set constructions
# =============================================================================

@dataclass
class PropertyStarWitness:
    """A failure of the pairing property: x_n* -w*-> x*, x_n -w-> x, pairings stay away."""
    fseq: FunctionalSequence
    xseq: VectorSequence
    x: Vector
    indices: Tuple[int, ...]


def build_slab_renorm(witness: PropertyStarWitness, y: Vector, y_star: Functional) -> NormSpec:
    """
    Norm whose dual unit ball is {L : |<L, y>| <= 1} cut with twice the
    base dual ball.

    Under it y* + x_j* -w*-> y* with |||y* + x_j*||| <= 1 = |||y*|||, which
    the Mackey probe then rejects. When ||x*|| = 1 already the base norm is
    returned unchanged.
    """
    base = witness.fseq.norm
    x_star = witness.fseq.limit
    if compare(dual_norm_eval(base, x_star), 1) == 0:
        logger.info("limit functional has norm 1; base norm kept")
        return base
    if not x_star.is_zero():
        raise PreconditionError("the limit functional x* must be 0")
    if not witness.indices:
        raise PreconditionError("the index subset J is empty")
    if compare(norm_eval(base, y), 1) != 0:
        raise PreconditionError(f"||y|| = {format_scalar(norm_eval(base, y))} but must equal 1")
    if y_star.pair(y) != 1:
        raise PreconditionError(f"<y*, y> = {format_scalar(y_star.pair(y))} but must equal 1")
    if compare(dual_norm_eval(base, y_star), 1) != 0:
        raise PreconditionError(
            f"||y*|| = {format_scalar(dual_norm_eval(base, y_star))} but must equal 1")
    for j in witness.indices:
        f = witness.fseq.at(j)
        if compare(dual_norm_eval(base, f), 1) > 0:
            raise PreconditionError(f"||x_{j}*|| > 1")
        if f.pair(y) > 0:
            raise PreconditionError(f"<x_{j}*, y> = {format_scalar(f.pair(y))} > 0")

    renorm = NormSpec.predual_of_ball(DualBallDescription(((y, Fraction(1)),), Fraction(2), base))
    if compare(dual_norm_eval(renorm, y_star + x_star), 1) != 0:
        raise ConsistencyError("renormed |||y* + x*||| differs from 1")
    for j in witness.indices:
        if compare(dual_norm_eval(renorm, y_star + witness.fseq.at(j)), 1) > 0:
            raise ConsistencyError(f"renormed |||y* + x_{j}*||| exceeds 1")
    logger.debug("slab renorm built over %d indices", len(witness.indices))
    return renorm


def shifted_functionals(fseq: FunctionalSequence, shift: Functional,
                        norm: Optional[NormSpec] = None) -> FunctionalSequence:
    """n -> shift + f_n with limit shift + f, optionally under another norm."""
    return FunctionalSequence(lambda n: shift + fseq.at(n), shift + fseq.limit,
                              norm or fseq.norm, horizon=fseq.horizon,
                              start_index=fseq.start_index, tail_samples=fseq.tail_samples)


def level_set_mosco_witness(fseq: FunctionalSequence, xseq: VectorSequence,
                            x0: Vector) -> Tuple[SetSequence, VectorSequence]:
    """
    Level sets C_n = {x_n* = 1} with limit {x* = 1} and the selection
    lambda_n (x0 + x_n) in C_n.

    Needs <x_n*, x0> >= 2 on the tail and ||x0|| <= 3.
    """
    norm = fseq.norm
    x0_norm = norm_eval(norm, x0)
    if compare(x0_norm, 3) > 0:
        raise PreconditionError(f"||x0|| = {format_scalar(x0_norm)} exceeds 3")
    for n in fseq.tail():
        pairing = fseq.at(n).pair(x0)
        if pairing < 2:
            raise PreconditionError(f"<x_{n}*, x0> = {format_scalar(pairing)} is below 2")
        if fseq.at(n).pair(x0 + xseq.at(n)) == 0:
            raise PreconditionError(f"x0 + x_{n} lies in the kernel of x_{n}*")

    sets = SetSequence(lambda n: Hyperplane(fseq.at(n), Fraction(1)),
                       Hyperplane(fseq.limit, Fraction(1)), norm, horizon=fseq.horizon,
                       start_index=fseq.start_index, tail_samples=fseq.tail_samples)

    def select(n: int) -> Vector:
        point = x0 + xseq.at(n)
        return point.scale(1 / fseq.at(n).pair(point))

    selection = VectorSequence(select, horizon=fseq.horizon, start_index=fseq.start_index,
                               tail_samples=fseq.tail_samples)
    return sets, selection
