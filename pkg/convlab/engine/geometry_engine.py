"""
Geometry Engine

Distance, gap, support value, separation and distance subgradients of
convex sets under an ambient norm, plus epigraph construction and
coercivity margins of polyhedral functions.

Polyhedral norms with polyhedral sets go through one exact linear program
per query. Euclidean data uses closed forms and exact face enumeration
where possible and falls back to scipy SLSQP and bounded scalar search
(flagged inexact).
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, minimize, minimize_scalar

from convlab.config import config
from convlab.engine.convex_sets import (ConvexSet, Epigraph, Halfspace, Hyperplane,
                                        MinkowskiSum, NormBall, PolyFunc, Polytope,
                                        encode_membership, is_empty, requires_euclidean)
from convlab.engine.errors import (ConsistencyError, NotPolyhedralError, PreconditionError,
                                   SeparationError, UnboundedProgramError)
from convlab.engine.linear_program import (LinearProgram, LPStatus, Sense, constraint_arrays,
                                           variable_bounds)
from convlab.engine.space import (Functional, NormFamily, NormSpec, Scalar, Surd, Vector,
                                  Window, compare, computation_window, dual_ball_vertices,
                                  dual_norm_eval, encode_norm_bound, is_exact, norm_eval,
                                  root, square_of, to_float)

logger = logging.getLogger(__name__)

_EUCLIDEAN = NormSpec.ell2()

# float screening slack before the exact face solve
_FACE_SLACK = 1e-9


@dataclass(frozen=True)
class Projection:
    """Distance from a point to a set with an attained nearest point."""
    value: Scalar
    point: Optional[Vector]
    exact: bool = True


@dataclass(frozen=True)
class Separation:
    functional: Functional
    sup_a: Fraction
    inf_b: Fraction

    @property
    def margin(self) -> Fraction:
        return self.inf_b - self.sup_a

    def to_dict(self) -> Dict:
        return {
            "functional": self.functional.describe(),
            "sup_a": str(self.sup_a),
            "inf_b": str(self.inf_b),
            "margin": str(self.margin),
        }


@dataclass(frozen=True)
class GapResult:
    value: Scalar
    exact: bool = True


def _data_window(fallback: Window, *groups) -> Window:
    indices = set()
    for group in groups:
        indices.update(group)
    return Window.of(indices) if indices else Window((fallback.indices[0],))


def _single_point(C: ConvexSet) -> Optional[Vector]:
    if isinstance(C, Polytope) and len(set(C.vertices)) == 1:
        return C.vertices[0]
    return None


def _empty(C: ConvexSet) -> bool:
    if requires_euclidean(C) and isinstance(C, (NormBall, MinkowskiSum)):
        return False
    return _cached_empty(C)


@lru_cache(maxsize=16384)
def _cached_empty(C: ConvexSet) -> bool:
    return is_empty(C)


def _ball_reduction(norm: NormSpec, C: ConvexSet) -> Optional[Tuple[ConvexSet, Fraction]]:
    """(A, r) when C = A + B_r with B_r a ball of the ambient norm."""
    if isinstance(C, NormBall) and C.norm == norm:
        return Polytope.point(C.center), C.radius
    if isinstance(C, MinkowskiSum) and C.ball.norm == norm:
        base = C.base
        if C.ball.center.is_zero():
            return base, C.ball.radius
    return None


def _minus_radius(value: Scalar, radius: Fraction) -> Scalar:
    if isinstance(value, float):
        return max(0.0, value - float(radius))
    if isinstance(value, Surd):
        if compare(value, radius) <= 0:
            return Fraction(0)
        return float(value) - float(radius)
    return max(Fraction(0), value - radius)


# =============================================================================
# Distance
# =============================================================================

@lru_cache(maxsize=65536)
def _projection(norm: NormSpec, x: Vector, C: ConvexSet, want_point: bool) -> Projection:
    if _empty(C):
        return Projection(math.inf, None, True)

    reduced = _ball_reduction(norm, C)
    if reduced is not None and not want_point:
        base, radius = reduced
        inner = _projection(norm, x, base, False)
        return Projection(_minus_radius(inner.value, radius), None, inner.exact)

    if isinstance(C, Hyperplane) and not want_point:
        f = C.functional
        if f.is_zero():
            return Projection(Fraction(0), None, True)
        value = abs(f.dot(x) - C.level) / dual_norm_eval(norm, f)
        return Projection(value, None, is_exact(value))

    if norm.is_polyhedral and not requires_euclidean(C):
        return _polyhedral_projection(norm, x, C, want_point)
    if norm.family == NormFamily.ELL2:
        return _euclidean_projection(x, C)
    if norm.family == NormFamily.PRODUCT2:
        return _product_projection(norm, x, C)
    raise NotPolyhedralError(f"no distance path for {norm.label} and a {C.kind}")


def _output_window(x: Vector, C: ConvexSet, window: Window) -> Window:
    return x.window.union(C.window).union(window)


def _distance_program(norm: NormSpec, x: Vector, C: ConvexSet, window: Window,
                      cap: Optional[Fraction] = None):
    """min ||x - z|| over z in C; with a cap, the ell1 tie-break stage instead."""
    lp = LinearProgram(f"distance[{C.kind}]")
    zvars = {i: lp.free(f"z{i}") for i in window}
    encode_membership(lp, C, zvars)
    dvars = {i: lp.free(f"d{i}") for i in window}
    links = {i: lp.add({dvars[i]: 1, zvars[i]: 1}, Sense.EQ, x.get(i)) for i in window}
    t = lp.nonneg("t")
    encode_norm_bound(lp, norm, dvars, {t: 1})
    if cap is None:
        lp.minimize({t: 1})
    else:
        lp.add({t: 1}, Sense.LE, cap)
        slack = {}
        for i, d in dvars.items():
            s = lp.nonneg(f"abs{i}")
            lp.add({d: 1, s: -1}, Sense.LE)
            lp.add({d: -1, s: -1}, Sense.LE)
            slack[s] = 1
        lp.minimize(slack)
    return lp, zvars, links


def _polyhedral_projection(norm: NormSpec, x: Vector, C: ConvexSet, want_point: bool) -> Projection:
    window = computation_window(norm, x.support, C.support)
    lp, _, _ = _distance_program(norm, x, C, window)
    result = lp.solve()
    if result.status == LPStatus.INFEASIBLE:
        return Projection(math.inf, None, True)
    value = result.objective
    if not want_point:
        return Projection(value, None, True)
    lp, zvars, _ = _distance_program(norm, x, C, window, cap=value)
    second = lp.solve()
    if not second.optimal:
        raise ConsistencyError("tie-break stage of the distance program failed")
    point = Vector({i: second.value(v) for i, v in zvars.items()}, _output_window(x, C, window))
    return Projection(value, point, True)


def _distance_duals(norm: NormSpec, x: Vector, C: ConvexSet) -> Tuple[Fraction, Functional]:
    # duals of the rows d + z = x are a subgradient of x -> d(x, C)
    window = computation_window(norm, x.support, C.support)
    lp, _, links = _distance_program(norm, x, C, window)
    result = lp.solve(with_duals=True)
    if not result.optimal:
        raise PreconditionError("distance subgradient needs a non-empty set")
    grad = Functional({i: result.dual(row) for i, row in links.items()}, x.window.union(window))
    return result.objective, grad


# ----------------------------------------------------------------------------
# Euclidean
# ----------------------------------------------------------------------------

def _sq_norm(values: Sequence[Fraction]) -> Fraction:
    return sum((v * v for v in values), Fraction(0))


def _euclidean_projection(x: Vector, C: ConvexSet) -> Projection:
    if isinstance(C, Hyperplane):
        f = C.functional
        q = _sq_norm([v for _, v in f.entries])
        if q == 0:
            return Projection(Fraction(0), x, True)
        excess = f.dot(x) - C.level
        point = x - f.as_vector().scale(excess / q)
        return Projection(root(excess * excess / q), point, True)
    if isinstance(C, Halfspace):
        g, c = C.as_le()
        excess = g.dot(x) - c
        if excess <= 0:
            return Projection(Fraction(0), x, True)
        q = _sq_norm([v for _, v in g.entries])
        point = x - g.as_vector().scale(excess / q)
        return Projection(root(excess * excess / q), point, True)
    if isinstance(C, NormBall) and C.norm.family == NormFamily.ELL2:
        diff = x - C.center
        s = norm_eval(_EUCLIDEAN, diff)
        if compare(s, C.radius) <= 0:
            return Projection(Fraction(0), x, True)
        if isinstance(s, Fraction):
            return Projection(s - C.radius, C.center + diff.scale(C.radius / s), True)
        return Projection(float(s) - float(C.radius), None, False)
    if isinstance(C, Polytope):
        distinct = list(dict.fromkeys(C.vertices))
        if len(distinct) <= config.MAX_EXACT_FACE_VERTICES:
            return _polytope_face_projection(x, distinct)
    if requires_euclidean(C):
        raise NotPolyhedralError(f"no Euclidean projection path for a {C.kind} with a Euclidean ball")
    return _float_projection(x, C)


def _polytope_face_projection(x: Vector, vertices: List[Vector]) -> Projection:
    window = _data_window(x.window, x.support, *(v.support for v in vertices))
    idx = window.indices
    xs = [x.get(i) for i in idx]
    pts = [[v.get(i) for i in idx] for v in vertices]
    xs_float = np.array([float(v) for v in xs])
    pts_float = np.array([[float(v) for v in p] for p in pts])
    best_sq: Optional[Fraction] = None
    best_point: Optional[List[Fraction]] = None
    for size in range(1, min(len(pts), len(idx) + 1) + 1):
        for subset in itertools.combinations(range(len(pts)), size):
            estimate = _face_estimate(xs_float, pts_float[list(subset)])
            if estimate is None or (best_sq is not None and estimate > float(best_sq) + _FACE_SLACK):
                continue
            candidate = _affine_projection(xs, [pts[k] for k in subset])
            if candidate is None:
                continue
            sq = _sq_norm([a - b for a, b in zip(xs, candidate)])
            if best_sq is None or sq < best_sq:
                best_sq, best_point = sq, candidate
    point = Vector(dict(zip(idx, best_point)), x.window.union(vertices[0].window).union(window))
    return Projection(root(best_sq), point, True)


def _face_estimate(xs: np.ndarray, pts: np.ndarray) -> Optional[float]:
    """Float squared distance to aff(pts) when the foot looks inside conv(pts)."""
    base = pts[0]
    dirs = pts[1:] - base
    if not len(dirs):
        return float(np.sum((xs - base) ** 2))
    mu, *_ = np.linalg.lstsq(dirs @ dirs.T, dirs @ (xs - base), rcond=None)
    if (mu < -_FACE_SLACK).any() or mu.sum() > 1 + _FACE_SLACK:
        return None
    foot = base + mu @ dirs
    return float(np.sum((xs - foot) ** 2))


def _affine_projection(xs: List[Fraction], pts: List[List[Fraction]]) -> Optional[List[Fraction]]:
    """Projection of xs onto aff(pts) if it lies in conv(pts); None otherwise."""
    v0 = pts[0]
    dirs = [[a - b for a, b in zip(p, v0)] for p in pts[1:]]
    rhs_vec = [a - b for a, b in zip(xs, v0)]
    if not dirs:
        return list(v0)
    gram = [[sum((a * b for a, b in zip(di, dj)), Fraction(0)) for dj in dirs] for di in dirs]
    rhs = [sum((a * b for a, b in zip(di, rhs_vec)), Fraction(0)) for di in dirs]
    lp = LinearProgram("affine_projection")
    mus = [lp.nonneg(f"mu{k}") for k in range(len(dirs))]
    for row, b in zip(gram, rhs):
        lp.add({m: g for m, g in zip(mus, row)}, Sense.EQ, b)
    lp.add({m: 1 for m in mus}, Sense.LE, 1)
    lp.minimize({})
    result = lp.solve()
    if not result.optimal:
        return None
    mu = [result.value(m) for m in mus]
    return [v + sum((m * d[j] for m, d in zip(mu, dirs)), Fraction(0)) for j, v in enumerate(v0)]


def _to_fraction(value: float) -> Fraction:
    return Fraction(value).limit_denominator(10 ** 9)


def _least_squares(lp: LinearProgram, residuals: Sequence[Tuple[Dict[int, int], float]]) -> Optional[np.ndarray]:
    """
    SLSQP minimiser of sum_k (r_k . v - c_k)^2 over the feasible set of lp.

    The start is an exact feasible point of the model; None when the model
    is infeasible.
    """
    lp.minimize({})
    start = lp.solve()
    if not start.optimal:
        return None
    size = lp.num_vars
    weights = np.zeros((len(residuals), size))
    offsets = np.array([offset for _, offset in residuals], dtype=float)
    for k, (coeffs, _) in enumerate(residuals):
        for var, coef in coeffs.items():
            weights[k, var] = coef

    def objective(v: np.ndarray) -> float:
        r = weights @ v - offsets
        return float(r @ r)

    def gradient(v: np.ndarray) -> np.ndarray:
        return 2.0 * weights.T @ (weights @ v - offsets)

    a_eq, b_eq, a_ub, b_ub = constraint_arrays(lp)
    constraints = []
    if a_eq:
        constraints.append(LinearConstraint(np.array(a_eq), b_eq, b_eq))
    if a_ub:
        constraints.append(LinearConstraint(np.array(a_ub), -np.inf, b_ub))
    lower = [-np.inf if lo is None else lo for lo, _ in variable_bounds(lp)]
    x0 = np.array([float(start.value(var)) for var in range(size)])
    result = minimize(objective, x0, jac=gradient, method="SLSQP",
                      bounds=Bounds(lower, np.full(size, np.inf)), constraints=constraints,
                      options={"maxiter": config.FLOAT_SOLVER_MAX_ITER, "ftol": config.FLOAT_TOLERANCE})
    if not result.success:
        logger.warning("%s: SLSQP stopped early (%s)", lp.name, result.message)
        if objective(x0) <= objective(result.x):
            return x0
    return result.x


def _float_projection(x: Vector, C: ConvexSet) -> Projection:
    window = _data_window(x.window, x.support, C.support)
    lp = LinearProgram(f"float_projection[{C.kind}]")
    zvars = {i: lp.free(f"z{i}") for i in window}
    encode_membership(lp, C, zvars)
    solution = _least_squares(lp, [({zvars[i]: 1}, float(x.get(i))) for i in window])
    if solution is None:
        return Projection(math.inf, None, True)
    logger.debug("SLSQP projection onto a %s over %d coordinates", C.kind, len(zvars))
    point = Vector({i: Fraction(float(solution[v])) for i, v in zvars.items()},
                   x.window.union(C.window).union(window))
    residual = [float(solution[v]) - float(x.get(i)) for i, v in zvars.items()]
    return Projection(float(np.linalg.norm(residual)), point, False)


# ----------------------------------------------------------------------------
# Product spaces
# ----------------------------------------------------------------------------

def _split(norm: NormSpec, z: Vector) -> Tuple[Vector, Fraction]:
    return Vector({i: v for i, v in z.entries if i != norm.slot}, z.window), z.get(norm.slot)


def _product_projection(norm: NormSpec, x: Vector, C: ConvexSet) -> Projection:
    inner = norm.inner
    if isinstance(C, Epigraph) and C.func.constant_value is not None and C.slot == norm.slot:
        # (dom f) x [c, inf) is a product: distances add in squares
        level = C.func.constant_value
        x_part, r = _split(norm, x)
        if C.func.domain is None:
            inner_value: Scalar = Fraction(0)
            inner_point = x_part
        else:
            proj = _projection(inner, x_part, C.func.domain, True)
            inner_value, inner_point = proj.value, proj.point
        lift = max(Fraction(0), level - r)
        if isinstance(inner_value, float):
            value: Scalar = math.hypot(inner_value, float(lift))
        else:
            value = root(square_of(inner_value) + lift * lift)
        entries = dict(inner_point.entries)
        entries[norm.slot] = max(r, level)
        point = Vector(entries, x.window.union(C.window).union(inner_point.window))
        return Projection(value, point, is_exact(value))
    if inner.family == NormFamily.ELL2:
        return _euclidean_projection(x, C)
    value = _product_gap(norm, Polytope.point(x), C)
    return Projection(value.value, None, value.exact)


def _truncated_epigraph(norm: NormSpec, E: ConvexSet, other: ConvexSet) -> Optional[Polytope]:
    """
    dom f x [c, T] for a constant f on a polytope domain, with T at or above
    every slot value of the polytope other. The gap to other is unchanged.
    """
    if not (isinstance(E, Epigraph) and isinstance(other, Polytope) and E.slot == norm.slot):
        return None
    level = E.func.constant_value
    if level is None or E.func.domain is None:
        return None
    top = max([level] + [v.get(E.slot) for v in other.vertices])
    window = E.window.union(other.window)
    vertices = []
    for d in E.func.domain.vertices:
        for r in (level, top):
            entries = dict(d.entries)
            entries[E.slot] = r
            vertices.append(Vector(entries, window))
    return Polytope(tuple(dict.fromkeys(vertices)))


def _product_gap(norm: NormSpec, A: ConvexSet, B: ConvexSet) -> GapResult:
    """min over a, b of sqrt(inner(a_X - b_X)^2 + (a_s - b_s)^2), searching the inner cap."""
    inner = norm.inner
    if not inner.is_polyhedral or requires_euclidean(A) or requires_euclidean(B):
        raise NotPolyhedralError(f"no product path for {norm.label}")
    window = computation_window(norm, A.support, B.support)
    slot = norm.slot

    def program(u_cap: Optional[Fraction], v_cap: Optional[Fraction], minimise_inner: bool):
        lp = LinearProgram("product_gap")
        avars = {i: lp.free(f"a{i}") for i in window}
        bvars = {i: lp.free(f"b{i}") for i in window}
        encode_membership(lp, A, avars)
        encode_membership(lp, B, bvars)
        dvars = {}
        for i in window:
            if i == slot:
                continue
            d = lp.free(f"d{i}")
            lp.add({d: 1, avars[i]: -1, bvars[i]: 1}, Sense.EQ)
            dvars[i] = d
        u = lp.nonneg("u")
        encode_norm_bound(lp, inner, dvars, {u: 1})
        e = lp.nonneg("e")
        lp.add({e: -1, avars[slot]: 1, bvars[slot]: -1}, Sense.LE)
        lp.add({e: -1, avars[slot]: -1, bvars[slot]: 1}, Sense.LE)
        if u_cap is not None:
            lp.add({u: 1}, Sense.LE, u_cap)
        if v_cap is not None:
            lp.add({e: 1}, Sense.LE, v_cap)
        lp.minimize({u: 1} if minimise_inner else {e: 1})
        result = lp.solve()
        if not result.optimal:
            raise UnboundedProgramError(f"product gap program is {result.status.value}")
        return result.objective

    u_lo = program(None, None, True)
    v_min = program(None, None, False)
    u_hi = program(None, v_min, True)
    if u_hi <= u_lo:
        return GapResult(root(u_lo * u_lo + v_min * v_min), True)

    def phi(u: float) -> float:
        cap = max(_to_fraction(u), u_lo)
        v = program(cap, None, False)
        return float(cap) ** 2 + float(v) ** 2

    search = minimize_scalar(phi, bounds=(float(u_lo), float(u_hi)), method="bounded",
                             options={"xatol": config.FLOAT_TOLERANCE * 1e-3,
                                      "maxiter": config.SCALAR_SEARCH_MAX_ITER})
    best = min(float(search.fun), phi(float(u_lo)), float(u_hi) ** 2 + float(v_min) ** 2)
    logger.debug("bounded scalar search for a product gap over %d coordinates", len(window))
    return GapResult(math.sqrt(max(best, 0.0)), False)


# =============================================================================
# Gap, support, separation
# =============================================================================

@lru_cache(maxsize=65536)
def _gap(norm: NormSpec, A: ConvexSet, B: ConvexSet) -> GapResult:
    if _empty(A) or _empty(B):
        return GapResult(math.inf, True)
    point = _single_point(A)
    if point is not None:
        proj = _projection(norm, point, B, False)
        return GapResult(proj.value, proj.exact)
    point = _single_point(B)
    if point is not None:
        proj = _projection(norm, point, A, False)
        return GapResult(proj.value, proj.exact)
    for first, second in ((A, B), (B, A)):
        reduced = _ball_reduction(norm, second)
        if reduced is not None:
            base, radius = reduced
            inner = _gap(norm, first, base)
            return GapResult(_minus_radius(inner.value, radius), inner.exact)
    if norm.is_polyhedral and not requires_euclidean(A) and not requires_euclidean(B):
        value, _ = _gap_program(norm, A, B)
        return GapResult(value, True)
    if norm.family == NormFamily.PRODUCT2:
        for first, second in ((A, B), (B, A)):
            truncated = _truncated_epigraph(norm, second, first)
            if truncated is not None:
                return _gap(norm, first, truncated)
    if norm.family == NormFamily.ELL2 or (norm.family == NormFamily.PRODUCT2
                                          and norm.inner.family == NormFamily.ELL2):
        return _euclidean_gap(A, B)
    if norm.family == NormFamily.PRODUCT2:
        return _product_gap(norm, A, B)
    raise NotPolyhedralError(f"no gap path for {norm.label}")


def _gap_program(norm: NormSpec, A: ConvexSet, B: ConvexSet) -> Tuple[Fraction, Functional]:
    """Joint program min ||a - b||; returns the value and -duals of the link rows."""
    window = computation_window(norm, A.support, B.support)
    lp = LinearProgram("gap")
    avars = {i: lp.free(f"a{i}") for i in window}
    bvars = {i: lp.free(f"b{i}") for i in window}
    encode_membership(lp, A, avars)
    encode_membership(lp, B, bvars)
    dvars = {i: lp.free(f"d{i}") for i in window}
    links = {i: lp.add({dvars[i]: 1, avars[i]: -1, bvars[i]: 1}, Sense.EQ) for i in window}
    t = lp.nonneg("t")
    encode_norm_bound(lp, norm, dvars, {t: 1})
    lp.minimize({t: 1})
    result = lp.solve(with_duals=True)
    if not result.optimal:
        raise SeparationError(f"gap program is {result.status.value}")
    out_window = A.window.union(B.window).union(window)
    direction = Functional({i: -result.dual(row) for i, row in links.items()}, out_window)
    return result.objective, direction


def _euclidean_gap(A: ConvexSet, B: ConvexSet) -> GapResult:
    if isinstance(A, Polytope) and isinstance(B, Polytope):
        diffs = list(dict.fromkeys(a - b for a in A.vertices for b in B.vertices))
        origin = Vector.zero(diffs[0].window)
        proj = _euclidean_projection(origin, Polytope(tuple(diffs)))
        return GapResult(proj.value, proj.exact)
    bounded, other = (A, B) if isinstance(A, Polytope) else (B, A)
    if not isinstance(bounded, Polytope):
        raise NotPolyhedralError("Euclidean gap needs a polytope on one side")
    return _float_gap(bounded, other)


def _float_gap(P: Polytope, S: ConvexSet) -> GapResult:
    window = _data_window(P.window, P.support, S.support)
    lp = LinearProgram(f"float_gap[{S.kind}]")
    avars = {i: lp.free(f"a{i}") for i in window}
    bvars = {i: lp.free(f"b{i}") for i in window}
    encode_membership(lp, P, avars)
    encode_membership(lp, S, bvars)
    solution = _least_squares(lp, [({avars[i]: 1, bvars[i]: -1}, 0.0) for i in window])
    if solution is None:
        return GapResult(math.inf, True)
    residual = [solution[avars[i]] - solution[bvars[i]] for i in window]
    return GapResult(float(np.linalg.norm(residual)), False)


def support_value(f: Functional, C: ConvexSet) -> Scalar:
    """sup{<f, c> : c in C}; +inf when unbounded, -inf when C is empty."""
    if _empty(C):
        return -math.inf
    if isinstance(C, Polytope):
        return max(f.dot(v) for v in C.vertices)
    if isinstance(C, NormBall):
        offset = f.dot(C.center)
        spread = C.radius * dual_norm_eval(C.norm, f)
        if offset == 0:
            return spread
        return offset + spread if not isinstance(spread, Surd) else float(offset) + float(spread)
    if isinstance(C, MinkowskiSum):
        first, second = support_value(f, C.base), support_value(f, C.ball)
        if isinstance(first, Surd) or isinstance(second, Surd):
            return to_float(first) + to_float(second)
        return first + second
    if isinstance(C, (Hyperplane, Halfspace)):
        g, level = (C.functional, C.level) if isinstance(C, Hyperplane) else C.as_le()
        if f.is_zero():
            return Fraction(0)
        ratio = _parallel_ratio(f, g)
        if ratio is None:
            return math.inf
        if isinstance(C, Halfspace) and ratio < 0:
            return math.inf
        return ratio * level
    if requires_euclidean(C):
        raise NotPolyhedralError(f"support of a {C.kind} with a Euclidean ball")
    window = _data_window(C.window, f.support, C.support)
    lp = LinearProgram(f"support[{C.kind}]")
    zvars = {i: lp.free(f"z{i}") for i in window}
    encode_membership(lp, C, zvars)
    lp.maximize({zvars[i]: v for i, v in f.entries})
    result = lp.solve()
    if result.status == LPStatus.UNBOUNDED:
        return math.inf
    if result.status == LPStatus.INFEASIBLE:
        return -math.inf
    return result.objective


def _parallel_ratio(f: Functional, g: Functional) -> Optional[Fraction]:
    """lambda with f = lambda g, or None."""
    if g.is_zero():
        return None
    first_index, first_value = g.entries[0]
    ratio = f.get(first_index) / first_value
    if set(f.support) != set(g.support):
        return None
    if all(f.get(i) == ratio * v for i, v in g.entries):
        return ratio
    return None


class GeometryEngine:
    """
    Geometric kernel for one ambient norm.

    Results of distance and gap queries are memoised per (norm, data); the
    data types are immutable so the caches are safe to share across threads.
    """

    def __init__(self, norm: NormSpec):
        self.norm = norm

    def distance(self, x: Vector, C: ConvexSet) -> Scalar:
        return _projection(self.norm, x, C, False).value

    def distance_result(self, x: Vector, C: ConvexSet) -> Projection:
        return _projection(self.norm, x, C, False)

    def nearest_point(self, x: Vector, C: ConvexSet) -> Projection:
        """Attained minimiser; ties broken by the smallest ell1 displacement."""
        return _projection(self.norm, x, C, True)

    def gap(self, A: ConvexSet, B: ConvexSet) -> Scalar:
        return _gap(self.norm, A, B).value

    def gap_result(self, A: ConvexSet, B: ConvexSet) -> GapResult:
        return _gap(self.norm, A, B)

    def support_value(self, f: Functional, C: ConvexSet) -> Scalar:
        return support_value(f, C)

    def separate(self, A: ConvexSet, B: ConvexSet) -> Separation:
        """
        Unit functional L with sup_A L < inf_B L and maximal margin.

        The margin equals gap(A, B) exactly (LP duality).
        """
        norm = self.norm
        if not norm.is_polyhedral or requires_euclidean(A) or requires_euclidean(B):
            raise NotPolyhedralError("separation needs a polyhedral instance")
        if _empty(A) or _empty(B):
            raise SeparationError("cannot separate an empty set")
        gap_value, direction = _gap_program(norm, A, B)
        if gap_value == 0:
            raise SeparationError("sets are not strictly separated (gap is 0)")
        scale = dual_norm_eval(norm, direction)
        if scale == 0:
            raise ConsistencyError("gap program returned a zero separating direction")
        if scale != 1:
            direction = direction.scale(1 / scale)
        sup_a = support_value(direction, A)
        inf_b = -support_value(-direction, B)
        if inf_b - sup_a != gap_value:
            raise ConsistencyError(
                f"separation margin {inf_b - sup_a} differs from gap {gap_value}")
        return Separation(direction, sup_a, inf_b)

    def distance_subgradient(self, x: Vector, C: ConvexSet) -> Functional:
        """An element of the subdifferential of d(., C) at x."""
        if _empty(C):
            raise PreconditionError("distance subgradient needs a non-empty set")
        norm = self.norm
        if norm.family == NormFamily.ELL2:
            proj = _euclidean_projection(x, C)
            if proj.value == 0:
                return Functional.zero(x.window)
            diff = x - proj.point
            return _unit_direction(diff.as_functional(), proj.value)
        if not norm.is_polyhedral or requires_euclidean(C):
            raise NotPolyhedralError(f"no subgradient path for {norm.label}")
        value, grad = _distance_duals(norm, x, C)
        if value == 0:
            return Functional.zero(grad.window)
        return grad


def _unit_direction(f: Functional, length: Scalar) -> Functional:
    if isinstance(length, Fraction):
        return f.scale(1 / length)
    logger.debug("irrational Euclidean length; subgradient rounded to 1e-12")
    inv = 1.0 / to_float(length)
    return Functional({i: Fraction(float(v) * inv).limit_denominator(10 ** 12) for i, v in f.entries},
                      f.window)


# =============================================================================
# Module-level operations
# =============================================================================

def distance(x: Vector, C: ConvexSet, norm: NormSpec) -> Scalar:
    return GeometryEngine(norm).distance(x, C)


def nearest_point(x: Vector, C: ConvexSet, norm: NormSpec) -> Projection:
    return GeometryEngine(norm).nearest_point(x, C)


def gap(A: ConvexSet, B: ConvexSet, norm: NormSpec) -> Scalar:
    return GeometryEngine(norm).gap(A, B)


def separate(A: ConvexSet, B: ConvexSet, norm: NormSpec) -> Separation:
    return GeometryEngine(norm).separate(A, B)


def distance_subgradient(x: Vector, C: ConvexSet, norm: NormSpec) -> Functional:
    return GeometryEngine(norm).distance_subgradient(x, C)


def epigraph_build(f: PolyFunc, inner: NormSpec) -> Epigraph:
    """Epigraph of f in X x R; the scalar sits one past the window's top index."""
    slot = f.window.top + 1
    return Epigraph(f, NormSpec.product2(inner, slot))


def coercivity_margin(f: PolyFunc, radii: Sequence, norm: NormSpec) -> List[Scalar]:
    """min{f(x) / ||x|| : ||x|| = R, x in dom f} for each radius R (+inf if empty)."""
    if not norm.is_polyhedral:
        raise NotPolyhedralError(f"{norm.label} sphere has no finite face list")
    window = computation_window(norm, f.support)
    faces = dual_ball_vertices(norm, window)
    margins: List[Scalar] = []
    for radius in radii:
        radius = Fraction(radius)
        if radius <= 0:
            raise ValueError("radii must be positive")
        best: Optional[Fraction] = None
        for g in faces:
            lp = LinearProgram("coercivity")
            xvars = {i: lp.free(f"x{i}") for i in window}
            s = lp.free("s")
            for piece, offset in f.pieces:
                row = {xvars[i]: v for i, v in piece.entries}
                row[s] = Fraction(-1)
                lp.add(row, Sense.LE, -offset)
            if f.domain is not None:
                encode_membership(lp, f.domain, xvars)
            lp.add({xvars[i]: v for i, v in g.entries}, Sense.EQ, radius)
            encode_norm_bound(lp, norm, xvars, {lp.constant(1): radius})
            lp.minimize({s: 1})
            result = lp.solve()
            if result.optimal and (best is None or result.objective < best):
                best = result.objective
        margins.append(math.inf if best is None else best / radius)
    return margins
