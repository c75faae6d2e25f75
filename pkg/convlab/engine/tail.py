"""
Tail Analysis

Decides whether a finite trace n -> v_n converges to a target on the tail
[H/2, H] of a horizon H.

The trace is fitted by L + a/n + b/n^2 through three nodes of the tail
(exact Lagrange extrapolation to 1/n = 0, on squared values for square-root
traces). A trace converges when its maximum tail deviation is within tol,
or when it passes the Cauchy check and the extrapolated limit is within
tol plus the extrapolation error of the target.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from convlab.engine.space import (Scalar, abs_difference, compare, is_exact, root,
                                  square_of, to_float)


@dataclass
class TailFit:
    limit_estimate: Scalar
    extrapolation_error: Scalar
    max_deviation: Scalar
    argmax_n: int
    cauchy: bool
    converged: bool


def tail_start(horizon: int, start_index: int = 1) -> int:
    return max(start_index, (horizon + 1) // 2)


def tail_indices(horizon: int, start_index: int = 1, samples: int = 0) -> List[int]:
    """Tail indices; with samples > 0, an evenly spread subset keeping the fit nodes."""
    first = tail_start(horizon, start_index)
    full = list(range(first, horizon + 1))
    if samples <= 0 or samples >= len(full):
        return full
    picked = {full[round(k * (len(full) - 1) / max(samples - 1, 1))] for k in range(samples)}
    picked.update(fit_nodes(full))
    return sorted(picked)


def fit_nodes(indices: Sequence[int]) -> Tuple[int, ...]:
    """First, middle and last tail index (fewer when the tail is short)."""
    first, last = indices[0], indices[-1]
    middle = min(indices, key=lambda n: (abs(2 * n - first - last), n))
    return tuple(sorted({first, middle, last}))


def _lagrange_at_zero(nodes: Sequence[int], values: Sequence) -> object:
    # nodes in h = 1/n, evaluated at h = 0
    hs = [Fraction(1, n) for n in nodes]
    exact = all(isinstance(v, Fraction) for v in values)
    total = Fraction(0) if exact else 0.0
    for k, v in enumerate(values):
        weight = Fraction(1)
        for j, h in enumerate(hs):
            if j != k:
                weight *= (0 - h) / (hs[k] - h)
        total += weight * v if exact else float(weight) * float(v)
    return total


def _is_infinite(value) -> bool:
    return isinstance(value, float) and math.isinf(value)


def extrapolate(trace: Dict[int, Scalar]) -> Tuple[Scalar, Scalar]:
    """(limit estimate, error estimate) from the trace's fit nodes."""
    indices = sorted(trace)
    nodes = fit_nodes(indices)
    values = [trace[n] for n in nodes]
    if any(_is_infinite(v) for v in values):
        last = values[-1]
        return last, Fraction(0) if all(v == last for v in values) else math.inf
    squared = False
    if all(isinstance(v, Fraction) for v in values):
        pass
    elif all(is_exact(v) for v in values):
        squared = True
        values = [square_of(v) for v in values]
    else:
        values = [to_float(v) for v in values]
    full = _lagrange_at_zero(nodes, values)
    first_order = _lagrange_at_zero(nodes[-2:], values[-2:]) if len(nodes) > 1 else full
    if squared:
        full_root = root(max(full, Fraction(0)))
        first_root = root(max(first_order, Fraction(0)))
        return full_root, abs_difference(full_root, first_root)
    return full, abs_difference(full, first_order)


def _spread(values: Sequence[Scalar]) -> Scalar:
    hi = max(values, key=_sort_key)
    lo = min(values, key=_sort_key)
    return abs_difference(hi, lo)


def _sort_key(value):
    return to_float(value)


def _le(a: Scalar, b: Scalar) -> bool:
    return compare(a, b) <= 0


def _plus(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    return to_float(a) + to_float(b)


def cauchy_check(trace: Dict[int, Scalar], tol) -> bool:
    """Second half of the tail spreads less than the first half (or within tol)."""
    indices = sorted(trace)
    if len(indices) < 3:
        return True
    mid = fit_nodes(indices)[len(fit_nodes(indices)) // 2]
    first = [trace[n] for n in indices if n <= mid]
    second = [trace[n] for n in indices if n >= mid]
    if any(_is_infinite(v) for v in second):
        return all(v == second[0] for v in second)
    late = _spread(second)
    if _le(late, tol):
        return True
    if any(_is_infinite(v) for v in first):
        return True
    early = _spread(first)
    return compare(late, early) < 0


def analyze(trace: Dict[int, Scalar], target: Scalar, tol) -> TailFit:
    """Judge trace -> target on the supplied tail."""
    indices = sorted(trace)
    deviations = {n: abs_difference(trace[n], target) for n in indices}
    argmax_n = max(indices, key=lambda n: (to_float(deviations[n]), -n))
    max_dev = deviations[argmax_n]
    limit, error = extrapolate(trace)
    cauchy = cauchy_check(trace, tol)
    if _le(max_dev, tol):
        converged = True
    elif cauchy and not _is_infinite(max_dev):
        converged = _le(abs_difference(limit, target), _plus(tol, error))
    else:
        converged = False
    return TailFit(limit, error, max_dev, argmax_n, cauchy, converged)


def limsup_within(trace: Dict[int, Scalar], bound: Scalar, tol) -> TailFit:
    """Judge limsup trace <= bound + tol on the supplied tail."""
    indices = sorted(trace)
    excess = {n: _excess(trace[n], bound) for n in indices}
    argmax_n = max(indices, key=lambda n: (to_float(excess[n]), -n))
    max_excess = excess[argmax_n]
    limit, error = extrapolate(trace)
    cauchy = cauchy_check(trace, tol)
    mid = fit_nodes(indices)[len(fit_nodes(indices)) // 2]
    late_excess = max((excess[n] for n in indices if n >= mid), key=to_float)
    if _le(late_excess, tol):
        converged = True
    elif cauchy and not _is_infinite(late_excess):
        converged = _le(_excess(limit, bound), _plus(tol, error))
    else:
        converged = False
    return TailFit(limit, error, max_excess, argmax_n, cauchy, converged)


def _excess(value: Scalar, bound: Scalar) -> Scalar:
    if compare(value, bound) <= 0:
        return Fraction(0)
    return abs_difference(value, bound)


def vector_limit(points: Dict[int, Dict[int, Fraction]], core: Sequence[int]
                 ) -> Tuple[Dict[int, Scalar], Dict[int, Scalar], bool]:
    """
    Coordinatewise extrapolation of a vector trace on the core indices.

    Returns (limit coordinates, per-coordinate error, all coordinates Cauchy).
    """
    limit: Dict[int, Scalar] = {}
    errors: Dict[int, Scalar] = {}
    cauchy = True
    for i in core:
        trace = {n: coords.get(i, Fraction(0)) for n, coords in points.items()}
        value, error = extrapolate(trace)
        limit[i] = value
        errors[i] = error
        cauchy = cauchy and cauchy_check(trace, Fraction(0))
    return limit, errors, cauchy
