"""
Sequence Space Core

Finitely supported vectors and functionals over a coordinate window, the
norm families the laboratory works with, and exact evaluation of norms,
dual norms and the norm metric rho.

Coordinates outside a window are zero. Polyhedral families are evaluated
by exact linear programming; Euclidean quantities are carried as exact
square roots of rationals (Surd) where possible.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import (Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional,
                    Sequence, Tuple, Union)

import cdd

from convlab.engine.errors import (NotPolyhedralError, UnboundedProgramError,
                                   WindowMismatchError)
from convlab.engine.linear_program import NUMBER_TYPE, LinearProgram, LinExpr, Sense
from convlab.utils.rationals import format_float, format_rational

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]


# =============================================================================
# Scalars
# =============================================================================

def _exact_root(square: Fraction) -> Optional[Fraction]:
    num, den = square.numerator, square.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def _signed_square(value) -> Tuple[int, Fraction]:
    if isinstance(value, Surd):
        return (1 if value.square > 0 else 0), value.square
    value = Fraction(value)
    return (value > 0) - (value < 0), value * value


def compare(a, b) -> int:
    """Three-way comparison, exact unless a float is involved."""
    if isinstance(a, float) or isinstance(b, float):
        fa, fb = to_float(a), to_float(b)
        return (fa > fb) - (fa < fb)
    sa, qa = _signed_square(a)
    sb, qb = _signed_square(b)
    if sa != sb:
        return (sa > sb) - (sa < sb)
    if sa >= 0:
        return (qa > qb) - (qa < qb)
    return (qa < qb) - (qa > qb)


@dataclass(frozen=True, eq=False)
class Surd:
    """Non-negative square root of a rational, stored as its square."""
    square: Fraction

    def __post_init__(self):
        object.__setattr__(self, "square", Fraction(self.square))
        if self.square < 0:
            raise ValueError("square root of a negative rational")

    def __float__(self) -> float:
        return math.sqrt(self.square)

    def __eq__(self, other):
        if not isinstance(other, (Surd, int, Fraction, float)):
            return NotImplemented
        return compare(self, other) == 0

    def __lt__(self, other):
        if not isinstance(other, (Surd, int, Fraction, float)):
            return NotImplemented
        return compare(self, other) < 0

    def __le__(self, other):
        if not isinstance(other, (Surd, int, Fraction, float)):
            return NotImplemented
        return compare(self, other) <= 0

    def __gt__(self, other):
        if not isinstance(other, (Surd, int, Fraction, float)):
            return NotImplemented
        return compare(self, other) > 0

    def __ge__(self, other):
        if not isinstance(other, (Surd, int, Fraction, float)):
            return NotImplemented
        return compare(self, other) >= 0

    def __hash__(self):
        exact = _exact_root(self.square)
        return hash(exact) if exact is not None else hash(("surd", self.square))

    def __mul__(self, other):
        if isinstance(other, Surd):
            return root(self.square * other.square)
        if isinstance(other, (int, Fraction)) and other >= 0:
            return root(self.square * Fraction(other) ** 2)
        if isinstance(other, (int, Fraction, float)):
            return float(self) * float(other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Surd) and other.square != 0:
            return root(self.square / other.square)
        if isinstance(other, (int, Fraction)) and other > 0:
            return root(self.square / Fraction(other) ** 2)
        if isinstance(other, (int, Fraction, float)):
            return float(self) / float(other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)) and other >= 0 and self.square != 0:
            return root(Fraction(other) ** 2 / self.square)
        if isinstance(other, (int, Fraction, float)):
            return float(other) / float(self)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, (Surd, int, Fraction, float)):
            return float(self) + to_float(other)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (Surd, int, Fraction, float)):
            return float(self) - to_float(other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (Surd, int, Fraction, float)):
            return to_float(other) - float(self)
        return NotImplemented

    def __neg__(self):
        return -float(self)

    def __str__(self) -> str:
        return f"sqrt({format_rational(self.square)})"

    def __repr__(self) -> str:
        return f"Surd({format_rational(self.square)})"


Scalar = Union[Fraction, Surd, float]


def root(square: Number) -> Union[Fraction, Surd]:
    """Exact square root: a Fraction when the square is perfect."""
    square = Fraction(square)
    exact = _exact_root(square)
    return exact if exact is not None else Surd(square)


def square_of(value: Scalar):
    if isinstance(value, Surd):
        return value.square
    return value * value


def to_float(value) -> float:
    return float(value)


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction, Surd))


def abs_difference(a: Scalar, b: Scalar) -> Scalar:
    """|a - b|, exact when both are exact and the result is rational."""
    if isinstance(a, float) and math.isinf(a) or isinstance(b, float) and math.isinf(b):
        return Fraction(0) if a == b else math.inf
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return abs(Fraction(a) - Fraction(b))
    if is_exact(a) and is_exact(b) and compare(a, b) == 0:
        return Fraction(0)
    return abs(to_float(a) - to_float(b))


def format_scalar(value) -> str:
    """Report form of a scalar: "p/q", "sqrt(p/q)" or a decimal."""
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, (int, Fraction)):
        return format_rational(Fraction(value))
    if isinstance(value, Surd):
        return str(value)
    return format_float(float(value))


# =============================================================================
# Windows, vectors, functionals
# =============================================================================

@dataclass(frozen=True)
class Window:
    """Finite sorted set of coordinate indices."""
    indices: Tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise ValueError("a window must be non-empty")
        if any(i < 0 for i in idx):
            raise ValueError("window indices are natural numbers")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError("window indices must be distinct and sorted")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, *groups: Iterable[int]) -> "Window":
        merged = set()
        for group in groups:
            merged.update(group)
        return cls(tuple(sorted(merged)))

    @classmethod
    def interval(cls, lo: int, hi: int) -> "Window":
        """Indices lo..hi inclusive."""
        return cls(tuple(range(lo, hi + 1)))

    def __contains__(self, index: int) -> bool:
        return index in self._members

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def _members(self) -> FrozenSet[int]:
        members = self.__dict__.get("_member_set")
        if members is None:
            members = frozenset(self.indices)
            object.__setattr__(self, "_member_set", members)
        return members

    def union(self, other: "Window") -> "Window":
        if other is self or other.indices == self.indices:
            return self
        return Window.of(self.indices, other.indices)

    def covers(self, indices: Iterable[int]) -> bool:
        return all(i in self for i in indices)

    @property
    def top(self) -> int:
        return self.indices[-1]


@dataclass(frozen=True, init=False)
class _Coordinates:
    entries: Tuple[Tuple[int, Fraction], ...]
    window: Window

    def __init__(self, entries: Union[Mapping[int, Number], Iterable[Tuple[int, Number]]] = (),
                 window: Optional[Window] = None):
        pairs = entries.items() if isinstance(entries, Mapping) else entries
        cleaned: Dict[int, Fraction] = {}
        for index, value in pairs:
            index = int(index)
            cleaned[index] = cleaned.get(index, Fraction(0)) + Fraction(value)
        cleaned = {i: v for i, v in cleaned.items() if v != 0}
        if window is None:
            window = Window.of(cleaned) if cleaned else Window((0,))
        outside = [i for i in cleaned if i not in window]
        if outside:
            raise WindowMismatchError(
                f"{type(self).__name__} has entries {sorted(outside)} outside its window")
        object.__setattr__(self, "entries", tuple(sorted(cleaned.items())))
        object.__setattr__(self, "window", window)

    @classmethod
    def basis(cls, index: int, window: Window, value: Number = 1):
        return cls({index: value}, window)

    @classmethod
    def zero(cls, window: Window):
        return cls({}, window)

    def get(self, index: int) -> Fraction:
        return self.as_dict().get(index, Fraction(0))

    def as_dict(self) -> Dict[int, Fraction]:
        cached = self.__dict__.get("_dict")
        if cached is None:
            cached = dict(self.entries)
            object.__setattr__(self, "_dict", cached)
        return cached

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def rehome(self, window: Window):
        """Same entries in another window (which must contain the support)."""
        return type(self)(self.entries, window)

    def _combine(self, other, sign: int):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        merged = dict(self.entries)
        for i, v in other.entries:
            merged[i] = merged.get(i, Fraction(0)) + sign * v
        return type(self)(merged, self.window.union(other.window))

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return type(self)({i: -v for i, v in self.entries}, self.window)

    def scale(self, factor: Number):
        factor = Fraction(factor)
        return type(self)({i: factor * v for i, v in self.entries}, self.window)

    def __mul__(self, factor: Number):
        if isinstance(factor, (int, Fraction)):
            return self.scale(factor)
        return NotImplemented

    __rmul__ = __mul__

    def dot(self, other: "_Coordinates") -> Fraction:
        small, large = (self, other) if len(self.entries) <= len(other.entries) else (other, self)
        values = large.as_dict()
        return sum((v * values.get(i, 0) for i, v in small.entries), Fraction(0))

    def describe(self) -> str:
        if not self.entries:
            return "0"
        return " + ".join(f"{format_rational(v)}*e{i}" for i, v in self.entries)


class Vector(_Coordinates):
    """Finitely supported point of the sequence space."""

    def as_functional(self) -> "Functional":
        return Functional(self.entries, self.window)


class Functional(_Coordinates):
    """Finitely supported linear functional; pairs with vectors by the dot product."""

    def __call__(self, x: Vector) -> Fraction:
        return self.dot(x)

    def pair(self, x: Vector) -> Fraction:
        return self.dot(x)

    def as_vector(self) -> Vector:
        return Vector(self.entries, self.window)


# =============================================================================
# Norm specifications
# =============================================================================

class NormFamily(str, Enum):
    SUP_C0 = "supC0"
    ELL1 = "ell1"
    ELL2 = "ell2"
    BV_C0 = "bvC0"
    PREDUAL_OF_BALL = "predualOfBall"
    PRODUCT2 = "product2"


@dataclass(frozen=True)
class DualBallDescription:
    """
    B = {L : |<L, y_k>| <= b_k for all k} intersected with R times the dual
    unit ball of the base norm.
    """
    constraints: Tuple[Tuple[Vector, Fraction], ...]
    radius: Fraction
    base: "NormSpec"

    def __post_init__(self):
        object.__setattr__(self, "constraints",
                           tuple((y, Fraction(b)) for y, b in self.constraints))
        object.__setattr__(self, "radius", Fraction(self.radius))
        if self.radius <= 0:
            raise ValueError("scaled ball radius must be positive")
        for y, b in self.constraints:
            if b <= 0:
                raise ValueError("slab bounds must be positive")
            if y.is_zero():
                raise ValueError("slab directions must be non-zero")
        if self.base.family in (NormFamily.PREDUAL_OF_BALL, NormFamily.PRODUCT2):
            raise ValueError("base norm of a dual ball must be a plain family")

    @property
    def support(self) -> FrozenSet[int]:
        out = set(self.base.required_indices)
        for y, _ in self.constraints:
            out.update(y.support)
        return frozenset(out)


@dataclass(frozen=True)
class NormSpec:
    family: NormFamily
    ball: Optional[DualBallDescription] = None
    inner: Optional["NormSpec"] = None
    slot: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "family", NormFamily(self.family))
        if self.family == NormFamily.PREDUAL_OF_BALL and self.ball is None:
            raise ValueError("predualOfBall needs a dual ball description")
        if self.family == NormFamily.PRODUCT2:
            if self.inner is None or self.slot is None:
                raise ValueError("product2 needs an inner norm and a scalar slot")
            if self.inner.family == NormFamily.PRODUCT2:
                raise ValueError("product2 norms do not nest")

    @classmethod
    def sup_c0(cls) -> "NormSpec":
        return cls(NormFamily.SUP_C0)

    @classmethod
    def ell1(cls) -> "NormSpec":
        return cls(NormFamily.ELL1)

    @classmethod
    def ell2(cls) -> "NormSpec":
        return cls(NormFamily.ELL2)

    @classmethod
    def bv_c0(cls) -> "NormSpec":
        return cls(NormFamily.BV_C0)

    @classmethod
    def predual_of_ball(cls, ball: DualBallDescription) -> "NormSpec":
        return cls(NormFamily.PREDUAL_OF_BALL, ball=ball)

    @classmethod
    def product2(cls, inner: "NormSpec", slot: int) -> "NormSpec":
        return cls(NormFamily.PRODUCT2, inner=inner, slot=slot)

    @property
    def is_polyhedral(self) -> bool:
        if self.family in (NormFamily.SUP_C0, NormFamily.ELL1, NormFamily.BV_C0):
            return True
        if self.family == NormFamily.PREDUAL_OF_BALL:
            return self.ball.base.is_polyhedral
        return False

    @property
    def required_indices(self) -> FrozenSet[int]:
        if self.family == NormFamily.BV_C0:
            return frozenset((0, 1))
        if self.family == NormFamily.PREDUAL_OF_BALL:
            return self.ball.support
        if self.family == NormFamily.PRODUCT2:
            return self.inner.required_indices | {self.slot}
        return frozenset()

    @property
    def label(self) -> str:
        if self.family == NormFamily.PRODUCT2:
            return f"product2({self.inner.label}, slot={self.slot})"
        if self.family == NormFamily.PREDUAL_OF_BALL:
            return f"predualOfBall({len(self.ball.constraints)} slabs, R={self.ball.radius}, {self.ball.base.label})"
        return self.family.value

    def check_window(self, window: Window) -> None:
        if self.family == NormFamily.BV_C0 and not (0 in window and 1 in window):
            raise WindowMismatchError("bvC0 needs coordinates 0 and 1 in the window")
        if self.family == NormFamily.PREDUAL_OF_BALL:
            self.ball.base.check_window(window)


def computation_window(norm: NormSpec, *groups: Iterable[int]) -> Window:
    """Indices an exact program must carry: data supports plus the norm's own."""
    indices = set(norm.required_indices)
    for group in groups:
        indices.update(group)
    if not indices:
        indices.add(0)
    return Window.of(indices)


def _bv_rows(indices: Iterable[int]) -> List[Dict[int, Fraction]]:
    one = Fraction(1)
    rows = [{0: one}, {1: one}]
    rows.extend({m: one, 1: one} for m in sorted(indices) if m >= 2)
    return rows


def _row(*parts: Mapping[int, Number]) -> Dict[int, Fraction]:
    out: Dict[int, Fraction] = {}
    for part in parts:
        for var, coef in part.items():
            out[var] = out.get(var, Fraction(0)) + Fraction(coef)
    return out


def _neg(expr: Mapping[int, Number]) -> Dict[int, Fraction]:
    return {v: -Fraction(c) for v, c in expr.items()}


# =============================================================================
# LP encodings of norm balls
# =============================================================================

def encode_norm_bound(lp: LinearProgram, norm: NormSpec, xvars: Mapping[int, int],
                      bound: LinExpr) -> None:
    """Add rows forcing norm(x) <= bound, x given coordinatewise by xvars."""
    family = norm.family
    if family == NormFamily.SUP_C0:
        for var in xvars.values():
            lp.add(_row({var: 1}, _neg(bound)), Sense.LE)
            lp.add(_row({var: -1}, _neg(bound)), Sense.LE)
    elif family == NormFamily.ELL1:
        total: Dict[int, Fraction] = {}
        for index, var in xvars.items():
            s = lp.nonneg(f"abs{index}")
            lp.add({var: 1, s: -1}, Sense.LE)
            lp.add({var: -1, s: -1}, Sense.LE)
            total[s] = Fraction(1)
        lp.add(_row(total, _neg(bound)), Sense.LE)
    elif family == NormFamily.BV_C0:
        if 0 not in xvars or 1 not in xvars:
            raise WindowMismatchError("bvC0 needs coordinates 0 and 1 in the window")
        for g in _bv_rows(xvars):
            expr = {xvars[i]: c for i, c in g.items()}
            lp.add(_row(expr, _neg(bound)), Sense.LE)
            lp.add(_row(_neg(expr), _neg(bound)), Sense.LE)
    elif family == NormFamily.PREDUAL_OF_BALL:
        ball = norm.ball
        if not ball.base.is_polyhedral:
            raise NotPolyhedralError(f"{norm.label} has a Euclidean base")
        if not set(ball.support) <= set(xvars):
            raise WindowMismatchError("dual ball data lies outside the program window")
        # x = sum_k c_k y_k + w, sum_k b_k |c_k| + R * base(w) <= bound
        wvars = {i: lp.free(f"w{i}") for i in xvars}
        budget: Dict[int, Fraction] = {}
        combos: Dict[int, Dict[int, Fraction]] = {i: {wvars[i]: Fraction(1)} for i in xvars}
        for k, (y, b) in enumerate(ball.constraints):
            cp, cm = lp.nonneg(f"c{k}+"), lp.nonneg(f"c{k}-")
            for i, yi in y.entries:
                combos[i][cp] = yi
                combos[i][cm] = -yi
            budget[cp] = b
            budget[cm] = b
        for i, var in xvars.items():
            lp.add(_row({var: 1}, _neg(combos[i])), Sense.EQ)
        u = lp.nonneg("u")
        encode_norm_bound(lp, ball.base, wvars, {u: 1})
        budget[u] = ball.radius
        lp.add(_row(budget, _neg(bound)), Sense.LE)
    else:
        raise NotPolyhedralError(f"{norm.label} has no linear encoding")


def encode_dual_norm_bound(lp: LinearProgram, norm: NormSpec, fvars: Mapping[int, int],
                           bound: LinExpr) -> None:
    """Add rows forcing dual_norm(f) <= bound."""
    family = norm.family
    if family == NormFamily.SUP_C0:
        encode_norm_bound(lp, NormSpec.ell1(), fvars, bound)
    elif family == NormFamily.ELL1:
        encode_norm_bound(lp, NormSpec.sup_c0(), fvars, bound)
    elif family == NormFamily.BV_C0:
        if 0 not in fvars or 1 not in fvars:
            raise WindowMismatchError("bvC0 needs coordinates 0 and 1 in the window")
        # f = sum_g lambda_g g over the defining rows, sum |lambda_g| <= bound
        combos: Dict[int, Dict[int, Fraction]] = {i: {} for i in fvars}
        total: Dict[int, Fraction] = {}
        for k, g in enumerate(_bv_rows(fvars)):
            p, q = lp.nonneg(f"l{k}+"), lp.nonneg(f"l{k}-")
            for i, c in g.items():
                combos[i][p] = c
                combos[i][q] = -c
            total[p] = Fraction(1)
            total[q] = Fraction(1)
        for i, var in fvars.items():
            lp.add(_row({var: 1}, _neg(combos[i])), Sense.EQ)
        lp.add(_row(total, _neg(bound)), Sense.LE)
    elif family == NormFamily.PREDUAL_OF_BALL:
        ball = norm.ball
        if not ball.base.is_polyhedral:
            raise NotPolyhedralError(f"{norm.label} has a Euclidean base")
        for y, b in ball.constraints:
            expr = {fvars[i]: yi for i, yi in y.entries}
            scaled = {v: b * Fraction(c) for v, c in bound.items()}
            lp.add(_row(expr, _neg(scaled)), Sense.LE)
            lp.add(_row(_neg(expr), _neg(scaled)), Sense.LE)
        encode_dual_norm_bound(lp, ball.base, fvars,
                               {v: ball.radius * Fraction(c) for v, c in bound.items()})
    else:
        raise NotPolyhedralError(f"{norm.label} has no linear encoding")


# =============================================================================
# Norm operations
# =============================================================================

def norm_eval(norm: NormSpec, x: Vector) -> Scalar:
    """Exact norm of x (a Surd for Euclidean families when irrational)."""
    family = norm.family
    if family == NormFamily.SUP_C0:
        return max((abs(v) for _, v in x.entries), default=Fraction(0))
    if family == NormFamily.ELL1:
        return sum((abs(v) for _, v in x.entries), Fraction(0))
    if family == NormFamily.ELL2:
        return root(sum((v * v for _, v in x.entries), Fraction(0)))
    if family == NormFamily.BV_C0:
        norm.check_window(x.window)
        x1 = x.get(1)
        value = max(abs(x.get(0)), abs(x1))
        for i, v in x.entries:
            if i >= 2:
                value = max(value, abs(v + x1))
        return max(value, abs(x1))
    if family == NormFamily.PREDUAL_OF_BALL:
        return predual_norm_from_dual_ball(norm.ball, x)
    if family == NormFamily.PRODUCT2:
        r = x.get(norm.slot)
        rest = Vector({i: v for i, v in x.entries if i != norm.slot}, x.window)
        inner = norm_eval(norm.inner, rest)
        if isinstance(inner, float):
            return math.hypot(inner, float(r))
        return root(square_of(inner) + r * r)
    raise NotPolyhedralError(f"unknown norm family {family}")


def dual_norm_eval(norm: NormSpec, f: Functional) -> Scalar:
    """sup{<f, x> : norm(x) <= 1}."""
    if f.is_zero():
        return Fraction(0)
    family = norm.family
    if family == NormFamily.SUP_C0:
        return sum((abs(v) for _, v in f.entries), Fraction(0))
    if family == NormFamily.ELL1:
        return max(abs(v) for _, v in f.entries)
    if family == NormFamily.ELL2:
        return root(sum((v * v for _, v in f.entries), Fraction(0)))
    if family == NormFamily.PRODUCT2:
        s = f.get(norm.slot)
        rest = Functional({i: v for i, v in f.entries if i != norm.slot}, f.window)
        inner = dual_norm_eval(norm.inner, rest)
        if isinstance(inner, float):
            return math.hypot(inner, float(s))
        return root(square_of(inner) + s * s)
    if family == NormFamily.PREDUAL_OF_BALL and not norm.ball.base.is_polyhedral:
        # gauge of an intersection of balls is the max of the gauges
        ball = norm.ball
        parts: List[Scalar] = [abs(f.dot(y)) / b for y, b in ball.constraints]
        parts.append(dual_norm_eval(ball.base, f) / ball.radius)
        return max(parts)
    if family == NormFamily.BV_C0:
        norm.check_window(f.window)
    return _dual_norm_program(norm, f)


def _dual_norm_program(norm: NormSpec, f: Functional) -> Fraction:
    window = computation_window(norm, f.support)
    lp = LinearProgram(f"dual_norm[{norm.label}]")
    xvars = {i: lp.free(f"x{i}") for i in window}
    encode_norm_bound(lp, norm, xvars, {lp.constant(1): 1})
    lp.maximize({xvars[i]: v for i, v in f.entries})
    result = lp.solve()
    if not result.optimal:
        raise UnboundedProgramError(f"dual norm program for {norm.label} is {result.status.value}")
    return result.objective


def predual_norm_from_dual_ball(ball: DualBallDescription, x: Vector) -> Scalar:
    """sup{<L, x> : L in B}; the norm whose dual unit ball is B."""
    if x.is_zero():
        return Fraction(0)
    base = ball.base
    if base.family == NormFamily.ELL2:
        return _predual_euclidean(ball, x)
    base.check_window(x.window)
    window = Window.of(x.support, ball.support)
    lp = LinearProgram("predual_norm")
    lvars = {i: lp.free(f"L{i}") for i in window}
    for y, b in ball.constraints:
        expr = {lvars[i]: yi for i, yi in y.entries}
        lp.add(expr, Sense.LE, b)
        lp.add(_neg(expr), Sense.LE, b)
    encode_dual_norm_bound(lp, base, lvars, {lp.constant(1): ball.radius})
    lp.maximize({lvars[i]: v for i, v in x.entries})
    result = lp.solve()
    if not result.optimal:
        raise UnboundedProgramError(f"dual ball program is {result.status.value}")
    return result.objective


def _predual_euclidean(ball: DualBallDescription, x: Vector) -> Scalar:
    if len(ball.constraints) > 1:
        raise NotPolyhedralError("Euclidean base supports a single slab")
    radius = ball.radius
    s = sum((v * v for _, v in x.entries), Fraction(0))
    if not ball.constraints:
        return root(radius * radius * s)
    y, b = ball.constraints[0]
    p = x.dot(y)
    q = sum((v * v for _, v in y.entries), Fraction(0))
    if radius * radius * p * p <= b * b * s:
        return root(radius * radius * s)
    # slab active: L = sign(p) b/q y + w with w orthogonal to y
    head = abs(p) * b / q
    tail_square = (radius * radius - b * b / q) * (s - p * p / q)
    tail = root(tail_square)
    if isinstance(tail, Fraction):
        return head + tail
    return float(head) + float(tail)


# =============================================================================
# Vertex enumeration
# =============================================================================

def polytope_vertices(halfspaces: Sequence[Tuple[Functional, Number]], window: Window) -> List[Vector]:
    """Vertices of {z : <a, z> <= b for every (a, b)} over the window, via cdd."""
    idx = window.indices
    rows = [[Fraction(b)] + [-a.get(i) for i in idx] for a, b in halfspaces]
    if not rows:
        raise UnboundedProgramError("vertex enumeration needs at least one halfspace")
    mat = cdd.Matrix(rows, number_type=NUMBER_TYPE)
    mat.rep_type = cdd.RepType.INEQUALITY
    generators = cdd.Polyhedron(mat).get_generators()
    if generators.lin_set:
        raise UnboundedProgramError("halfspace system contains a line")
    found = set()
    for k in range(generators.row_size):
        row = generators[k]
        if row[0] == 0:
            raise UnboundedProgramError("halfspace system is unbounded")
        found.add(tuple(Fraction(v) for v in row[1:]))
    logger.debug("cdd found %d vertices over %d coordinates", len(found), len(idx))
    return [Vector(dict(zip(idx, sol)), window) for sol in sorted(found)]


def _sign_vectors(window: Window, cls):
    for signs in itertools.product((1, -1), repeat=len(window)):
        yield cls(dict(zip(window.indices, signs)), window)


def unit_ball_generators(norm: NormSpec, window: Window) -> List[Vector]:
    """Points whose convex hull is the unit ball restricted to the window."""
    family = norm.family
    if family == NormFamily.SUP_C0:
        return list(_sign_vectors(window, Vector))
    if family == NormFamily.ELL1:
        return [Vector({i: s}, window) for i in window for s in (1, -1)]
    if family == NormFamily.BV_C0:
        norm.check_window(window)
        halfspaces = []
        for g in _bv_rows(window):
            halfspaces.append((Functional(g, window), 1))
            halfspaces.append((Functional({i: -c for i, c in g.items()}, window), 1))
        return polytope_vertices(halfspaces, window)
    if family == NormFamily.PREDUAL_OF_BALL:
        ball = norm.ball
        gens = [y.rehome(window).scale(sign / b) for y, b in ball.constraints for sign in (1, -1)]
        gens.extend(v.scale(1 / ball.radius) for v in unit_ball_generators(ball.base, window))
        return gens
    raise NotPolyhedralError(f"{norm.label} has no finite vertex set")


def dual_ball_vertices(norm: NormSpec, window: Window) -> List[Functional]:
    """Functionals whose convex hull is the dual unit ball on the window."""
    family = norm.family
    if family == NormFamily.SUP_C0:
        return [Functional({i: s}, window) for i in window for s in (1, -1)]
    if family == NormFamily.ELL1:
        return list(_sign_vectors(window, Functional))
    if family == NormFamily.BV_C0:
        norm.check_window(window)
        out = []
        for g in _bv_rows(window):
            out.append(Functional(g, window))
            out.append(Functional({i: -c for i, c in g.items()}, window))
        return out
    if family == NormFamily.PREDUAL_OF_BALL:
        ball = norm.ball
        halfspaces: List[Tuple[Functional, Fraction]] = []
        for y, b in ball.constraints:
            halfspaces.append((y.rehome(window).as_functional(), b))
            halfspaces.append(((-y).rehome(window).as_functional(), b))
        for v in unit_ball_generators(ball.base, window):
            halfspaces.append((v.as_functional(), ball.radius))
        return [v.as_functional() for v in polytope_vertices(halfspaces, window)]
    raise NotPolyhedralError(f"{norm.label} has no finite dual vertex set")


def norm_metric_rho(mu: NormSpec, nu: NormSpec, base: NormSpec, window: Window) -> Fraction:
    """sup over the base unit ball of |nu(x) - mu(x)| on the window."""
    for spec in (mu, nu, base):
        if not spec.is_polyhedral:
            raise NotPolyhedralError(f"{spec.label} is not polyhedral")
        spec.check_window(window)
    if mu == nu:
        return Fraction(0)
    window = Window.of(window.indices, mu.required_indices, nu.required_indices, base.required_indices)
    return max(_one_sided_excess(mu, nu, base, window), _one_sided_excess(nu, mu, base, window))


def _one_sided_excess(mu: NormSpec, nu: NormSpec, base: NormSpec, window: Window) -> Fraction:
    # max over x in the base ball of nu(x) - mu(x), one LP per dual vertex of nu
    best = Fraction(0)
    for g in dual_ball_vertices(nu, window):
        lp = LinearProgram("rho")
        xvars = {i: lp.free(f"x{i}") for i in window}
        s = lp.nonneg("s")
        encode_norm_bound(lp, mu, xvars, {s: 1})
        encode_norm_bound(lp, base, xvars, {lp.constant(1): 1})
        objective = {xvars[i]: v for i, v in g.entries}
        objective[s] = Fraction(-1)
        lp.maximize(objective)
        result = lp.solve()
        if not result.optimal:
            raise UnboundedProgramError(f"rho program is {result.status.value}")
        best = max(best, result.objective)
    return best
