"""
Convex Sets

The set variants of the laboratory, their linear-programming membership
encodings and exact membership tests.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple, Union

from convlab.engine.errors import NotPolyhedralError
from convlab.engine.linear_program import LinearProgram, Sense
from convlab.engine.space import (Functional, NormFamily, NormSpec, Vector, Window,
                                  compare, encode_norm_bound, norm_eval)

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]


class Direction(str, Enum):
    LE = "le"
    GE = "ge"


class ConvexSet:
    """Base of every set variant. Variants are frozen dataclasses (hashable)."""

    kind: str = "set"

    @property
    def support(self) -> FrozenSet[int]:
        """Coordinates any of the set's data touches."""
        raise NotImplementedError

    @property
    def window(self) -> Window:
        raise NotImplementedError

    @property
    def bounded(self) -> bool:
        return False


@dataclass(frozen=True)
class Hyperplane(ConvexSet):
    functional: Functional
    level: Fraction
    kind = "hyperplane"

    def __post_init__(self):
        object.__setattr__(self, "level", Fraction(self.level))

    @property
    def support(self):
        return frozenset(self.functional.support)

    @property
    def window(self):
        return self.functional.window


@dataclass(frozen=True)
class Halfspace(ConvexSet):
    functional: Functional
    level: Fraction
    direction: Direction = Direction.LE
    kind = "halfspace"

    def __post_init__(self):
        object.__setattr__(self, "level", Fraction(self.level))
        object.__setattr__(self, "direction", Direction(self.direction))

    @property
    def support(self):
        return frozenset(self.functional.support)

    @property
    def window(self):
        return self.functional.window

    def as_le(self) -> Tuple[Functional, Fraction]:
        """(g, c) with the set equal to {<g, z> <= c}."""
        if self.direction == Direction.LE:
            return self.functional, self.level
        return -self.functional, -self.level


@dataclass(frozen=True)
class NormBall(ConvexSet):
    center: Vector
    radius: Fraction
    norm: NormSpec
    kind = "ball"

    def __post_init__(self):
        object.__setattr__(self, "radius", Fraction(self.radius))
        if self.radius < 0:
            raise ValueError("ball radius must be non-negative")

    @property
    def support(self):
        return frozenset(self.center.support) | self.norm.required_indices

    @property
    def window(self):
        return self.center.window

    @property
    def bounded(self):
        return True


@dataclass(frozen=True)
class Polytope(ConvexSet):
    vertices: Tuple[Vector, ...]
    kind = "polytope"

    def __post_init__(self):
        points = tuple(self.vertices)
        if not points:
            raise ValueError("a polytope needs at least one vertex")
        window = points[0].window
        for p in points[1:]:
            window = window.union(p.window)
        object.__setattr__(self, "vertices", tuple(p.rehome(window) for p in points))

    @classmethod
    def point(cls, x: Vector) -> "Polytope":
        return cls((x,))

    @property
    def support(self):
        out = set()
        for v in self.vertices:
            out.update(v.support)
        return frozenset(out)

    @property
    def window(self):
        return self.vertices[0].window

    @property
    def bounded(self):
        return True

    def scaled(self, factor: Number) -> "Polytope":
        return Polytope(tuple(v.scale(factor) for v in self.vertices))

    def translated(self, shift: Vector) -> "Polytope":
        return Polytope(tuple(v + shift for v in self.vertices))


@dataclass(frozen=True)
class MinkowskiSum(ConvexSet):
    base: ConvexSet
    ball: NormBall
    kind = "minkowski_sum"

    @property
    def support(self):
        return self.base.support | self.ball.support

    @property
    def window(self):
        return self.base.window.union(self.ball.window)

    @property
    def bounded(self):
        return self.base.bounded


@dataclass(frozen=True)
class Intersection(ConvexSet):
    members: Tuple[ConvexSet, ...]
    kind = "intersection"

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("an intersection needs at least one member")

    @property
    def support(self):
        out = frozenset()
        for m in self.members:
            out = out | m.support
        return out

    @property
    def window(self):
        window = self.members[0].window
        for m in self.members[1:]:
            window = window.union(m.window)
        return window

    @property
    def bounded(self):
        return any(m.bounded for m in self.members)


@dataclass(frozen=True)
class SubspaceSlice(ConvexSet):
    """base intersected with the homogeneous equalities <g, z> = 0."""
    constraints: Tuple[Tuple[Functional, Fraction], ...]
    base: ConvexSet
    kind = "subspace_slice"

    def __post_init__(self):
        cleaned = tuple((g, Fraction(c)) for g, c in self.constraints)
        for _, c in cleaned:
            if c != 0:
                raise ValueError("subspace slice constraints must be homogeneous")
        object.__setattr__(self, "constraints", cleaned)

    @property
    def support(self):
        out = set(self.base.support)
        for g, _ in self.constraints:
            out.update(g.support)
        return frozenset(out)

    @property
    def window(self):
        window = self.base.window
        for g, _ in self.constraints:
            window = window.union(g.window)
        return window

    @property
    def bounded(self):
        return self.base.bounded


@dataclass(frozen=True)
class PolyFunc:
    """max_i <g_i, x> + b_i on an optional polytope domain, +inf outside it."""
    pieces: Tuple[Tuple[Functional, Fraction], ...]
    domain: Optional[Polytope] = None

    def __post_init__(self):
        pieces = tuple((g, Fraction(b)) for g, b in self.pieces)
        if not pieces:
            raise ValueError("a polyhedral function needs at least one affine piece")
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def indicator(cls, domain: Polytope) -> "PolyFunc":
        return cls(((Functional.zero(domain.window), Fraction(0)),), domain)

    @property
    def support(self) -> FrozenSet[int]:
        out = set()
        for g, _ in self.pieces:
            out.update(g.support)
        if self.domain is not None:
            out.update(self.domain.support)
        return frozenset(out)

    @property
    def window(self) -> Window:
        window = self.pieces[0][0].window
        for g, _ in self.pieces[1:]:
            window = window.union(g.window)
        if self.domain is not None:
            window = window.union(self.domain.window)
        return window

    @property
    def constant_value(self) -> Optional[Fraction]:
        """The value on the domain when every slope is zero."""
        if all(g.is_zero() for g, _ in self.pieces):
            return max(b for _, b in self.pieces)
        return None

    def value(self, x: Vector) -> Union[Fraction, float]:
        if self.domain is not None and not contains(self.domain, x):
            return math.inf
        return max(g.dot(x) + b for g, b in self.pieces)


@dataclass(frozen=True)
class Epigraph(ConvexSet):
    """{(x, r) : f(x) <= r} with r stored at the product norm's slot."""
    func: PolyFunc
    product_norm: NormSpec
    kind = "epigraph"

    def __post_init__(self):
        if self.product_norm.family != NormFamily.PRODUCT2:
            raise ValueError("an epigraph lives in a product2 space")
        if self.product_norm.slot in self.func.window:
            raise ValueError("the scalar slot must lie outside the function's window")

    @property
    def slot(self) -> int:
        return self.product_norm.slot

    @property
    def support(self):
        return self.func.support | {self.slot}

    @property
    def window(self):
        return self.func.window.union(Window((self.slot,)))


class CompactFamily:
    """Non-empty bounded polytopes used as weakly compact test sets."""

    def __init__(self, members: Sequence[Polytope]):
        members = tuple(members)
        if not members:
            raise ValueError("a compact family needs at least one member")
        for m in members:
            if not isinstance(m, Polytope):
                raise ValueError("compact family members are polytopes")
        self.members: Tuple[Polytope, ...] = members

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


def empty_set(window: Window) -> Intersection:
    """A canonical empty set: {z_i <= 0} and {z_i >= 1}."""
    i = window.indices[0]
    e = Functional.basis(i, window)
    return Intersection((Halfspace(e, 0, Direction.LE), Halfspace(e, 1, Direction.GE)))


# =============================================================================
# LP encodings
# =============================================================================

def encode_membership(lp: LinearProgram, C: ConvexSet, zvars: Mapping[int, int]) -> None:
    """Add rows forcing the point with coordinates zvars to lie in C."""
    if isinstance(C, Hyperplane):
        lp.add({zvars[i]: v for i, v in C.functional.entries}, Sense.EQ, C.level)
    elif isinstance(C, Halfspace):
        g, c = C.as_le()
        lp.add({zvars[i]: v for i, v in g.entries}, Sense.LE, c)
    elif isinstance(C, NormBall):
        dvars = {i: lp.free(f"ball{i}") for i in zvars}
        for i, var in zvars.items():
            lp.add({dvars[i]: 1, var: -1}, Sense.EQ, -C.center.get(i))
        encode_norm_bound(lp, C.norm, dvars, {lp.constant(1): C.radius})
    elif isinstance(C, Polytope):
        weights = [lp.nonneg(f"lam{k}") for k in range(len(C.vertices))]
        lp.add({w: 1 for w in weights}, Sense.EQ, 1)
        for i, var in zvars.items():
            row = {var: Fraction(1)}
            for w, v in zip(weights, C.vertices):
                coef = v.get(i)
                if coef != 0:
                    row[w] = -coef
            lp.add(row, Sense.EQ, 0)
    elif isinstance(C, MinkowskiSum):
        pvars = {i: lp.free(f"p{i}") for i in zvars}
        qvars = {i: lp.free(f"q{i}") for i in zvars}
        for i, var in zvars.items():
            lp.add({var: 1, pvars[i]: -1, qvars[i]: -1}, Sense.EQ, 0)
        encode_membership(lp, C.base, pvars)
        encode_membership(lp, C.ball, qvars)
    elif isinstance(C, Intersection):
        for member in C.members:
            encode_membership(lp, member, zvars)
    elif isinstance(C, SubspaceSlice):
        for g, _ in C.constraints:
            lp.add({zvars[i]: v for i, v in g.entries}, Sense.EQ, 0)
        encode_membership(lp, C.base, zvars)
    elif isinstance(C, Epigraph):
        s = zvars[C.slot]
        xvars = {i: var for i, var in zvars.items() if i != C.slot}
        for g, b in C.func.pieces:
            row = {xvars[i]: v for i, v in g.entries}
            row[s] = Fraction(-1)
            lp.add(row, Sense.LE, -b)
        if C.func.domain is not None:
            encode_membership(lp, C.func.domain, xvars)
    else:
        raise TypeError(f"unknown set variant {type(C).__name__}")


def requires_euclidean(C: ConvexSet) -> bool:
    """True when C's description contains a Euclidean ball."""
    if isinstance(C, NormBall):
        return not C.norm.is_polyhedral
    if isinstance(C, MinkowskiSum):
        return requires_euclidean(C.base) or requires_euclidean(C.ball)
    if isinstance(C, Intersection):
        return any(requires_euclidean(m) for m in C.members)
    if isinstance(C, SubspaceSlice):
        return requires_euclidean(C.base)
    return False


def membership_window(C: ConvexSet, *groups: Iterable[int]) -> Window:
    indices = set(C.support)
    for group in groups:
        indices.update(group)
    if not indices:
        indices.add(C.window.indices[0])
    return Window.of(indices)


# =============================================================================
# Membership
# =============================================================================

def contains(C: ConvexSet, z: Vector) -> bool:
    """Exact membership of z in C."""
    if isinstance(C, Hyperplane):
        return C.functional.dot(z) == C.level
    if isinstance(C, Halfspace):
        g, c = C.as_le()
        return g.dot(z) <= c
    if isinstance(C, NormBall):
        return compare(norm_eval(C.norm, z - C.center), C.radius) <= 0
    if isinstance(C, Intersection):
        return all(contains(m, z) for m in C.members)
    if isinstance(C, SubspaceSlice):
        return all(g.dot(z) == 0 for g, _ in C.constraints) and contains(C.base, z)
    if isinstance(C, Epigraph):
        x = Vector({i: v for i, v in z.entries if i != C.slot}, z.window)
        value = C.func.value(x)
        return value != math.inf and value <= z.get(C.slot)
    if requires_euclidean(C):
        raise NotPolyhedralError("membership in a set with a Euclidean ball component")
    window = membership_window(C, z.support)
    lp = LinearProgram(f"contains[{C.kind}]")
    zvars = {i: lp.free(f"z{i}") for i in window}
    encode_membership(lp, C, zvars)
    for i, var in zvars.items():
        lp.add({var: 1}, Sense.EQ, z.get(i))
    lp.minimize({})
    return lp.solve().optimal


def is_empty(C: ConvexSet) -> bool:
    """Exact emptiness test by LP feasibility."""
    if isinstance(C, (Polytope, NormBall, Epigraph)):
        return False
    if isinstance(C, Hyperplane):
        return C.functional.is_zero() and C.level != 0
    if isinstance(C, Halfspace):
        g, c = C.as_le()
        return g.is_zero() and c < 0
    if isinstance(C, MinkowskiSum):
        return is_empty(C.base)
    if requires_euclidean(C):
        raise NotPolyhedralError("emptiness of a set with a Euclidean ball component")
    window = membership_window(C)
    lp = LinearProgram(f"empty[{C.kind}]")
    zvars = {i: lp.free(f"z{i}") for i in window}
    encode_membership(lp, C, zvars)
    lp.minimize({})
    return not lp.solve().optimal


def feasible_point(C: ConvexSet, window: Optional[Window] = None) -> Optional[Vector]:
    """Some point of C (None when empty)."""
    if isinstance(C, Polytope):
        return C.vertices[0]
    if requires_euclidean(C):
        raise NotPolyhedralError("feasible point of a set with a Euclidean ball component")
    program_window = membership_window(C, window.indices if window else ())
    lp = LinearProgram(f"feasible[{C.kind}]")
    zvars = {i: lp.free(f"z{i}") for i in program_window}
    encode_membership(lp, C, zvars)
    lp.minimize({})
    result = lp.solve()
    if not result.optimal:
        return None
    out_window = program_window if window is None else program_window.union(window)
    return Vector({i: result.value(v) for i, v in zvars.items()}, out_window)
