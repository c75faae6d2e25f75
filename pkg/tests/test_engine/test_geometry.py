# tests/test_engine/test_geometry.py
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convlab.engine.convex_sets import (Direction, Epigraph, Halfspace, Hyperplane, Intersection,
                                        NormBall, PolyFunc, Polytope, SubspaceSlice, contains,
                                        feasible_point, is_empty)
from convlab.engine.errors import SeparationError
from convlab.engine.geometry_engine import (GeometryEngine, coercivity_margin, distance, epigraph_build,
                                            gap, nearest_point, separate, support_value)
from convlab.engine.space import Functional, NormSpec, Surd, Vector, Window, dual_norm_eval, norm_eval

PLANE = Window((0, 1))


def _point(a, b):
    return Vector({0: a, 1: b}, PLANE)


class TestMembership:
    """Test exact membership and emptiness"""

    def test_polytope_contains(self, triangle):
        """Should contain the midpoint of an edge but not the far corner"""
        assert contains(triangle, _point(Fraction(1, 2), Fraction(1, 2))) is True
        assert contains(triangle, _point(1, 1)) is False

    def test_halfspace_directions(self):
        """Should honour >= halfspaces"""
        ge = Halfspace(Functional({0: 1}, PLANE), Fraction(1), Direction.GE)
        assert contains(ge, _point(2, 0)) is True
        assert contains(ge, _point(0, 0)) is False

    def test_empty_intersection(self):
        """Should detect {x0 <= 0} and {x0 >= 1} as disjoint"""
        e0 = Functional({0: 1}, PLANE)
        both = Intersection((Halfspace(e0, Fraction(0)), Halfspace(e0, Fraction(1), Direction.GE)))
        assert is_empty(both) is True
        assert feasible_point(both) is None

    def test_feasible_point_belongs(self, triangle):
        """Should return a point of the slice it was asked about"""
        diagonal = SubspaceSlice(((Functional({0: 1, 1: -1}, PLANE), Fraction(0)),), triangle)
        point = feasible_point(diagonal)
        assert point is not None
        assert contains(diagonal, point)

    def test_polytope_common_window(self):
        """Should rehome all vertices into one window"""
        P = Polytope((Vector({0: 1}), Vector({3: 1})))
        assert all(v.window == Window((0, 3)) for v in P.vertices)

    def test_polyfunc_needs_piece(self):
        """Should reject a function without affine pieces"""
        with pytest.raises(ValueError):
            PolyFunc(())


class TestDistances:
    """Test exact distances"""

    def test_ball(self, sup_norm):
        """Should subtract the radius from the distance to the center"""
        ball = NormBall(Vector({}, PLANE), Fraction(1), sup_norm)
        assert distance(_point(3, 0), ball, sup_norm) == 2

    def test_segment_all_norms(self, sup_norm, ell1_norm, ell2_norm):
        """Should give 2 from (0, 2) to [0, e0] in every family"""
        segment = Polytope((_point(0, 0), _point(1, 0)))
        for norm in (sup_norm, ell1_norm, ell2_norm):
            assert distance(_point(0, 2), segment, norm) == 2

    def test_hyperplane_by_dual_norm(self, sup_norm, ell1_norm, ell2_norm):
        """Should give |f(x) - a| / ||f||* for {x0 + x1 = 2}"""
        plane = Hyperplane(Functional({0: 1, 1: 1}, PLANE), Fraction(2))
        origin = Vector({}, PLANE)
        assert distance(origin, plane, sup_norm) == 1
        assert distance(origin, plane, ell1_norm) == 2
        value = distance(origin, plane, ell2_norm)
        assert isinstance(value, Surd) and value.square == 2

    def test_nearest_point_in_set(self, sup_norm):
        """Should return an attained minimiser inside the set"""
        half = Halfspace(Functional({0: 1}, PLANE), Fraction(1))
        projection = nearest_point(_point(2, 0), half, sup_norm)
        assert projection.value == 1
        assert contains(half, projection.point)
        assert norm_eval(sup_norm, _point(2, 0) - projection.point) == 1

    def test_epigraph_of_indicator(self, triangle):
        """Should measure the vertical drop to the epigraph floor"""
        norm = NormSpec.product2(NormSpec.ell2(), 2)
        epigraph = Epigraph(PolyFunc.indicator(triangle), norm)
        below = Vector({2: -3}, Window((0, 1, 2)))
        assert float(distance(below, epigraph, norm)) == pytest.approx(3)

    def test_euclidean_intersection_float(self, ell2_norm):
        """Should project onto {x0 <= 0} and {x0 + x1 <= 0} numerically"""
        e0 = Functional({0: 1}, PLANE)
        both = Intersection((Halfspace(e0, Fraction(0)),
                             Halfspace(Functional({0: 1, 1: 1}, PLANE), Fraction(0))))
        projection = nearest_point(_point(2, -1), both, ell2_norm)
        assert projection.exact is False
        assert float(projection.value) == pytest.approx(2, abs=1e-6)
        assert float(projection.point.get(0)) == pytest.approx(0, abs=1e-6)
        assert float(projection.point.get(1)) == pytest.approx(-1, abs=1e-6)

    def test_product_gap_scalar_search(self, sup_norm):
        """Should trade the sup part against the scalar part along a segment"""
        space = Window((0, 1, 2))
        norm = NormSpec.product2(sup_norm, 2)
        origin = Vector({}, space)
        segment = Polytope((Vector({0: 3}, space), Vector({2: 3}, space)))
        value = distance(origin, segment, norm)
        assert isinstance(value, float)
        assert value == pytest.approx(3 / math.sqrt(2), abs=1e-6)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(-4, 4), min_size=4, max_size=4))
    def test_distance_lipschitz(self, coords):
        """Should satisfy |d(x, C) - d(y, C)| <= ||x - y||"""
        norm = NormSpec.sup_c0()
        C = Polytope((_point(0, 0), _point(2, 1), _point(1, 3)))
        x, y = _point(coords[0], coords[1]), _point(coords[2], coords[3])
        engine = GeometryEngine(norm)
        assert abs(engine.distance(x, C) - engine.distance(y, C)) <= norm_eval(norm, x - y)


class TestGapsAndSeparation:
    """Test gaps, support values and separating functionals"""

    def test_gap(self, sup_norm):
        """Should give 3 between the origin and the segment [3e0, 3e0 + 3e1]"""
        A = Polytope.point(_point(0, 0))
        B = Polytope((_point(3, 0), _point(3, 3)))
        assert gap(A, B, sup_norm) == 3

    def test_separation_margin_equals_gap(self, sup_norm):
        """Should return a unit functional whose margin is the gap"""
        A = Polytope.point(_point(0, 0))
        B = Polytope((_point(3, 0), _point(3, 3)))
        separation = separate(A, B, sup_norm)
        assert separation.margin == 3
        assert dual_norm_eval(sup_norm, separation.functional) == 1

    def test_overlapping_not_separated(self, sup_norm, triangle):
        """Should refuse to separate overlapping sets"""
        with pytest.raises(SeparationError):
            separate(triangle, Polytope.point(_point(0, 0)), sup_norm)

    def test_support_values(self, sup_norm):
        """Should handle balls, halfspaces and unbounded directions"""
        e0, e1 = Functional({0: 1}, PLANE), Functional({1: 1}, PLANE)
        ball = NormBall(Vector({}, PLANE), Fraction(1), sup_norm)
        half = Halfspace(e0, Fraction(2))
        assert support_value(e0, ball) == 1
        assert support_value(e0, half) == 2
        assert support_value(e1, half) == math.inf

    def test_coercivity_of_sup_norm(self, sup_norm):
        """Should give margin 1 at every radius for f = sup norm"""
        pieces = tuple((Functional({i: s}, PLANE), Fraction(0)) for i in PLANE for s in (1, -1))
        assert coercivity_margin(PolyFunc(pieces), [1, 2, 4], sup_norm) == [1, 1, 1]

    def test_epigraph_slot(self, triangle, ell2_norm):
        """Should put the scalar one past the top index"""
        epigraph = epigraph_build(PolyFunc.indicator(triangle), ell2_norm)
        assert epigraph.slot == 2
