# tests/test_engine/test_space.py
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convlab.engine.errors import WindowMismatchError
from convlab.engine.space import (DualBallDescription, Functional, NormSpec, Surd, Vector, Window,
                                  compare, dual_ball_vertices, dual_norm_eval, format_scalar,
                                  norm_eval, norm_metric_rho, polytope_vertices, root)

WINDOW = Window((0, 1, 2, 3))
POLYHEDRAL = [NormSpec.sup_c0(), NormSpec.ell1(), NormSpec.bv_c0()]

small_ints = st.integers(min_value=-5, max_value=5)
coordinates = st.lists(small_ints, min_size=4, max_size=4)


def _vector(values):
    return Vector(dict(enumerate(values)), WINDOW)


def _functional(values):
    return Functional(dict(enumerate(values)), WINDOW)


class TestWindows:
    """Test window construction rules"""

    def test_window_sorted(self):
        """Should keep sorted distinct indices"""
        assert Window((0, 2, 5)).indices == (0, 2, 5)

    def test_window_unsorted_rejected(self):
        """Should reject unsorted indices"""
        with pytest.raises(ValueError):
            Window((1, 0))

    def test_window_empty_rejected(self):
        """Should reject an empty window"""
        with pytest.raises(ValueError):
            Window(())

    def test_window_of_merges(self):
        """Should merge several index groups"""
        assert Window.of({3}, (0, 1), [1]).indices == (0, 1, 3)

    def test_entries_outside_window(self):
        """Should refuse entries outside the declared window"""
        with pytest.raises(WindowMismatchError):
            Vector({5: 1}, Window((0, 1)))

    def test_zero_entries_dropped(self):
        """Should store only nonzero entries"""
        v = Vector({0: 0, 1: 2})
        assert v.support == (1,)
        assert v.get(0) == 0


class TestNormEvaluation:
    """Test exact norms of the built-in families"""

    def test_sup_ell1_ell2(self, sup_norm, ell1_norm, ell2_norm):
        """Should evaluate 3e0 - 4e1 in every family"""
        x = Vector({0: 3, 1: -4})
        assert norm_eval(sup_norm, x) == 4
        assert norm_eval(ell1_norm, x) == 7
        assert norm_eval(ell2_norm, x) == 5
        assert isinstance(norm_eval(ell2_norm, x), Fraction)

    def test_ell2_irrational(self, ell2_norm):
        """Should return a surd for an irrational Euclidean norm"""
        value = norm_eval(ell2_norm, Vector({0: 1, 1: 1}))
        assert isinstance(value, Surd)
        assert value.square == 2
        assert format_scalar(value) == "sqrt(2)"

    def test_bv_norm_of_difference(self, bv_norm):
        """Should give 1/2 for e1/2 minus (e0 + e1 + e5)/2"""
        window = Window((0, 1, 5))
        z0 = Vector({1: Fraction(1, 2)}, window)
        zn = Vector({0: Fraction(1, 2), 1: Fraction(1, 2), 5: Fraction(1, 2)}, window)
        assert norm_eval(bv_norm, z0 - zn) == Fraction(1, 2)

    def test_bv_norm_reads_tail_plus_x1(self, bv_norm):
        """Should take |x_m + x_1| for m >= 2"""
        x = Vector({1: 2, 3: 1}, Window((0, 1, 3)))
        assert norm_eval(bv_norm, x) == 3

    def test_bv_needs_leading_coordinates(self, bv_norm):
        """Should refuse a window without coordinates 0 and 1"""
        with pytest.raises(WindowMismatchError):
            norm_eval(bv_norm, Vector({2: 1}))

    def test_zero_vector(self, sup_norm, ell2_norm):
        """Should give 0 for the zero vector"""
        assert norm_eval(sup_norm, Vector({})) == 0
        assert norm_eval(ell2_norm, Vector({})) == 0


class TestDualNorms:
    """Test dual norms and their pairing bound"""

    def test_dual_of_sup_is_ell1(self, sup_norm):
        """Should sum absolute values"""
        assert dual_norm_eval(sup_norm, Functional({0: 1, 1: -2})) == 3

    def test_dual_of_ell1_is_sup(self, ell1_norm):
        """Should take the largest absolute value"""
        assert dual_norm_eval(ell1_norm, Functional({0: 1, 1: -2})) == 2

    def test_bv_dual_of_shifted_functional(self, bv_norm):
        """Should give 1 for e1* + e_n* and for e1*"""
        window = Window((0, 1, 7))
        assert dual_norm_eval(bv_norm, Functional({1: 1, 7: 1}, window)) == 1
        assert dual_norm_eval(bv_norm, Functional({1: 1}, window)) == 1

    def test_zero_functional(self, bv_norm):
        """Should give 0 without solving anything"""
        assert dual_norm_eval(bv_norm, Functional({})) == 0

    @settings(max_examples=40, deadline=None)
    @given(coordinates, coordinates)
    def test_pairing_bound(self, xs, fs):
        """Should satisfy |<f, x>| <= ||f||* ||x|| in every polyhedral family"""
        x, f = _vector(xs), _functional(fs)
        for norm in POLYHEDRAL:
            assert abs(f.pair(x)) <= dual_norm_eval(norm, f) * norm_eval(norm, x)


class TestNormAxioms:
    """Property checks of the norm axioms"""

    @settings(max_examples=40, deadline=None)
    @given(coordinates, coordinates)
    def test_triangle_inequality(self, xs, ys):
        """Should satisfy ||x + y|| <= ||x|| + ||y||"""
        x, y = _vector(xs), _vector(ys)
        for norm in POLYHEDRAL:
            assert norm_eval(norm, x + y) <= norm_eval(norm, x) + norm_eval(norm, y)

    @settings(max_examples=40, deadline=None)
    @given(coordinates, st.fractions(min_value=-3, max_value=3, max_denominator=7))
    def test_homogeneity(self, xs, t):
        """Should satisfy ||t x|| = |t| ||x||"""
        x = _vector(xs)
        for norm in POLYHEDRAL:
            assert norm_eval(norm, x.scale(t)) == abs(t) * norm_eval(norm, x)


class TestRenormedSpaces:
    """Test norms given by their dual unit ball"""

    @pytest.fixture
    def slab_norm(self, ell2_norm):
        """Dual ball {|<L, -e1>| <= 1} cut with twice the ell2 dual ball"""
        ball = DualBallDescription(((Vector({1: -1}), Fraction(1)),), Fraction(2), ell2_norm)
        return NormSpec.predual_of_ball(ball)

    def test_slab_active(self, slab_norm):
        """Should give 3 for -3e1, where the slab binds"""
        assert norm_eval(slab_norm, Vector({1: -3})) == 3

    def test_slab_inactive(self, slab_norm):
        """Should give twice the ell2 norm away from the slab direction"""
        assert norm_eval(slab_norm, Vector({0: 1})) == 2

    def test_dual_gauge(self, slab_norm):
        """Should give 1 for -e1* + e5*: the slab dominates sqrt(2)/2"""
        assert compare(dual_norm_eval(slab_norm, Functional({1: -1, 5: 1})), 1) == 0

    def test_not_polyhedral(self, slab_norm):
        """Should report a Euclidean base as non-polyhedral"""
        assert slab_norm.is_polyhedral is False

    def test_polyhedral_predual(self, sup_norm):
        """Should evaluate a polyhedral predual norm by LP"""
        ball = DualBallDescription((), Fraction(2), sup_norm)
        norm = NormSpec.predual_of_ball(ball)
        assert norm_eval(norm, Vector({0: 1, 1: 1})) == 2


class TestVertexEnumeration:
    """Test exact vertex enumeration"""

    def test_unit_square(self):
        """Should find the four corners of the unit square"""
        window = Window((0, 1))
        halfspaces = []
        for i in window:
            halfspaces.append((Functional({i: 1}, window), 1))
            halfspaces.append((Functional({i: -1}, window), 0))
        vertices = polytope_vertices(halfspaces, window)
        assert {(v.get(0), v.get(1)) for v in vertices} == {(0, 0), (1, 0), (0, 1), (1, 1)}

    def test_ell1_dual_vertices(self, ell1_norm):
        """Should list the sign vectors of the sup dual ball"""
        vertices = dual_ball_vertices(ell1_norm, Window((0, 1)))
        assert len(vertices) == 4
        assert all(dual_norm_eval(ell1_norm, f) == 1 for f in vertices)

    def test_rho_of_equal_norms(self, sup_norm):
        """Should give 0 for identical norms"""
        assert norm_metric_rho(sup_norm, sup_norm, sup_norm, Window((0, 1))) == 0

    def test_rho_sup_against_ell1(self, sup_norm, ell1_norm):
        """Should find the excess 1 at the corner e0 + e1 of the sup ball"""
        assert norm_metric_rho(sup_norm, ell1_norm, sup_norm, Window((0, 1))) == 1


class TestScalars:
    """Test exact scalar helpers"""

    def test_perfect_square_root(self):
        """Should return a Fraction for perfect squares"""
        assert root(Fraction(9, 4)) == Fraction(3, 2)
        assert isinstance(root(Fraction(9, 4)), Fraction)

    def test_surd_comparison(self):
        """Should order surds against rationals exactly"""
        assert compare(root(2), Fraction(3, 2)) < 0
        assert compare(root(2), Fraction(7, 5)) > 0

    def test_format(self):
        """Should format rationals, integers and infinities"""
        assert format_scalar(Fraction(1, 3)) == "1/3"
        assert format_scalar(Fraction(2)) == "2"
        assert format_scalar(math.inf) == "inf"
