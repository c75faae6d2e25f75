# tests/test_engine/test_kadec.py
from fractions import Fraction

import pytest

from convlab.engine.convex_sets import CompactFamily, Polytope, contains
from convlab.engine.errors import PreconditionError
from convlab.engine.kadec_engine import (ProbeProperty, ProbeStatus, PropertyStarWitness,
                                         build_slab_renorm, lur_expression, mackey_sup,
                                         level_set_mosco_witness, probe_lur, probe_w_star_kadec,
                                         probe_w_star_tau_kadec, property_star_check,
                                         shifted_functionals)
from convlab.engine.sequences import FunctionalSequence, VectorSequence
from convlab.engine.space import Functional, Vector, compare, dual_norm_eval

E0 = Vector({0: 1})
E1 = Vector({1: 1})


def _moving_mass(norm, anchor=1):
    """f_n = e_anchor* + e_n* -> e_anchor*"""
    return FunctionalSequence(lambda n: Functional({anchor: 1, n: 1}), Functional({anchor: 1}),
                              norm, start_index=2)


def _unit_vectors(norm, start_index=2):
    """x_n* = e_n*, x_n = e_n, both tending weakly to 0"""
    fseq = FunctionalSequence(lambda n: Functional({n: 1}), Functional({}), norm,
                              start_index=start_index)
    xseq = VectorSequence(lambda n: Vector({n: 1}), start_index=start_index)
    return fseq, xseq


class TestWStarKadec:
    """Test the w*-Kadec probe"""

    def test_ell1_fails(self, ell1_norm):
        """Should fail in ell1: ||f_n - f||* stays at 1"""
        report = probe_w_star_kadec(_moving_mass(ell1_norm), [E0, E1], 0)
        assert report.property == ProbeProperty.W_STAR_KADEC
        assert report.status == ProbeStatus.FAIL
        assert report.witness.quantity == "dual_norm(f_n - f)"
        assert report.witness.value == 1

    def test_ell2_vacuous(self, ell2_norm):
        """Should be vacuous when the dual norms do not converge"""
        report = probe_w_star_kadec(_moving_mass(ell2_norm), [E0, E1], 0)
        assert report.status == ProbeStatus.VACUOUS
        assert report.witness is None
        assert "dual_norm(f_n)" in report.details["failed_hypotheses"]

    def test_norm_convergent_passes(self, ell2_norm):
        """Should pass for (1 + 1/n) e0* -> e0*"""
        fseq = FunctionalSequence(lambda n: Functional({0: 1 + Fraction(1, n)}), Functional({0: 1}),
                                  ell2_norm)
        report = probe_w_star_kadec(fseq, [E0], 0)
        assert report.status == ProbeStatus.PASS
        assert report.probe_basis == ["1*e0"]

    def test_trace_rows_sorted(self, ell1_norm):
        """Should list trace rows by index then name"""
        rows = probe_w_star_kadec(_moving_mass(ell1_norm), [E0], 0).trace_rows()
        assert rows == sorted(rows, key=lambda r: (r[0], r[1]))


class TestWStarTauKadec:
    """Test the Mackey probe"""

    def test_moving_mass_passes(self, ell1_norm):
        """Should pass in ell1: e_n* vanishes uniformly on a fixed polytope"""
        fam = CompactFamily([Polytope((E0, E1))])
        report = probe_w_star_tau_kadec(_moving_mass(ell1_norm), [E0, E1], fam, 0)
        assert report.status == ProbeStatus.PASS
        assert report.details["family_size"] == 1

    def test_unprobed_direction_fails(self, ell1_norm):
        """Should fail on a polytope reaching the direction the points miss"""
        fseq = FunctionalSequence(lambda n: Functional({0: 1, 1: 1}), Functional({1: 1}), ell1_norm)
        report = probe_w_star_tau_kadec(fseq, [E1], CompactFamily([Polytope.point(E0)]), 0)
        assert report.status == ProbeStatus.FAIL
        assert report.witness.quantity == "sup_K0 |f_n - f|"

    def test_mackey_sup(self):
        """Should take the largest absolute pairing over the vertices"""
        K = Polytope((E0, Vector({1: -3})))
        assert mackey_sup(Functional({0: 1, 1: 1}), K) == 3


class TestLur:
    """Test the LUR probe"""

    def test_ell2_passes(self, ell2_norm):
        """Should pass for e0 + e1/n -> e0 in ell2"""
        xseq = VectorSequence(lambda n: Vector({0: 1, 1: Fraction(1, n)}))
        assert probe_lur(ell2_norm, xseq, E0, 0).status == ProbeStatus.PASS

    def test_sup_fails(self, sup_norm):
        """Should fail in the sup norm: e0 + e1 keeps the expression at 0"""
        xseq = VectorSequence(lambda n: Vector({0: 1, 1: 1}))
        report = probe_lur(sup_norm, xseq, E0, 0)
        assert lur_expression(sup_norm, Vector({0: 1, 1: 1}), E0) == 0
        assert report.status == ProbeStatus.FAIL
        assert report.details["norm"] == "supC0"


class TestPropertyStar:
    """Test the pairing property and the renorming built from its failure"""

    def test_unit_vectors_fail(self, ell2_norm):
        """Should fail for <e_n*, e_n> = 1 with both sides tending to 0"""
        fseq, xseq = _unit_vectors(ell2_norm)
        report = property_star_check(fseq, xseq, Vector({}), 0)
        assert report.property == ProbeProperty.PROPERTY_STAR
        assert report.status == ProbeStatus.FAIL
        assert report.witness.value == 1

    def test_slab_renorm(self, ell2_norm):
        """Should keep |||e0* + e_j*||| at 1 under the renorming"""
        fseq, xseq = _unit_vectors(ell2_norm)
        witness = PropertyStarWitness(fseq, xseq, Vector({}), (2, 3, 5))
        renorm = build_slab_renorm(witness, E0, Functional({0: 1}))
        assert renorm.is_polyhedral is False
        assert compare(dual_norm_eval(renorm, Functional({0: 1, 5: 1})), 1) == 0

    def test_unit_limit_keeps_base(self, ell2_norm):
        """Should return the base norm when ||x*|| = 1"""
        fseq = FunctionalSequence(lambda n: Functional({0: 1}), Functional({0: 1}), ell2_norm)
        xseq = VectorSequence(lambda n: Vector({n: 1}))
        witness = PropertyStarWitness(fseq, xseq, Vector({}), (2,))
        assert build_slab_renorm(witness, E0, Functional({0: 1})) == ell2_norm

    def test_nonzero_limit_rejected(self, ell2_norm):
        """Should refuse a limit functional that is neither 0 nor of norm 1"""
        fseq = FunctionalSequence(lambda n: Functional({0: 2}), Functional({0: 2}), ell2_norm)
        xseq = VectorSequence(lambda n: Vector({n: 1}))
        with pytest.raises(PreconditionError):
            build_slab_renorm(PropertyStarWitness(fseq, xseq, Vector({}), (2,)), E0, Functional({0: 1}))

    def test_long_y_rejected(self, ell2_norm):
        """Should refuse a direction y with ||y|| != 1"""
        fseq, xseq = _unit_vectors(ell2_norm)
        witness = PropertyStarWitness(fseq, xseq, Vector({}), (2,))
        with pytest.raises(PreconditionError):
            build_slab_renorm(witness, Vector({0: 2}), Functional({0: Fraction(1, 2)}))

    def test_shifted_functionals(self, ell2_norm):
        """Should add the shift to every term and to the limit"""
        fseq, _ = _unit_vectors(ell2_norm)
        shifted = shifted_functionals(fseq, Functional({0: 1}))
        assert shifted.at(4).get(0) == 1 and shifted.at(4).get(4) == 1
        assert shifted.limit.get(0) == 1
        assert shifted.start_index == fseq.start_index


class TestLevelSetMosco:
    """Test the level-set sequence and its selection"""

    def test_selection_lies_on_level_sets(self, ell2_norm):
        """Should rescale x0 + x_n onto {x_n* = 1}"""
        fseq = _moving_mass(ell2_norm, anchor=0)
        xseq = VectorSequence(lambda n: Vector({n: 1}), start_index=2)
        sets, selection = level_set_mosco_witness(fseq, xseq, Vector({0: 2}))
        for n in (4, 9, sets.horizon):
            assert contains(sets.at(n), selection.at(n))

    def test_small_pairing_rejected(self, ell2_norm):
        """Should need <x_n*, x0> >= 2"""
        fseq = _moving_mass(ell2_norm, anchor=0)
        xseq = VectorSequence(lambda n: Vector({n: 1}), start_index=2)
        with pytest.raises(PreconditionError):
            level_set_mosco_witness(fseq, xseq, E0)

    def test_long_anchor_rejected(self, ell2_norm):
        """Should need ||x0|| <= 3"""
        fseq = _moving_mass(ell2_norm, anchor=0)
        xseq = VectorSequence(lambda n: Vector({n: 1}), start_index=2)
        with pytest.raises(PreconditionError):
            level_set_mosco_witness(fseq, xseq, Vector({0: 4}))
