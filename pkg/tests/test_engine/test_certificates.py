# tests/test_engine/test_certificates.py
from fractions import Fraction

import pytest

from convlab.engine.certificate_engine import (CertificateMode, SeparationInstance,
                                               SliceCertificate, construct_separating_sequence,
                                               exhaust_hyperplane, nearest_point_recovery,
                                               separation_inequality, verify_certificate,
                                               verify_wijsman_certificate)
from convlab.engine.convergence_engine import Notion, VerdictStatus
from convlab.engine.convex_sets import Halfspace, Hyperplane, Polytope, contains
from convlab.engine.errors import CertificateError, PreconditionError
from convlab.engine.space import Functional, Vector, Window

PLANE = Window((0, 1))
E0_STAR = Functional({0: 1}, PLANE)
E1_STAR = Functional({1: 1}, PLANE)
ATTAIN = Vector({0: 2, 1: 1}, PLANE)


def _constant(f):
    return lambda n: f


class TestSliceCertificates:
    """Test certificate verification on B(e0 + e1, 1 + 1/n) -> B(e0 + e1, 1)"""

    def test_norm_certificate_supported(self, shrinking_balls):
        """Should support a constant e0* certificate attained at (2, 1)"""
        cert = SliceCertificate(E0_STAR, ATTAIN, _constant(E0_STAR))
        verdict = verify_certificate(cert, shrinking_balls, 0)
        assert verdict.notion == Notion.SLICE
        assert verdict.supported
        assert verdict.details["certificate"] == "norm"

    def test_wrong_direction_refuted(self, shrinking_balls):
        """Should refute cert(n) = e1* which stays 2 away from x0* = e0*"""
        cert = SliceCertificate(E0_STAR, ATTAIN, _constant(E1_STAR))
        verdict = verify_certificate(cert, shrinking_balls, 0)
        assert verdict.status == VerdictStatus.REFUTED
        assert verdict.witness.object_id == "dual_norm(cert(n) - x0*)"

    def test_samples_projected(self, shrinking_balls):
        """Should add a recovery trace per sample point"""
        cert = SliceCertificate(E0_STAR, ATTAIN, _constant(E0_STAR))
        verdict = verify_certificate(cert, shrinking_balls, 0, samples=[Vector({0: 5}, PLANE)])
        assert "(i) sample0" in {row.object_id for row in verdict.trace}

    def test_attain_point_checked(self, shrinking_balls):
        """Should reject an attain point where x0* is not maximal"""
        cert = SliceCertificate(E0_STAR, Vector({0: 1, 1: 1}, PLANE), _constant(E0_STAR))
        with pytest.raises(CertificateError):
            verify_certificate(cert, shrinking_balls, 0)

    def test_mackey_needs_family(self):
        """Should reject a Mackey certificate without a family"""
        with pytest.raises(CertificateError):
            SliceCertificate(E0_STAR, ATTAIN, _constant(E0_STAR), CertificateMode.MACKEY)

    def test_w_star_needs_points(self):
        """Should reject a weak* certificate without probe points"""
        with pytest.raises(CertificateError):
            SliceCertificate(E0_STAR, ATTAIN, _constant(E0_STAR), "wStar")


class TestWijsmanCertificates:
    """Test recovery-sequence certificates"""

    def test_recovery_supported(self, shrinking_balls):
        """Should support a weak* certificate with the nearest-point recovery"""
        cert = SliceCertificate(E0_STAR, ATTAIN, _constant(E0_STAR), CertificateMode.W_STAR,
                                points=(Vector({0: 1}, PLANE), Vector({1: 1}, PLANE)))
        recovery = nearest_point_recovery(shrinking_balls, ATTAIN)
        verdict = verify_wijsman_certificate(cert, shrinking_balls, recovery, 0)
        assert verdict.notion == Notion.WIJSMAN
        assert verdict.supported

    def test_norm_mode_rejected(self, shrinking_balls):
        """Should only take weak* certificates"""
        cert = SliceCertificate(E0_STAR, ATTAIN, _constant(E0_STAR))
        recovery = nearest_point_recovery(shrinking_balls, ATTAIN)
        with pytest.raises(CertificateError):
            verify_wijsman_certificate(cert, shrinking_balls, recovery, 0)


class TestSeparatingSequence:
    """Test separation of a compact set from a far set"""

    def test_separator_clears_radius(self, sup_norm):
        """Should separate with sup_C L + 3/4 <= min_K L"""
        inst = SeparationInstance(4, 1, Polytope((Vector({0: 1}, PLANE), Vector({0: 1, 1: 1}, PLANE))),
                                  Polytope.point(Vector({}, PLANE)))
        functional = construct_separating_sequence(inst, sup_norm)
        assert separation_inequality(inst, functional) == (Fraction(3, 4), Fraction(1))

    def test_gap_at_radius_rejected(self, sup_norm):
        """Should need a gap strictly above 1 - 1/n"""
        inst = SeparationInstance(4, 1, Polytope.point(Vector({0: Fraction(3, 4)}, PLANE)),
                                  Polytope.point(Vector({}, PLANE)))
        with pytest.raises(PreconditionError):
            construct_separating_sequence(inst, sup_norm)

    def test_gap_above_band_rejected(self, sup_norm):
        """Should need a gap strictly below 1 + 1/n"""
        inst = SeparationInstance(4, 1, Polytope.point(Vector({0: 5}, PLANE)),
                                  Halfspace(E0_STAR, Fraction(0)))
        with pytest.raises(PreconditionError, match="gap pattern violated"):
            construct_separating_sequence(inst, sup_norm)

    def test_gap_at_upper_end_rejected(self, sup_norm):
        """Should reject a gap of exactly 1 + 1/n"""
        inst = SeparationInstance(4, 1, Polytope.point(Vector({0: Fraction(5, 4)}, PLANE)),
                                  Halfspace(E0_STAR, Fraction(0)))
        with pytest.raises(PreconditionError):
            construct_separating_sequence(inst, sup_norm)


class TestExhaustion:
    """Test nested compact sections of a hyperplane"""

    @pytest.fixture
    def line(self):
        """{x0 = 1} in the plane"""
        return Hyperplane(E0_STAR, Fraction(1))

    def test_nested_sections(self, line, sup_norm):
        """Should produce nested sections lying on the hyperplane"""
        family = exhaust_hyperplane(line, Vector({}, PLANE), 3, sup_norm)
        members = list(family)
        assert len(members) == 3
        assert all(v.get(0) == 1 for K in members for v in K.vertices)
        assert all(contains(members[2], v) for v in members[1].vertices)

    def test_anchor_on_hyperplane(self, line, sup_norm):
        """Should refuse an anchor lying on the hyperplane"""
        with pytest.raises(PreconditionError):
            exhaust_hyperplane(line, Vector({0: 1, 1: 5}, PLANE), 3, sup_norm)

    def test_count_positive(self, line, sup_norm):
        """Should need at least one section"""
        with pytest.raises(ValueError):
            exhaust_hyperplane(line, Vector({}, PLANE), 0, sup_norm)

    def test_anchor_too_close(self, line, sup_norm):
        """Should need the anchor at distance at least 1 from the hyperplane"""
        with pytest.raises(PreconditionError, match="below 1"):
            exhaust_hyperplane(line, Vector({0: Fraction(1, 2)}, PLANE), 3, sup_norm)

    def test_anchor_at_distance_one(self, line, sup_norm):
        """Should accept an anchor exactly 1 away"""
        family = exhaust_hyperplane(line, Vector({0: 2}, PLANE), 2, sup_norm)
        assert len(list(family)) == 2
