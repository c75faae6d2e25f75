"""
Tests for scenario and probe config models.
"""
import pytest
from pydantic import ValidationError

from convlab.engine.kadec_engine import ProbeProperty, ProbeStatus
from convlab.engine.sequences import FamilyKind
from convlab.engine.space import NormFamily
from convlab.models import NormSpecModel, ProbeConfig, ScenarioConfig


class TestScenarioConfig:
    """Tests for ScenarioConfig validation."""

    def test_valid_scenario(self, sample_scenario):
        """Test that the sample scenario parses with defaults filled in."""
        config = ScenarioConfig.model_validate(sample_scenario)
        assert config.norm.family == NormFamily.SUP_C0
        assert config.tolerance == "0"
        assert config.level == "1"
        assert config.families[0].kind == FamilyKind.POINTS

    def test_expressions_normalised(self, sample_scenario):
        """Test that generator expressions are kept as stripped source text."""
        sample_scenario["sequence"]["generator"]["radius"] = "  1 + 1/n "
        config = ScenarioConfig.model_validate(sample_scenario)
        assert config.sequence.generator.radius == "1 + 1/n"

    def test_rational_tolerance(self, sample_scenario):
        """Test that decimal tolerances are stored as exact rationals."""
        sample_scenario["tolerance"] = "0.25"
        assert ScenarioConfig.model_validate(sample_scenario).tolerance == "1/4"

    def test_bad_expression(self, sample_scenario):
        """Test that names other than n are rejected."""
        sample_scenario["sequence"]["generator"]["radius"] = "1 + 1/m"
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate(sample_scenario)

    def test_unknown_family_reference(self, sample_scenario):
        """Test that checks must reference a declared family."""
        sample_scenario["checks"][0]["family"] = "missing"
        with pytest.raises(ValidationError, match="unknown family"):
            ScenarioConfig.model_validate(sample_scenario)

    def test_duplicate_family_ids(self, sample_scenario):
        """Test that family ids are unique."""
        sample_scenario["families"].append(dict(sample_scenario["families"][0]))
        with pytest.raises(ValidationError, match="duplicate"):
            ScenarioConfig.model_validate(sample_scenario)

    def test_wijsman_needs_points(self, sample_scenario):
        """Test that a Wijsman check cannot run over a set family."""
        sample_scenario["families"] = [{
            "id": "pts", "kind": "compact",
            "sets": [{"kind": "polytope", "vertices": [[[0, 1]]]}],
        }]
        with pytest.raises(ValidationError, match="points family"):
            ScenarioConfig.model_validate(sample_scenario)

    def test_level_set_needs_functionals(self, sample_scenario):
        """Test that a level_set check requires a functional sequence."""
        sample_scenario["checks"] = [{"check": "level_set", "family": "pts"}]
        with pytest.raises(ValidationError, match="functionals"):
            ScenarioConfig.model_validate(sample_scenario)

    def test_horizon_minimum(self, sample_scenario):
        """Test that horizons below 4 are rejected."""
        sample_scenario["horizon"] = 3
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate(sample_scenario)

    def test_checks_required(self, sample_scenario):
        """Test that a scenario runs at least one check."""
        sample_scenario["checks"] = []
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate(sample_scenario)

    def test_set_kind_discriminator(self, sample_scenario):
        """Test that an unknown set kind is rejected."""
        sample_scenario["sequence"]["limit"] = {"kind": "sphere", "radius": "1"}
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate(sample_scenario)


class TestNormSpecModel:
    """Tests for norm descriptors."""

    def test_predual_needs_base(self):
        """Test that predualOfBall requires base and radius."""
        with pytest.raises(ValidationError):
            NormSpecModel.model_validate({"family": "predualOfBall", "radius": "2"})

    def test_predual_with_slab(self):
        """Test a complete predualOfBall descriptor."""
        norm = NormSpecModel.model_validate({
            "family": "predualOfBall", "radius": "2", "base": {"family": "ell2"},
            "slabs": [{"direction": [[1, -1]]}],
        })
        assert norm.base.family == NormFamily.ELL2
        assert norm.slabs[0].bound == "1"

    def test_slabs_only_for_predual(self):
        """Test that plain families carry no slabs."""
        with pytest.raises(ValidationError):
            NormSpecModel.model_validate({"family": "ell1", "slabs": [{"direction": [[0, 1]]}]})

    def test_product_needs_slot(self):
        """Test that product2 requires inner and slot."""
        with pytest.raises(ValidationError):
            NormSpecModel.model_validate({"family": "product2", "inner": {"family": "ell2"}})


class TestProbeConfig:
    """Tests for ProbeConfig validation."""

    def test_valid_probe(self, sample_probe):
        """Test that the sample probe parses."""
        config = ProbeConfig.model_validate(sample_probe)
        assert config.probe == ProbeProperty.W_STAR_KADEC
        assert config.expect == ProbeStatus.FAIL
        assert config.functionals.start_index == 2

    def test_lur_needs_vectors(self):
        """Test that an LUR probe requires a vector sequence."""
        with pytest.raises(ValidationError, match="vectors"):
            ProbeConfig.model_validate({"name": "lur", "probe": "lur", "norm": {"family": "ell2"}})

    def test_tau_needs_family(self, sample_probe):
        """Test that the Mackey probe requires a polytope family."""
        sample_probe["probe"] = "wStarTauKadec"
        with pytest.raises(ValidationError, match="family"):
            ProbeConfig.model_validate(sample_probe)

    def test_unknown_probe(self, sample_probe):
        """Test that an unknown property name is rejected."""
        sample_probe["probe"] = "uniformConvexity"
        with pytest.raises(ValidationError):
            ProbeConfig.model_validate(sample_probe)
