# tests/conftest.py
import json
from fractions import Fraction

import pytest

from convlab import config
from convlab.engine.convex_sets import NormBall, Polytope
from convlab.engine.sequences import FamilyKind, SetSequence, TestFamily
from convlab.engine.space import NormSpec, Vector, Window

# Small horizons keep the exact checks fast; behaviour matches the default.
TEST_HORIZON = 32


@pytest.fixture(autouse=True)
def small_horizon(monkeypatch):
    """Default horizon for sequences built without an explicit one"""
    monkeypatch.setattr(config.config, "DEFAULT_HORIZON", TEST_HORIZON)
    monkeypatch.setattr(config.config, "THREADS", 1)


@pytest.fixture
def plane():
    """Window of the first two coordinates"""
    return Window((0, 1))


@pytest.fixture
def sup_norm():
    return NormSpec.sup_c0()


@pytest.fixture
def ell1_norm():
    return NormSpec.ell1()


@pytest.fixture
def ell2_norm():
    return NormSpec.ell2()


@pytest.fixture
def bv_norm():
    return NormSpec.bv_c0()


@pytest.fixture
def triangle(plane):
    """conv{0, e0, e1}"""
    return Polytope((Vector({}, plane), Vector({0: 1}, plane), Vector({1: 1}, plane)))


@pytest.fixture
def shrinking_balls(sup_norm, plane):
    """B(e0 + e1, 1 + 1/n) -> B(e0 + e1, 1) in the sup norm"""
    center = Vector({0: 1, 1: 1}, plane)
    return SetSequence(lambda n: NormBall(center, 1 + Fraction(1, n), sup_norm),
                       NormBall(center, Fraction(1), sup_norm), sup_norm, horizon=TEST_HORIZON)


@pytest.fixture
def test_points(plane):
    """A few points around the plane"""
    return TestFamily(FamilyKind.POINTS, [
        Vector({}, plane),
        Vector({0: 3}, plane),
        Vector({0: -2, 1: Fraction(1, 2)}, plane),
    ])


@pytest.fixture
def temp_db(tmp_path, monkeypatch):
    """Empty scenario directory used as DB_PATH"""
    (tmp_path / "scenarios").mkdir()
    monkeypatch.setattr(config.config, "DB_PATH", tmp_path)
    return tmp_path


@pytest.fixture
def sample_scenario():
    """Minimal valid scenario config: shrinking sup-norm balls"""
    return {
        "name": "sample",
        "description": "B(0, 1 + 1/n) -> B(0, 1)",
        "schema_version": 1,
        "norm": {"family": "supC0"},
        "horizon": 16,
        "sequence": {
            "generator": {"kind": "ball", "center": [], "radius": "1 + 1/n"},
            "limit": {"kind": "ball", "center": [], "radius": "1"},
        },
        "families": [
            {"id": "pts", "kind": "points", "points": [[[0, 3]], [[0, -1], [1, 2]]]},
        ],
        "checks": [
            {"check": "wijsman", "family": "pts", "expect": "supported"},
        ],
    }


@pytest.fixture
def sample_probe():
    """Minimal valid probe config: the ell1 w*-Kadec failure"""
    return {
        "name": "sample_probe",
        "schema_version": 1,
        "probe": "wStarKadec",
        "norm": {"family": "ell1"},
        "horizon": 16,
        "functionals": {"generator": [[1, 1], ["n", 1]], "limit": [[1, 1]], "start_index": 2},
        "points": [[[0, 1]], [[1, 1]]],
        "expect": "fail",
    }


@pytest.fixture
def write_config(temp_db):
    """Write a config dict into the scenario directory; returns its path"""
    def _write(data):
        path = temp_db / "scenarios" / f"{data['name']}.json"
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return path
    return _write
