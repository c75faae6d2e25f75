"""
Seed script writing the example scenario and probe configs.
Run with: python -m scripts.seed_scenarios
"""
import json
from pathlib import Path

DB_PATH = Path("db")


def create_shrinking_balls():
    """Sup-norm balls of radius 1 + 1/n around e0 + e1: every notion converges."""
    return {
        "name": "shrinking_balls",
        "description": "B(e0 + e1, 1 + 1/n) -> B(e0 + e1, 1) in c0",
        "schema_version": 1,
        "norm": {"family": "supC0"},
        "tolerance": "0",
        "sequence": {
            "generator": {"kind": "ball", "center": [[0, 1], [1, 1]], "radius": "1 + 1/n"},
            "limit": {"kind": "ball", "center": [[0, 1], [1, 1]], "radius": "1"},
        },
        "families": [
            {"id": "pts", "kind": "points",
             "points": [[], [[0, 3]], [[0, -2], [1, "1/2"]], [[2, 5]]],
             "member_ids": ["0", "3e0", "-2e0+e1/2", "5e2"]},
            {"id": "far", "kind": "bounded",
             "sets": [{"kind": "polytope", "vertices": [[[0, 4]], [[0, 4], [1, 4]]]}]},
        ],
        "checks": [
            {"check": "wijsman", "family": "pts", "expect": "supported"},
            {"check": "slice", "family": "far", "expect": "supported"},
            {"check": "mosco", "family": "pts", "expect": "supported"},
        ],
    }


def create_tilting_segments():
    """Segments [0, e0 + e1/n] flattening onto [0, e0] under ell1."""
    return {
        "name": "tilting_segments",
        "description": "conv{0, e0 + e1/n} -> conv{0, e0} in ell1",
        "schema_version": 1,
        "norm": {"family": "ell1"},
        "sequence": {
            "generator": {"kind": "polytope", "vertices": [[], [[0, 1], [1, "1/n"]]]},
            "limit": {"kind": "polytope", "vertices": [[], [[0, 1]]]},
        },
        "families": [
            {"id": "compact", "kind": "compact",
             "sets": [{"kind": "polytope", "vertices": [[[1, 2]], [[0, 1], [1, 3]]]}]},
            {"id": "bounded", "kind": "bounded",
             "sets": [{"kind": "ball", "center": [[0, -2]], "radius": "1/2"}]},
        ],
        "checks": [
            {"check": "compact_gap", "family": "compact", "expect": "supported"},
            {"check": "upper_gap", "family": "bounded", "expect": "supported"},
        ],
    }


def _bv_hyperplanes(name, description, points, expect):
    sliced = {
        "kind": "subspace_slice",
        "constraints": [[[0, 1], [1, -1]]],
        "base": {"kind": "hyperplane", "functional": [[1, 1], ["n", 1]], "level": 1},
    }
    limit = {
        "kind": "subspace_slice",
        "constraints": [[[0, 1], [1, -1]]],
        "base": {"kind": "hyperplane", "functional": [[1, 1]], "level": 1},
    }
    return {
        "name": name,
        "description": description,
        "schema_version": 1,
        "norm": {"family": "bvC0"},
        "sequence": {"generator": sliced, "limit": limit, "start_index": 2},
        "functionals": {"generator": [[1, 1], ["n", 1]], "limit": [[1, 1]], "start_index": 2},
        "level": "1",
        "families": [{"id": "pts", "kind": "points", "points": points}],
        "checks": [
            {"check": "wijsman", "family": "pts", "expect": expect},
            {"check": "level_set", "family": "pts", "expect": "supported"},
        ],
    }


def create_bv_hyperplanes_y():
    return _bv_hyperplanes(
        "bv_hyperplanes_y", "{e1* + e_n* = 1} sliced by {x0 = x1}, tested from the slice",
        [[], [[0, "1/2"], [1, "1/2"]], [[0, 2], [1, 2]]], "supported")


def create_bv_hyperplanes_x():
    return _bv_hyperplanes(
        "bv_hyperplanes_x", "the same sets tested at e1/2, off the slice",
        [[[1, "1/2"]]], "refuted")


def create_ell1_w_star_kadec():
    return {
        "name": "ell1_w_star_kadec",
        "description": "e1* + e_n* -> e1* weak* with constant norm, yet ||e_n*|| = 1",
        "schema_version": 1,
        "probe": "wStarKadec",
        "norm": {"family": "ell1"},
        "functionals": {"generator": [[1, 1], ["n", 1]], "limit": [[1, 1]], "start_index": 2},
        "points": [[[0, 1]], [[1, 1]], [[2, 1]], [[3, 1]]],
        "expect": "fail",
    }


def create_ell2_pairing():
    return {
        "name": "ell2_pairing",
        "description": "<e_n*, e_n> = 1 although both sequences tend weakly to 0",
        "schema_version": 1,
        "probe": "propertyStar",
        "norm": {"family": "ell2"},
        "tolerance": "0",
        "functionals": {"generator": [["n", 1]], "limit": []},
        "vectors": {"generator": [["n", 1]], "limit": []},
        "expect": "fail",
    }


def create_ell2_lur():
    return {
        "name": "ell2_lur",
        "description": "e0 + e1/n -> e0 in the locally uniformly rotund ell2 norm",
        "schema_version": 1,
        "probe": "lur",
        "norm": {"family": "ell2"},
        "vectors": {"generator": [[0, 1], [1, "1/n"]], "limit": [[0, 1]]},
        "expect": "pass",
    }


SEEDS = [
    create_shrinking_balls,
    create_tilting_segments,
    create_bv_hyperplanes_y,
    create_bv_hyperplanes_x,
    create_ell1_w_star_kadec,
    create_ell2_pairing,
    create_ell2_lur,
]


def seed_scenarios():
    """Main function to write the example configs."""
    print("Seeding scenarios...")
    target = DB_PATH / "scenarios"
    target.mkdir(parents=True, exist_ok=True)
    for create in SEEDS:
        data = create()
        path = target / f"{data['name']}.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, ensure_ascii=False)
            f.write("\n")
        print(f"Created: {path}")
    print("Scenarios seeded successfully!")


if __name__ == "__main__":
    seed_scenarios()
