"""
Built-in reproductions.

Canned scenarios with known outcomes: the bvC0 hyperplanes that converge
Wijsman in the subspace but not in the whole space, the ell1 Kadec
contrast, the slab renorming and its Mosco failure, the separating
functionals of a hyperplane exhaustion, finite-dimensional coincidence of
the notions, indicator epigraphs and a constant sanity scenario. Every
report carries the expected outcome and a match flag.
"""
import logging
import time
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from convlab.config import config
from convlab.engine.certificate_engine import (CertificateMode, SeparationInstance, SliceCertificate,
                                               construct_separating_sequence, exhaust_hyperplane,
                                               nearest_point_recovery, separation_inequality,
                                               verify_wijsman_certificate)
from convlab.engine.convergence_engine import (ConvergenceVerdict, Notion, gap_convergence_check,
                                               hyperplane_sequence, level_set_wijsman_criterion,
                                               mosco_check, mosco_selection_check, wijsman_check)
from convlab.engine.convex_sets import (CompactFamily, Epigraph, Halfspace, Hyperplane, NormBall,
                                        PolyFunc, Polytope, SubspaceSlice)
from convlab.engine.kadec_engine import (ProbeReport, PropertyStarWitness, build_slab_renorm,
                                         level_set_mosco_witness, probe_w_star_kadec,
                                         probe_w_star_tau_kadec, property_star_check,
                                         shifted_functionals)
from convlab.engine.sequences import FamilyKind, FunctionalSequence, SetSequence, TestFamily, VectorSequence
from convlab.engine.space import (Functional, NormSpec, Vector, Window, compare, dual_norm_eval,
                                  format_scalar, norm_eval)
from convlab.models.report import Report
from convlab.models.scenario import ScenarioConfig
from convlab.services.runner_service import (all_matched, environment, probe_record, probe_traces,
                                             runner_service, verdict_record, verdict_traces)
from convlab.services.scenario_service import scenario_service

logger = logging.getLogger(__name__)

# Seeded corpora are evaluated on a sampled tail
COINCIDENCE_SEQUENCES = 50
EPIGRAPH_HORIZON = 64
EPIGRAPH_SEQUENCES = 3


def _vector(entries: Mapping[int, Any], norm: Optional[NormSpec] = None, cls=Vector):
    required = norm.required_indices if norm is not None else ()
    indices = set(entries) | set(required)
    return cls(entries, Window.of(indices) if indices else None)


def _functional(entries: Mapping[int, Any], norm: Optional[NormSpec] = None) -> Functional:
    return _vector(entries, norm, Functional)


def _tolerance(norm: NormSpec) -> Fraction:
    return Fraction(0) if norm.is_polyhedral else Fraction(str(config.FLOAT_TOLERANCE))


class _Run:
    """Collects the records of one built-in in execution order."""

    def __init__(self, name: str, description: str, expected: str):
        self.name = name
        self.description = description
        self.expected = expected
        self.verdicts = []
        self.probes = []
        self.traces = []
        self.results: Dict[str, Any] = {}
        self.exact = True
        self.constructions_ok = True

    @property
    def _position(self) -> int:
        return len(self.verdicts) + len(self.probes)

    def verdict(self, check: str, verdict: ConvergenceVerdict, expected: str) -> ConvergenceVerdict:
        self.traces.extend(verdict_traces(f"{self._position}:{check}", verdict))
        self.verdicts.append(verdict_record(check, verdict, expected))
        self.exact = self.exact and verdict.exact
        return verdict

    def probe(self, report: ProbeReport, expected: str) -> ProbeReport:
        self.traces.extend(probe_traces(f"{self._position}:{report.property.value}", report))
        self.probes.append(probe_record(report, expected))
        return report

    def result(self, key: str, value: Any, ok: bool = True) -> None:
        self.results[key] = value
        if not ok:
            logger.warning("%s: construction check %s failed", self.name, key)
        self.constructions_ok = self.constructions_ok and ok

    def report(self, tail_samples: Optional[int] = None, seed: Optional[int] = None) -> Report:
        report = Report(
            schema_version=config.SCHEMA_VERSION,
            scenario=self.name,
            description=self.description,
            verdicts=self.verdicts,
            probes=self.probes,
            traces=self.traces,
            results=self.results,
            expected=self.expected,
            environment=environment(self.exact, tail_samples, seed),
        )
        report.matched = all_matched(report) and self.constructions_ok
        return report


# =============================================================================
# Shared data
# =============================================================================

def bv_hyperplane_data(horizon: int) -> Tuple[NormSpec, FunctionalSequence, Functional]:
    """f_n = e1* + e_n* -> f = e1* under bvC0, and the functional cutting out Y = {x0 = x1}."""
    norm = NormSpec.bv_c0()
    fseq = FunctionalSequence(lambda n: _functional({1: 1, n: 1}, norm), _functional({1: 1}, norm),
                              norm, horizon=horizon, start_index=2)
    return norm, fseq, _functional({0: 1, 1: -1}, norm)


def ell1_kadec_data(horizon: int) -> FunctionalSequence:
    norm = NormSpec.ell1()
    return FunctionalSequence(lambda n: _functional({1: 1, n: 1}), _functional({1: 1}), norm,
                              horizon=horizon, start_index=2)


def unit_vector_witness(horizon: int) -> PropertyStarWitness:
    """x_n* = e_n*, x_n = e_n in ell2: both tend weakly to 0, the pairing stays 1."""
    norm = NormSpec.ell2()
    fseq = FunctionalSequence(lambda n: _functional({n: 1}), Functional({}), norm,
                              horizon=horizon, start_index=2)
    xseq = VectorSequence(lambda n: _vector({n: 1}), horizon=horizon, start_index=2)
    return PropertyStarWitness(fseq, xseq, Vector({}), tuple(fseq.tail()))


def moving_mass_polytope(horizon: int, start: int = 2) -> Polytope:
    """conv{e_start, ..., e_horizon}: carries mass at every index of the sequence."""
    return Polytope(tuple(_vector({n: 1}) for n in range(start, horizon + 1)))


# =============================================================================
# Service
# =============================================================================

class BuiltinService:
    """Registry and runner of the built-in reproductions."""

    def __init__(self):
        self._registry: Dict[str, Tuple[str, Callable[[], Report]]] = {
            "prop21b_Y": ("bvC0 hyperplanes sliced by Y = {x0 = x1}, seen from Y: Wijsman supported",
                          self._prop21b_y),
            "prop21b_X": ("the same sets seen from X: Wijsman refuted at z0 = e1/2 (1/2 vs 1)",
                          self._prop21b_x),
            "ell1_kadec_fail": ("f_n = e1* + e_n* on ell1: w*-Kadec probe fails, ||f_n - f|| = 1",
                                self._ell1_kadec_fail),
            "ell1_tau_pass": ("the same sequence passes the Mackey probe on fixed polytopes",
                              self._ell1_tau_pass),
            "prop25_renorm": ("slab renorming of ell2 turns the (e_n*, e_n) pairing failure into "
                              "a Mackey failure", self._prop25_renorm),
            "thm32_separation": ("separating functionals between an exhaustion of {x0 = 1} and "
                                 "{x0 <= 1/j}", self._thm32_separation),
            "finite_dim_coincidence": ("Wijsman, slice and Mosco agree on seeded planar polytope "
                                       "sequences", self._finite_dim_coincidence),
            "epigraph_indicator": ("indicator epigraphs of (1 + 1/n)P under the ell2 product norm",
                                   self._epigraph_indicator),
            "prop23_mosco_failure": ("renormed level sets converge Wijsman but fail Mosco at the "
                                     "selection", self._prop23_mosco_failure),
            "constant_all_checks": ("constant polytope sequence: every notion supported",
                                    self._constant_all_checks),
        }

    def list_builtins(self) -> List[Tuple[str, str]]:
        return [(name, description) for name, (description, _) in self._registry.items()]

    def builtin_repro(self, name: str, timing: bool = False) -> Report:
        if name not in self._registry:
            raise KeyError(f"unknown built-in {name!r}; known: {', '.join(self._registry)}")
        started = time.perf_counter()
        logger.info("built-in %s started", name)
        _, build = self._registry[name]
        report = build()
        if timing:
            report.wall_time = round(time.perf_counter() - started, 3)
        logger.info("built-in %s finished: matched=%s", name, report.matched)
        return report

    def run_all(self, timing: bool = False) -> List[Report]:
        return [self.builtin_repro(name, timing) for name in self._registry]

    # ------------------------------------------------------------------
    # bvC0 hyperplanes
    # ------------------------------------------------------------------

    def _sliced_sequence(self) -> Tuple[NormSpec, SetSequence]:
        norm, fseq, diag = bv_hyperplane_data(config.DEFAULT_HORIZON)

        def sliced(f: Functional) -> SubspaceSlice:
            return SubspaceSlice(((diag, Fraction(0)),), Hyperplane(f, Fraction(1)))

        seq = SetSequence(lambda n: sliced(fseq.at(n)), sliced(fseq.limit), norm,
                          horizon=fseq.horizon, start_index=fseq.start_index)
        return norm, seq

    def _prop21b_y(self) -> Report:
        run = _Run("prop21b_Y", self._registry["prop21b_Y"][0], "wijsman supported")
        norm, seq = self._sliced_sequence()
        ts = [Fraction(0), Fraction(1, 2), Fraction(2), Fraction(-1)]
        pts = TestFamily(FamilyKind.POINTS, [_vector({0: t, 1: t}, norm) for t in ts],
                         [f"({format_scalar(t)})(e0+e1)" for t in ts])
        run.verdict("wijsman", wijsman_check(seq, pts, Fraction(0)), "supported")
        return run.report()

    def _prop21b_x(self) -> Report:
        run = _Run("prop21b_X", self._registry["prop21b_X"][0],
                   "wijsman refuted with witness (z0, 1/2, 1); plain hyperplanes supported")
        horizon = config.DEFAULT_HORIZON
        norm, fseq, _ = bv_hyperplane_data(horizon)
        _, seq = self._sliced_sequence()
        z0 = _vector({1: Fraction(1, 2)}, norm)

        indices = range(fseq.start_index, horizon + 1)
        gaps = {format_scalar(norm_eval(norm, z0 - _vector({0: Fraction(1, 2), 1: Fraction(1, 2),
                                                              n: Fraction(1, 2)}, norm)))
                for n in indices}
        run.result("norm(z0 - z_n)", sorted(gaps), gaps == {"1/2"})
        dual_norms = {format_scalar(dual_norm_eval(norm, fseq.at(n))) for n in indices}
        dual_norms.add(format_scalar(dual_norm_eval(norm, fseq.limit)))
        run.result("dual_norm(f_n), dual_norm(f)", sorted(dual_norms), dual_norms == {"1"})

        verdict = run.verdict("wijsman", wijsman_check(seq, TestFamily(FamilyKind.POINTS, [z0], ["z0"]),
                                                       Fraction(0)), "refuted")
        witness = verdict.witness
        run.result("witness", witness.to_dict() if witness else None,
                   witness is not None and (witness.lhs, witness.rhs) == (Fraction(1, 2), 1))

        probes = TestFamily(FamilyKind.POINTS, [z0, _vector({}, norm), _vector({0: 1}, norm),
                                                _vector({0: 1, 1: 1, 2: -1}, norm)],
                            ["z0", "0", "e0", "e0+e1-e2"])
        run.verdict("level_set", level_set_wijsman_criterion(fseq, Fraction(1), probes, Fraction(0)),
                    "supported")

        planes = hyperplane_sequence(fseq, 1)
        e1 = _vector({1: 1}, norm)
        cert = SliceCertificate(fseq.limit, e1, fseq.at, CertificateMode.W_STAR,
                                points=tuple(probes.members))
        run.verdict("wijsman_certificate",
                    verify_wijsman_certificate(cert, planes, nearest_point_recovery(planes, e1),
                                               Fraction(0)), "supported")
        return run.report()

    # ------------------------------------------------------------------
    # Kadec probes
    # ------------------------------------------------------------------

    def _ell1_kadec_fail(self) -> Report:
        run = _Run("ell1_kadec_fail", self._registry["ell1_kadec_fail"][0],
                   "w*-Kadec fail with ||f_n - f|| = 1; Mackey fail on the moving-mass polytope")
        fseq = ell1_kadec_data(config.DEFAULT_HORIZON)
        pts = [_vector({i: 1}) for i in range(4)]
        report = run.probe(probe_w_star_kadec(fseq, pts, Fraction(0)), "fail")
        distances = {format_scalar(v) for v in report.traces["dual_norm(f_n - f)"].values()}
        run.result("dual_norm(f_n - f)", sorted(distances), distances == {"1"})
        # conv{e_n} is not weakly compact in ell1
        moving = CompactFamily([moving_mass_polytope(fseq.horizon)])
        run.probe(probe_w_star_tau_kadec(fseq, pts, moving, Fraction(0)), "fail")
        return run.report()

    def _ell1_tau_pass(self) -> Report:
        run = _Run("ell1_tau_pass", self._registry["ell1_tau_pass"][0], "Mackey probe pass")
        fseq = ell1_kadec_data(config.DEFAULT_HORIZON)
        pts = [_vector({i: 1}) for i in range(4)]
        fam = CompactFamily([
            Polytope((_vector({0: 1}), _vector({1: 1}), _vector({0: -1, 2: 1}))),
            Polytope((_vector({}), _vector({1: 1, 3: 1}))),
            Polytope((_vector({0: 2}), _vector({3: Fraction(-1, 2)}), _vector({1: -1, 2: 1}))),
        ])
        run.probe(probe_w_star_tau_kadec(fseq, pts, fam, Fraction(0)), "pass")
        return run.report()

    def _prop25_renorm(self) -> Report:
        run = _Run("prop25_renorm", self._registry["prop25_renorm"][0],
                   "pairing fails; renormed Mackey probe fails; base-norm probe vacuous")
        horizon = config.DEFAULT_HORIZON
        witness = unit_vector_witness(horizon)
        base = witness.fseq.norm
        tol = _tolerance(base)
        run.probe(property_star_check(witness.fseq, witness.xseq, witness.x, tol), "fail")

        y, y_star = _vector({1: -1}), _functional({1: -1})
        renorm = build_slab_renorm(witness, y, y_star)
        run.result("renorm", renorm.label, renorm != base)
        top = max((dual_norm_eval(renorm, y_star + witness.fseq.at(j)) for j in witness.indices),
                  key=float)
        run.result("max_j |||y* + x_j*|||", format_scalar(top), compare(top, 1) <= 0)
        limit_norm = dual_norm_eval(renorm, y_star + witness.fseq.limit)
        run.result("|||y* + x*|||", format_scalar(limit_norm), compare(limit_norm, 1) == 0)

        pts = [_vector({i: 1}) for i in range(3)]
        planted = CompactFamily([moving_mass_polytope(horizon)])
        renormed = shifted_functionals(witness.fseq, y_star, renorm)
        run.probe(probe_w_star_tau_kadec(renormed, pts, planted, _tolerance(renorm)), "fail")
        # under the base norm ||y* + e_n*|| = sqrt(2) never reaches ||y*|| = 1
        unrenormed = shifted_functionals(witness.fseq, y_star)
        run.probe(probe_w_star_tau_kadec(unrenormed, pts, planted, tol), "vacuous")

        unit_limit = PropertyStarWitness(
            shifted_functionals(witness.fseq, _functional({0: 1})), witness.xseq, witness.x,
            witness.indices)
        kept = build_slab_renorm(unit_limit, y, y_star)
        run.result("unit limit keeps the base norm", kept == base, kept == base)
        return run.report()

    def _prop23_mosco_failure(self) -> Report:
        run = _Run("prop23_mosco_failure", self._registry["prop23_mosco_failure"][0],
                   "wijsman supported; mosco refuted at M(ii), weak limit -3/4 e1 at distance 1/4")
        witness = unit_vector_witness(config.DEFAULT_HORIZON)
        y, y_star = _vector({1: -1}), _functional({1: -1})
        renorm = build_slab_renorm(witness, y, y_star)
        tol = _tolerance(renorm)
        gseq = shifted_functionals(witness.fseq, y_star, renorm)
        x0 = _vector({1: -3})
        sets, selection = level_set_mosco_witness(gseq, witness.xseq, x0)
        run.result("selection(n)", selection.at(sets.horizon).describe())

        pts = TestFamily(FamilyKind.POINTS,
                         [_vector({}), _vector({0: 1}), _vector({1: 1}), x0, _vector({1: 1, 2: 1})],
                         ["0", "e0", "e1", "x0", "e1+e2"])
        run.verdict("wijsman", wijsman_check(sets, pts, tol), "supported")
        verdict = run.verdict("mosco_selection", mosco_selection_check(sets, selection, tol), "refuted")
        witness_row = verdict.witness
        run.result("weak limit distance", witness_row.to_dict() if witness_row else None,
                   witness_row is not None and compare(witness_row.lhs, Fraction(1, 4)) == 0)
        return run.report()

    # ------------------------------------------------------------------
    # Separation
    # ------------------------------------------------------------------

    def _thm32_separation(self, count: int = 8) -> Report:
        run = _Run("thm32_separation", self._registry["thm32_separation"][0],
                   "sup_Cj L + (1 - 1/n) <= min_Kn L for every instance")
        norm = NormSpec.sup_c0()
        window = Window((0, 1))
        e0 = Functional({0: 1}, window)
        plane = Hyperplane(e0, Fraction(1))
        anchor = Vector({}, window)
        exhaustion = exhaust_hyperplane(plane, anchor, count, norm)
        run.result("exhaustion", [len(set(K.vertices)) for K in exhaustion])

        instances = [SeparationInstance(4, 1, Polytope.point(Vector({0: 1}, window)),
                                        Halfspace(e0, Fraction(0)))]
        for n, K in enumerate(exhaustion, start=1):
            instances.append(SeparationInstance(n, 2 * n, K, Halfspace(e0, Fraction(1, 2 * n))))

        rows = []
        holds = True
        for inst in instances:
            functional = construct_separating_sequence(inst, norm)
            lhs, rhs = separation_inequality(inst, functional)
            ok = compare(lhs, rhs) <= 0
            holds = holds and ok
            rows.append({"n": inst.n, "j": inst.j, "functional": functional.describe(),
                         "lhs": format_scalar(lhs), "rhs": format_scalar(rhs), "holds": ok})
        run.result("separators", rows, holds)
        return run.report()

    # ------------------------------------------------------------------
    # Seeded corpora
    # ------------------------------------------------------------------

    def _finite_dim_coincidence(self) -> Report:
        seed = config.RANDOM_SEED
        run = _Run("finite_dim_coincidence", self._registry["finite_dim_coincidence"][0],
                   "wijsman, slice and mosco statuses agree on every sequence")
        rng = np.random.default_rng(seed)
        tol = Fraction(str(config.FLOAT_TOLERANCE))
        agreeing = 0
        for k in range(COINCIDENCE_SEQUENCES):
            seq, pts, sets, planted = self._random_sequence(rng, k)
            expected = "refuted" if planted else "supported"
            statuses = {
                run.verdict(f"seq{k:02d}:wijsman", wijsman_check(seq, pts, tol), expected).status,
                run.verdict(f"seq{k:02d}:slice",
                            gap_convergence_check(seq, sets, tol, Notion.SLICE), expected).status,
                run.verdict(f"seq{k:02d}:mosco", mosco_check(seq, pts, tol), expected).status,
            }
            agreeing += len(statuses) == 1
        run.result("agreeing", agreeing, agreeing == COINCIDENCE_SEQUENCES)
        return run.report(config.TAIL_SAMPLES, seed)

    def _random_sequence(self, rng: np.random.Generator, k: int):
        """(1 + s/n) P + t/n over a random triangle P; every fifth declared limit is shifted away."""
        norm = NormSpec.sup_c0() if k % 2 == 0 else NormSpec.ell1()
        window = Window((0, 1))

        def point(lo: int, hi: int) -> Vector:
            a, b = rng.integers(lo, hi + 1, size=2)
            return Vector({0: int(a), 1: int(b)}, window)

        vertices = tuple(point(-2, 2) for _ in range(3))
        scale = Fraction(int(rng.integers(1, 3)))
        shift = point(-1, 1)
        planted = k % 5 == 4
        P = Polytope(vertices)
        limit = P.translated(Vector({0: 10}, window)) if planted else P

        def member(n: int) -> Polytope:
            return Polytope(tuple(v.scale(1 + scale / n) + shift.scale(Fraction(1, n)) for v in vertices))

        seq = SetSequence(member, limit, norm, horizon=config.DEFAULT_HORIZON)
        centroid = (vertices[0] + vertices[1] + vertices[2]).scale(Fraction(1, 3))
        pts = TestFamily(FamilyKind.POINTS, [point(-4, 4) for _ in range(3)] + [centroid])
        sets = TestFamily(FamilyKind.BOUNDED, [
            Polytope((centroid, point(-4, 4))),
            NormBall(point(-4, 4), Fraction(1, 2), norm),
        ])
        return seq, pts, sets, planted

    def _epigraph_indicator(self) -> Report:
        seed = config.RANDOM_SEED
        run = _Run("epigraph_indicator", self._registry["epigraph_indicator"][0],
                   "wijsman and slice supported within 1e-6 at horizon 64")
        rng = np.random.default_rng(seed)
        tol = Fraction(str(config.EPIGRAPH_TOLERANCE))
        norm = NormSpec.product2(NormSpec.ell2(), 2)
        plane = Window((0, 1))
        space = Window((0, 1, 2))

        def point(lo: int, hi: int, window: Window = plane) -> Vector:
            values = rng.integers(lo, hi + 1, size=len(window))
            return Vector({i: int(v) for i, v in zip(window, values)}, window)

        for k in range(EPIGRAPH_SEQUENCES):
            vertices = tuple(point(-2, 2) for _ in range(3))

            def epigraph(factor: Fraction, vertices=vertices) -> Epigraph:
                domain = Polytope(tuple(v.scale(factor) for v in vertices))
                return Epigraph(PolyFunc.indicator(domain), norm)

            seq = SetSequence(lambda n, epigraph=epigraph: epigraph(1 + Fraction(1, n)),
                              epigraph(Fraction(1)), norm, horizon=EPIGRAPH_HORIZON)
            pts = TestFamily(FamilyKind.POINTS, [point(-3, 3, space) for _ in range(4)])
            sets = TestFamily(FamilyKind.BOUNDED,
                              [Polytope((point(-3, 3, space), point(-3, 3, space))) for _ in range(2)])
            run.verdict(f"epi{k}:wijsman", wijsman_check(seq, pts, tol), "supported")
            run.verdict(f"epi{k}:slice", gap_convergence_check(seq, sets, tol, Notion.SLICE),
                        "supported")
        return run.report(config.TAIL_SAMPLES, seed)

    # ------------------------------------------------------------------
    # Scenario-file path
    # ------------------------------------------------------------------

    def _constant_all_checks(self) -> Report:
        triangle = {"kind": "polytope", "vertices": [[], [[0, 1]], [[1, 1]]]}
        data = {
            "name": "constant_all_checks",
            "description": self._registry["constant_all_checks"][0],
            "norm": {"family": "supC0"},
            "tolerance": "0",
            "sequence": {"generator": triangle, "limit": triangle},
            "families": [
                {"id": "pts", "kind": "points", "points": [[[0, 2]], [[0, -1], [1, 3]], [[1, "1/3"]]]},
                {"id": "compact", "kind": "compact",
                 "sets": [{"kind": "polytope", "vertices": [[[0, 3]], [[1, 3]]]}]},
                {"id": "weak", "kind": "weakCompact",
                 "sets": [{"kind": "polytope", "vertices": [[[0, -2]], [[0, -2], [1, 1]]]}]},
                {"id": "bounded", "kind": "bounded",
                 "sets": [{"kind": "ball", "center": [[0, 4], [1, 4]], "radius": "1/2"},
                          {"kind": "minkowski_sum", "base": triangle, "radius": 1}]},
            ],
            "checks": [
                {"check": "wijsman", "family": "pts", "expect": "supported"},
                {"check": "compact_gap", "family": "compact", "expect": "supported"},
                {"check": "weak_compact_gap", "family": "weak", "expect": "supported"},
                {"check": "slice", "family": "bounded", "expect": "supported"},
                {"check": "mosco", "family": "pts", "expect": "supported"},
                {"check": "upper_gap", "family": "bounded", "expect": "supported"},
            ],
        }
        scenario = scenario_service.validate(data, ScenarioConfig)
        report = runner_service.run_scenario(scenario)
        report.expected = "every check supported"
        return report


# Global service instance
builtin_service = BuiltinService()
