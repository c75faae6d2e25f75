"""
Runner service.
Executes scenario and probe configs and assembles their reports in config order.
"""
import logging
import time
from fractions import Fraction
from typing import Dict, List, Optional

from convlab.config import config
from convlab.engine.cell_pool import cell_pool
from convlab.engine.convergence_engine import (ConvergenceVerdict, Notion, gap_convergence_check,
                                               level_set_wijsman_criterion, mosco_check,
                                               upper_gap_check, wijsman_check)
from convlab.engine.kadec_engine import (ProbeProperty, ProbeReport, probe_lur,
                                         probe_w_star_kadec, probe_w_star_tau_kadec,
                                         property_star_check)
from convlab.engine.sequences import TestFamily
from convlab.engine.space import format_scalar, is_exact
from convlab.models.report import (EnvironmentRecord, ProbeRecord, Report, TraceRecord,
                                   VerdictRecord, WitnessRecord)
from convlab.models.scenario import CheckSpec, ProbeConfig, ScenarioConfig
from convlab.services.scenario_builder import ScenarioBuilder, build_norm

logger = logging.getLogger(__name__)


def verdict_record(check: str, verdict: ConvergenceVerdict,
                   expected: Optional[str] = None) -> VerdictRecord:
    data = verdict.to_dict()
    witness = WitnessRecord(**data["witness"]) if data["witness"] else None
    return VerdictRecord(
        check=check,
        notion=data["notion"],
        status=data["status"],
        horizon=data["horizon"],
        tolerance=data["tolerance"],
        max_deviation=data["max_deviation"],
        exact=data["exact"],
        witness=witness,
        details=data["details"],
        expected=expected,
        matched=None if expected is None else data["status"] == expected,
    )


def probe_record(report: ProbeReport, expected: Optional[str] = None) -> ProbeRecord:
    data = report.to_dict()
    witness = WitnessRecord(**data["witness"]) if data["witness"] else None
    return ProbeRecord(
        property=data["property"],
        status=data["status"],
        horizon=data["horizon"],
        tolerance=data["tolerance"],
        witness=witness,
        probe_basis=data["probe_basis"],
        details=data["details"],
        expected=expected,
        matched=None if expected is None else data["status"] == expected,
    )


def verdict_traces(prefix: str, verdict: ConvergenceVerdict) -> List[TraceRecord]:
    return [TraceRecord(n=row.n, object_id=f"{prefix}/{row.object_id}", value=format_scalar(row.value))
            for row in verdict.trace]


def probe_traces(prefix: str, report: ProbeReport) -> List[TraceRecord]:
    return [TraceRecord(n=n, object_id=f"{prefix}/{name}", value=format_scalar(value))
            for n, name, value in report.trace_rows()]


def environment(exact: bool, tail_samples: Optional[int], seed: Optional[int] = None) -> EnvironmentRecord:
    samples = config.TAIL_SAMPLES if tail_samples is None else tail_samples
    return EnvironmentRecord(exact=exact, threads=cell_pool.workers, tail_samples=samples, seed=seed)


def all_matched(report: Report) -> bool:
    return all(r.matched is not False for r in report.records())


class RunnerService:
    """Runs scenario and probe configs."""

    def run_scenario(self, scenario: ScenarioConfig, timing: bool = False) -> Report:
        """Execute every check of a scenario; one verdict per check, in config order."""
        started = time.perf_counter()
        logger.info("scenario %s: %d checks", scenario.name, len(scenario.checks))
        builder = ScenarioBuilder(build_norm(scenario.norm))
        seq = None
        if scenario.sequence is not None:
            seq = builder.set_sequence(scenario.sequence, scenario.horizon, scenario.tail_samples)
        fseq = None
        if scenario.functionals is not None:
            fseq = builder.functional_sequence(scenario.functionals, scenario.horizon,
                                               scenario.tail_samples)
        families: Dict[str, TestFamily] = {
            spec.id: builder.family(spec, f"families.{k}") for k, spec in enumerate(scenario.families)
        }
        tol = Fraction(scenario.tolerance)

        verdicts: List[VerdictRecord] = []
        traces: List[TraceRecord] = []
        exact = True
        for k, check in enumerate(scenario.checks):
            verdict = self._execute(check, seq, fseq, families[check.family], tol,
                                    Fraction(scenario.level))
            exact = exact and verdict.exact
            verdicts.append(verdict_record(check.check, verdict, check.expect))
            traces.extend(verdict_traces(f"{k}:{check.check}:{check.family}", verdict))

        report = Report(
            schema_version=config.SCHEMA_VERSION,
            scenario=scenario.name,
            description=scenario.description,
            verdicts=verdicts,
            traces=traces,
            environment=environment(exact, scenario.tail_samples),
            wall_time=round(time.perf_counter() - started, 3) if timing else None,
        )
        report.matched = all_matched(report)
        return report

    def _execute(self, check: CheckSpec, seq, fseq, family: TestFamily, tol: Fraction,
                 level: Fraction) -> ConvergenceVerdict:
        name = check.check
        if name == "wijsman":
            return wijsman_check(seq, family, tol)
        if name in ("compact_gap", "weak_compact_gap", "slice"):
            return gap_convergence_check(seq, family, tol, Notion(name))
        if name == "upper_gap":
            return upper_gap_check(seq, family, tol)
        if name == "mosco":
            return mosco_check(seq, family, tol)
        return level_set_wijsman_criterion(fseq, level, family, tol)

    def run_probe(self, probe: ProbeConfig, timing: bool = False) -> Report:
        """Run one Kadec-type probe."""
        started = time.perf_counter()
        builder = ScenarioBuilder(build_norm(probe.norm))
        tol = Fraction(probe.tolerance)
        fseq = None
        if probe.functionals is not None:
            fseq = builder.functional_sequence(probe.functionals, probe.horizon, probe.tail_samples)
        xseq, x = None, None
        if probe.vectors is not None:
            xseq, x = builder.vector_sequence(probe.vectors, probe.horizon, probe.tail_samples)
        points = [builder.vector(p, None, f"points.{k}") for k, p in enumerate(probe.points)]

        if probe.probe == ProbeProperty.W_STAR_KADEC:
            result = probe_w_star_kadec(fseq, points, tol)
        elif probe.probe == ProbeProperty.W_STAR_TAU_KADEC:
            result = probe_w_star_tau_kadec(fseq, points, builder.compact_family(probe.family), tol)
        elif probe.probe == ProbeProperty.LUR:
            result = probe_lur(builder.norm, xseq, x, tol)
        else:
            result = property_star_check(fseq, xseq, x, tol)

        expected = probe.expect.value if probe.expect else None
        record = probe_record(result, expected)
        report = Report(
            schema_version=config.SCHEMA_VERSION,
            scenario=probe.name,
            description=probe.description,
            probes=[record],
            traces=probe_traces(f"0:{result.property.value}", result),
            environment=environment(all(is_exact(v) for _, _, v in result.trace_rows()),
                                    probe.tail_samples),
            wall_time=round(time.perf_counter() - started, 3) if timing else None,
        )
        report.matched = all_matched(report)
        return report


# Global service instance
runner_service = RunnerService()
