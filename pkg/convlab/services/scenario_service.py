"""
Scenario service for JSON file operations.
Loads and validates scenario/probe configs, writes reports and trace CSVs.
"""
import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from convlab.config import config
from convlab.engine.errors import ScenarioConfigError
from convlab.models.report import Report
from convlab.models.scenario import ProbeConfig, ScenarioConfig
from convlab.services.scenario_builder import ScenarioBuilder, build_norm

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)

TRACE_COLUMNS = ("n", "object_id", "value")


def _error_paths(exc: ValidationError) -> List[str]:
    return [".".join(str(part) for part in err["loc"]) or "<root>" for err in exc.errors()]


def _summary(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        where = ".".join(str(part) for part in err["loc"]) or "<root>"
        lines.append(f"{where}: {err['msg']}")
    return "; ".join(lines)


class ScenarioService:
    """Service for scenario files under DB_PATH/scenarios."""

    @property
    def scenarios_path(self) -> Path:
        return Path(config.DB_PATH) / "scenarios"

    def resolve(self, name_or_path: Union[str, Path]) -> Path:
        """A file path as given, or a bare name looked up in the scenario directory."""
        path = Path(name_or_path)
        if path.exists():
            return path
        candidate = self.scenarios_path / f"{path.stem}.json"
        if candidate.exists():
            return candidate
        raise FileNotFoundError(f"Scenario {name_or_path} not found")

    def read_json(self, name_or_path: Union[str, Path]) -> Dict[str, Any]:
        file_path = self.resolve(name_or_path)
        with open(file_path, "r", encoding="utf-8") as f:
            try:
                return json.load(f)
            except json.JSONDecodeError as exc:
                raise ScenarioConfigError(f"{file_path}: invalid JSON ({exc.msg})",
                                          [f"line {exc.lineno}"]) from exc

    def validate(self, data: Dict[str, Any], model: Type[M]) -> M:
        """Validate a raw config; pydantic errors become ScenarioConfigError with field paths."""
        try:
            parsed = model.model_validate(data)
        except ValidationError as exc:
            raise ScenarioConfigError(_summary(exc), _error_paths(exc)) from exc
        if parsed.schema_version != config.SCHEMA_VERSION:
            raise ScenarioConfigError(
                f"schema_version {parsed.schema_version} is not supported", ["schema_version"])
        return parsed

    def load_scenario(self, name_or_path: Union[str, Path]) -> ScenarioConfig:
        scenario = self.validate(self.read_json(name_or_path), ScenarioConfig)
        self.check_buildable(scenario)
        return scenario

    def load_probe(self, name_or_path: Union[str, Path]) -> ProbeConfig:
        probe = self.validate(self.read_json(name_or_path), ProbeConfig)
        self.check_probe_buildable(probe)
        return probe

    def check_buildable(self, scenario: ScenarioConfig) -> None:
        """Evaluate every generator for n up to the horizon; raises ScenarioConfigError."""
        builder = ScenarioBuilder(build_norm(scenario.norm))
        if scenario.sequence is not None:
            builder.set_sequence(scenario.sequence, scenario.horizon, scenario.tail_samples)
        if scenario.functionals is not None:
            builder.functional_sequence(scenario.functionals, scenario.horizon,
                                        scenario.tail_samples)
        for k, family in enumerate(scenario.families):
            builder.family(family, f"families.{k}")

    def check_probe_buildable(self, probe: ProbeConfig) -> None:
        builder = ScenarioBuilder(build_norm(probe.norm))
        if probe.functionals is not None:
            builder.functional_sequence(probe.functionals, probe.horizon, probe.tail_samples)
        if probe.vectors is not None:
            builder.vector_sequence(probe.vectors, probe.horizon, probe.tail_samples)
        if probe.family:
            builder.compact_family(probe.family)

    def is_probe(self, name_or_path: Union[str, Path]) -> bool:
        return "probe" in self.read_json(name_or_path)

    def list_scenarios(self) -> List[str]:
        """List all scenario and probe names."""
        if not self.scenarios_path.exists():
            return []
        return sorted(f.stem for f in self.scenarios_path.glob("*.json"))

    def save_config(self, name: str, data: Union[BaseModel, Dict[str, Any]]) -> Path:
        file_path = self.scenarios_path / f"{name}.json"
        file_path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, BaseModel):
            data = data.model_dump(mode="json", exclude_none=True)
        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, ensure_ascii=False)
            f.write("\n")
        return file_path

    # ------------------------------------------------------------------
    # Reports
    # ------------------------------------------------------------------

    def report_json(self, report: Report) -> str:
        return json.dumps(report.model_dump(mode="json"), indent=2, ensure_ascii=False) + "\n"

    def reports_json(self, reports: List[Report]) -> str:
        data = [r.model_dump(mode="json") for r in reports]
        return json.dumps(data, indent=2, ensure_ascii=False) + "\n"

    def parse_report(self, text: str) -> Report:
        return Report.model_validate_json(text)

    def save_report(self, report: Union[Report, List[Report]], path: Union[str, Path]) -> Path:
        file_path = Path(path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        text = self.reports_json(report) if isinstance(report, list) else self.report_json(report)
        with open(file_path, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info("report written to %s", file_path)
        return file_path

    def write_trace_csv(self, reports: Union[Report, List[Report]], path: Union[str, Path]) -> Path:
        """One row per cell; several reports get their scenario name as object_id prefix."""
        tagged = isinstance(reports, list)
        reports = reports if tagged else [reports]
        file_path = Path(path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(TRACE_COLUMNS)
            rows = 0
            for report in reports:
                prefix = f"{report.scenario}/" if tagged else ""
                for row in report.traces:
                    writer.writerow([row.n, prefix + row.object_id, row.value])
                    rows += 1
        logger.info("%d trace rows written to %s", rows, file_path)
        return file_path


# Global service instance
scenario_service = ScenarioService()
