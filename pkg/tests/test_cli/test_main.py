# tests/test_cli/test_main.py
import json

import pytest

from convlab.main import EXIT_CONFIG_ERROR, EXIT_MATCHED, EXIT_MISMATCH, build_parser, main


def _error_payload(stderr: str) -> dict:
    """The JSON error object is the last line written to stderr"""
    return json.loads(stderr.strip().splitlines()[-1])


class TestParser:
    """Test the argument parser"""

    def test_command_required(self):
        """Should exit when no subcommand is given"""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_output_options(self):
        """Should accept output options on run"""
        args = build_parser().parse_args(["-vv", "run", "x.json", "--output", "r.json", "--timing"])
        assert args.verbose == 2
        assert args.output == "r.json"
        assert args.timing is True
        assert args.trace_csv is None


class TestMain:
    """Test exit codes and outputs"""

    def test_run_matched(self, write_config, sample_scenario, capsys):
        """Should print the report and exit 0"""
        write_config(sample_scenario)
        assert main(["run", "sample"]) == EXIT_MATCHED
        report = json.loads(capsys.readouterr().out)
        assert report["scenario"] == "sample"
        assert report["verdicts"][0]["status"] == "supported"

    def test_run_mismatch(self, write_config, sample_scenario):
        """Should exit 1 when a verdict contradicts its expectation"""
        sample_scenario["checks"][0]["expect"] = "refuted"
        write_config(sample_scenario)
        assert main(["run", "sample"]) == EXIT_MISMATCH

    def test_run_dispatches_probes(self, write_config, sample_probe, capsys):
        """Should run a probe file given to run"""
        write_config(sample_probe)
        assert main(["run", "sample_probe"]) == EXIT_MATCHED
        assert json.loads(capsys.readouterr().out)["probes"][0]["status"] == "fail"

    def test_output_files(self, write_config, sample_scenario, tmp_path, capsys):
        """Should write the report and trace files instead of stdout"""
        write_config(sample_scenario)
        out, trace = tmp_path / "report.json", tmp_path / "trace.csv"
        assert main(["run", "sample", "--output", str(out), "--trace-csv", str(trace)]) == EXIT_MATCHED
        assert capsys.readouterr().out == ""
        assert json.loads(out.read_text(encoding="utf-8"))["matched"] is True
        assert trace.read_text(encoding="utf-8").startswith("n,object_id,value")

    def test_config_error(self, write_config, sample_scenario, capsys):
        """Should exit 2 with the offending field paths on stderr"""
        sample_scenario["horizon"] = 2
        write_config(sample_scenario)
        assert main(["run", "sample"]) == EXIT_CONFIG_ERROR
        payload = _error_payload(capsys.readouterr().err)
        assert payload["success"] is False
        assert "horizon" in payload["paths"]

    def test_missing_config(self, temp_db, capsys):
        """Should exit 2 for a missing file"""
        assert main(["run", "missing"]) == EXIT_CONFIG_ERROR
        assert "not found" in _error_payload(capsys.readouterr().err)["error"]

    def test_unknown_builtin(self, capsys):
        """Should exit 2 for an unknown built-in"""
        assert main(["repro", "nope"]) == EXIT_CONFIG_ERROR
        assert "unknown built-in" in _error_payload(capsys.readouterr().err)["error"]

    def test_repro(self, capsys):
        """Should run one built-in"""
        assert main(["repro", "ell1_tau_pass"]) == EXIT_MATCHED
        assert json.loads(capsys.readouterr().out)["probes"][0]["status"] == "pass"

    def test_list_builtins(self, capsys):
        """Should print one tab-separated line per built-in"""
        assert main(["list-builtins"]) == EXIT_MATCHED
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 10
        assert lines[0].startswith("prop21b_Y\t")

    def test_list_scenarios(self, write_config, sample_scenario, capsys):
        """Should print the scenario names"""
        write_config(sample_scenario)
        assert main(["list-scenarios"]) == EXIT_MATCHED
        assert capsys.readouterr().out.splitlines() == ["sample"]
