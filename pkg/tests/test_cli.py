from __future__ import annotations

import json

from socmatrix.cli import EXIT_OK, EXIT_REPLAY, EXIT_VALIDATION, main

from conftest import CAMPUS, VALUE_LAB


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestRunCommand:
    def test_run_writes_log_and_state(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys, "run", "--scenario", str(CAMPUS), "--ticks", "20",
            "--seed", "7", "--out", str(tmp_path),
        )
        assert code == EXIT_OK
        summary = json.loads(out)
        assert (tmp_path / "events.ndjson").exists()
        state = json.loads((tmp_path / "state.json").read_text())
        assert state["state_hash"] == summary["final_state_hash"]

    def test_run_invalid_scenario_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{}", encoding="utf-8")
        code, _, err = run_cli(
            capsys, "run", "--scenario", str(bad), "--ticks", "1",
            "--seed", "1", "--out", str(tmp_path / "out"),
        )
        assert code == EXIT_VALIDATION
        assert "validation error" in err


class TestReplayCommand:
    def test_replay_round_trip(self, capsys, tmp_path):
        _, out, _ = run_cli(
            capsys, "run", "--scenario", str(CAMPUS), "--ticks", "15",
            "--seed", "3", "--out", str(tmp_path),
        )
        run_summary = json.loads(out)
        code, out, _ = run_cli(capsys, "replay", "--log", str(tmp_path / "events.ndjson"))
        assert code == EXIT_OK
        assert json.loads(out)["final_state_hash"] == run_summary["final_state_hash"]

    def test_flipped_byte_exits_3(self, capsys, tmp_path):
        run_cli(capsys, "run", "--scenario", str(CAMPUS), "--ticks", "5",
                "--seed", "3", "--out", str(tmp_path))
        log = tmp_path / "events.ndjson"
        raw = log.read_bytes()
        index = raw.index(b'"METRICS"')
        log.write_bytes(raw[:index] + b'"METRICSX' + raw[index + 9:])
        code, _, err = run_cli(capsys, "replay", "--log", str(log))
        assert code == EXIT_REPLAY
        assert "replay error" in err


class TestMetricsCommand:
    def test_metrics_summary(self, capsys, tmp_path):
        run_cli(capsys, "run", "--scenario", str(CAMPUS), "--ticks", "30",
                "--seed", "3", "--out", str(tmp_path))
        code, out, _ = run_cli(
            capsys, "metrics", "--log", str(tmp_path / "events.ndjson"),
            "--window", "10",
        )
        assert code == EXIT_OK
        body = json.loads(out)
        assert body["latest"]["sync"] == 1.0
        assert body["window"] == 10
        assert 0.0 <= body["mean"]["clustering"] <= 1.0


class TestServeCommand:
    def test_bad_addr_exits_2_before_binding(self, capsys):
        code, _, err = run_cli(
            capsys, "serve", "--scenario", str(CAMPUS), "--addr", "nonsense",
            "--seed", "1",
        )
        assert code == EXIT_VALIDATION
        assert "HOST:PORT" in err


class TestExperimentCommand:
    def test_experiment_output(self, capsys):
        code, out, _ = run_cli(
            capsys, "experiment", "--scenario", str(VALUE_LAB), "--beta", "2",
            "--ticks", "30", "--seed", "5",
        )
        assert code == EXIT_OK
        body = json.loads(out)
        assert body["efficacy"] > 0
        assert body["value"] == "social_contribution"

    def test_unknown_value_exits_2(self, capsys):
        code, _, err = run_cli(
            capsys, "experiment", "--scenario", str(VALUE_LAB), "--beta", "1",
            "--ticks", "5", "--seed", "5", "--value", "bravery",
        )
        assert code == EXIT_VALIDATION
