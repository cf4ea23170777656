import json

import pytest

from cli.commands import (
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_USAGE,
    UsageError,
    grid_cells,
    load_agent_config,
    load_profile,
    main,
    parse_grid,
)
from report.emit import parse_report_csv
from rl.serialization import load_agent
from sim.scenario import write_scenario
from sim.trace_io import read_trace_csv


@pytest.fixture
def scenario_file(tmp_path, small_city):
    spec = small_city.model_copy(update={"task_count": 60, "duration": 216.0, "replications": 2})
    return str(write_scenario(spec, tmp_path / "small.json"))


@pytest.fixture
def agent_file(tmp_path, scenario_file):
    path = tmp_path / "agent" / "agent.odqn"
    code = main(
        [
            "train",
            "--scenario", scenario_file,
            "--episodes", "3",
            "--tasks-per-episode", "5",
            "--no-progress",
            "--agent-out", str(path),
        ]
    )
    assert code == EXIT_OK
    return path


def simulate(scenario_file, out, *extra):
    return main(["simulate", "--scenario", scenario_file, "--out", str(out), *extra])


class TestSimulate:
    def test_cloud_only(self, tmp_path, scenario_file):
        out = tmp_path / "run"
        assert simulate(scenario_file, out, "--policy", "cloud-only", "--format", "csv") == EXIT_OK
        report = parse_report_csv((out / "report-cloud-only.csv").read_text())
        assert report["cloud_share"] == 100.0
        assert report["replications"] == 2
        for i in range(2):
            rows = read_trace_csv(out / f"trace-{i:02d}.csv")
            assert len(rows) == 60
            assert {row["layer"] for row in rows} == {"cloud"}
            assert len((out / f"trace-{i:02d}.ndjson").read_text().splitlines()) == 60

    def test_reruns_are_byte_identical(self, tmp_path, scenario_file):
        first, second = tmp_path / "a", tmp_path / "b"
        for out in (first, second):
            assert simulate(scenario_file, out, "--policy", "threshold-hipa", "--format", "json") == EXIT_OK
        for name in ("report-threshold-hipa.json", "trace-00.csv", "trace-01.ndjson"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_parallel_matches_sequential(self, tmp_path, scenario_file):
        seq, par = tmp_path / "seq", tmp_path / "par"
        assert simulate(scenario_file, seq, "--policy", "static", "--format", "csv") == EXIT_OK
        assert simulate(scenario_file, par, "--policy", "static", "--format", "csv", "--parallel") == EXIT_OK
        assert (seq / "report-static.csv").read_bytes() == (par / "report-static.csv").read_bytes()

    def test_flags_override_scenario(self, tmp_path, scenario_file):
        out = tmp_path / "run"
        code = simulate(scenario_file, out, "--policy", "fog-centric", "--replications", "1", "--seed", "9")
        assert code == EXIT_OK
        assert (out / "report-fog-centric.md").exists()
        assert not (out / "trace-01.csv").exists()

    def test_rl_needs_agent(self, tmp_path, scenario_file):
        assert simulate(scenario_file, tmp_path / "run", "--policy", "rl-hipa") == EXIT_USAGE

    def test_rl_with_trained_agent(self, tmp_path, scenario_file, agent_file):
        out = tmp_path / "run"
        assert simulate(scenario_file, out, "--policy", "rl-hipa", "--agent", str(agent_file)) == EXIT_OK
        assert (out / "report-rl-hipa.md").exists()

    def test_missing_agent_file(self, tmp_path, scenario_file):
        code = simulate(scenario_file, tmp_path / "run", "--policy", "rl-hipa", "--agent", str(tmp_path / "none.odqn"))
        assert code == EXIT_FAILURE

    def test_unknown_policy(self, tmp_path, scenario_file):
        assert simulate(scenario_file, tmp_path / "run", "--policy", "random") == EXIT_USAGE

    def test_unknown_format(self, tmp_path, scenario_file):
        assert simulate(scenario_file, tmp_path / "run", "--policy", "static", "--format", "xml") == EXIT_USAGE

    def test_malformed_scenario(self, tmp_path):
        broken = tmp_path / "broken.json"
        broken.write_text('{"name": "x", "duration": }', encoding="utf-8")
        assert simulate(str(broken), tmp_path / "run", "--policy", "static") == EXIT_FAILURE

    def test_bad_overload_threshold(self, tmp_path, scenario_file):
        code = simulate(scenario_file, tmp_path / "run", "--policy", "static", "--overload-threshold", "1.5")
        assert code == EXIT_FAILURE

    def test_missing_subcommand(self):
        assert main([]) == EXIT_USAGE

    def test_profile_format(self, tmp_path, scenario_file):
        profile = tmp_path / "profile.yaml"
        profile.write_text("run:\n  format: json\n", encoding="utf-8")
        out = tmp_path / "run"
        assert simulate(scenario_file, out, "--policy", "static", "--profile", str(profile)) == EXIT_OK
        assert json.loads((out / "report-static.json").read_text())["policy"] == "static"

    def test_output_dir_from_environment(self, tmp_path, scenario_file, monkeypatch):
        monkeypatch.setenv("OFFLOAD_OUTPUT_DIR", str(tmp_path / "env"))
        code = main(["simulate", "--scenario", scenario_file, "--policy", "cloud-only", "--replications", "1"])
        assert code == EXIT_OK
        assert (tmp_path / "env" / "simulate" / "report-cloud-only.md").exists()


class TestTrain:
    def test_writes_agent_and_curve(self, agent_file):
        agent = load_agent(agent_file)
        assert agent.episodes_trained == 3
        lines = agent_file.with_name("agent-curve.csv").read_text().splitlines()
        assert lines[0] == "episode,mean_reward"
        assert len(lines) == 4

    def test_same_seed_same_agent(self, tmp_path, scenario_file):
        paths = [tmp_path / f"agent-{i}.odqn" for i in range(2)]
        for path in paths:
            code = main(
                ["train", "--scenario", scenario_file, "--episodes", "2", "--tasks-per-episode", "5",
                 "--seed", "4", "--no-progress", "--agent-out", str(path)]
            )
            assert code == EXIT_OK
        assert paths[0].read_bytes() == paths[1].read_bytes()

    @pytest.mark.parametrize("value", ["0", "-3", "many"])
    def test_episodes_must_be_positive(self, tmp_path, scenario_file, value):
        code = main(["train", "--scenario", scenario_file, "--episodes", value, "--out", str(tmp_path)])
        assert code == EXIT_USAGE

    def test_missing_agent_config(self, tmp_path, scenario_file):
        code = main(
            ["train", "--scenario", scenario_file, "--agent-config", str(tmp_path / "none.yaml"), "--out", str(tmp_path)]
        )
        assert code == EXIT_USAGE

    def test_agent_config_overrides(self, tmp_path):
        path = tmp_path / "agent.yaml"
        path.write_text("dqn:\n  episodes: 7\n  batch_size: 16\n", encoding="utf-8")
        cfg = load_agent_config(path, {"episodes": 3, "learning_rate": None})
        assert cfg.episodes == 3
        assert cfg.batch_size == 16


class TestCompare:
    def test_baselines(self, tmp_path, scenario_file):
        out = tmp_path / "cmp"
        code = main(
            ["compare", "--scenario", scenario_file, "--out", str(out), "--format", "json",
             "--policies", "cloud-only", "static", "fog-centric"]
        )
        assert code == EXIT_OK
        comparison = json.loads((out / "comparison.json").read_text())
        assert comparison["baseline"] == "cloud-only"
        assert comparison["policies"] == ["cloud-only", "static", "fog-centric"]
        for row in comparison["rows"]:
            assert row["deltas"]["cloud-only"] == 0.0
        for policy in comparison["policies"]:
            assert (out / f"report-{policy}.json").exists()

    def test_trains_rl_on_the_fly(self, tmp_path, scenario_file):
        out = tmp_path / "cmp"
        code = main(
            ["compare", "--scenario", scenario_file, "--out", str(out), "--format", "csv",
             "--policies", "cloud-only", "rl-hipa", "--train-episodes", "2"]
        )
        assert code == EXIT_OK
        header = (out / "comparison.csv").read_text().splitlines()[0]
        assert header == "metric,cloud-only,rl-hipa,rl-hipa vs cloud-only (%)"

    def test_baseline_must_be_listed(self, tmp_path, scenario_file):
        code = main(
            ["compare", "--scenario", scenario_file, "--out", str(tmp_path), "--policies", "static", "fog-centric"]
        )
        assert code == EXIT_USAGE

    def test_duplicate_policy(self, tmp_path, scenario_file):
        code = main(
            ["compare", "--scenario", scenario_file, "--out", str(tmp_path), "--policies", "cloud-only", "Cloud-Only"]
        )
        assert code == EXIT_USAGE


class TestSweep:
    def test_grid(self, tmp_path, scenario_file):
        out = tmp_path / "sweep"
        code = main(
            ["sweep", "--scenario", scenario_file, "--out", str(out), "--format", "csv", "--replications", "1",
             "--grid", "task_count=20,40", "--grid", "overload_threshold=0.8,0.9"]
        )
        assert code == EXIT_OK
        index = json.loads((out / "index.json").read_text())
        assert index["policy"] == "threshold-hipa"
        assert len(index["cells"]) == 4
        assert index["cells"][0]["overrides"] == {"task_count": 20, "overload_threshold": 0.8}
        assert index["cells"][3]["overrides"] == {"task_count": 40, "overload_threshold": 0.9}
        for cell in index["cells"]:
            report = parse_report_csv((out / cell["report"]).read_text())
            assert report["mean_latency_ms"] == cell["mean_latency_ms"]

    def test_unknown_key(self, tmp_path, scenario_file):
        code = main(["sweep", "--scenario", scenario_file, "--out", str(tmp_path), "--grid", "fog.size=1,2"])
        assert code == EXIT_USAGE

    def test_invalid_cell_value(self, tmp_path, scenario_file):
        code = main(["sweep", "--scenario", scenario_file, "--out", str(tmp_path), "--grid", "task_count=0"])
        assert code == EXIT_FAILURE


class TestHelpers:
    def test_parse_grid(self):
        assert parse_grid(["task_count=500,5000", "name=a,b"]) == {"task_count": [500, 5000], "name": ["a", "b"]}
        assert parse_grid(["enforce_local_privacy=true"]) == {"enforce_local_privacy": [True]}
        with pytest.raises(UsageError, match="key=v1,v2"):
            parse_grid(["task_count"])
        with pytest.raises(UsageError, match="twice"):
            parse_grid(["a=1", "a=2"])

    def test_grid_cells(self):
        assert grid_cells({}) == [{}]
        assert grid_cells({"a": [1, 2], "b": ["x"]}) == [{"a": 1, "b": "x"}, {"a": 2, "b": "x"}]

    def test_profile_missing(self, tmp_path):
        with pytest.raises(UsageError, match="profile not found"):
            load_profile(tmp_path / "absent.yaml")

    def test_profile_sections(self, tmp_path):
        path = tmp_path / "p.yaml"
        path.write_text("run:\n  parallel: true\noutput:\n  base_dir: results\n", encoding="utf-8")
        assert load_profile(path) == {"parallel": True, "base_dir": "results"}
