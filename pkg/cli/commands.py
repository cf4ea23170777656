# commands.py – argparse front end: simulate, train, compare, sweep

from __future__ import annotations

import argparse
import itertools
import json
import logging
import os
from pathlib import Path
from typing import Any, Sequence

import yaml
from dotenv import load_dotenv

from policy.orchestrator import PolicyBinding, parse_policy
from policy.views import PolicyKind
from report.console import render_comparison, render_report
from report.emit import UnknownFormatError, emit, normalize_format
from report.metrics import compare, compute_metrics
from report.views import MetricsReport
from rl.agent import DQNAgent
from rl.agent import train as train_agent
from rl.serialization import load_agent, save_agent
from rl.views import AgentConfig
from sim.engine import SimulationEnvironment, replicate
from sim.scenario import UnknownGridKeyError, check_override_keys, load_scenario, with_overrides
from sim.trace_io import write_trace_csv, write_trace_ndjson
from sim.views import ScenarioSpec, TraceEvent
from utils.logging_config import RESULT, setup_logging
from utils.utils import log_error, log_json_block, log_step, save_json, save_text

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2

DEFAULT_SCENARIO = Path("config/scenarios/smart-city.json")
DEFAULT_AGENT_CONFIG = Path("config/agent_config.yaml")
DEFAULT_PROFILE = Path("config/profiles.yaml")
DEFAULT_COMPARE_POLICIES = ("cloud-only", "static", "fog-centric", "rl-hipa")
EXTENSIONS = {"csv": "csv", "json": "json", "markdown": "md"}

PRECEDENCE = (
    "Settings resolve as: command-line flags > config files (scenario JSON, "
    "config/profiles.yaml, config/agent_config.yaml) > built-in defaults. "
    "OFFLOAD_OUTPUT_DIR sets the default output directory."
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


# ---------------------------------------------------------------------------
# Config resolution
# ---------------------------------------------------------------------------


def load_profile(path: Path) -> dict[str, Any]:
    """The `run` section of a profile file plus `output.base_dir`; {} when the default file is absent."""
    if not path.is_file():
        if path != DEFAULT_PROFILE:
            raise UsageError(f"profile not found: {path}")
        return {}
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    profile = dict(data.get("run") or {})
    profile["base_dir"] = (data.get("output") or {}).get("base_dir")
    return profile


def load_agent_config(path: Path, overrides: dict[str, Any] | None = None) -> AgentConfig:
    data: dict[str, Any] = {}
    if path.is_file():
        with open(path, "r", encoding="utf-8") as f:
            data = dict((yaml.safe_load(f) or {}).get("dqn") or {})
    elif path != DEFAULT_AGENT_CONFIG:
        raise UsageError(f"agent config not found: {path}")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return AgentConfig.model_validate(data)


def _output_dir(args: argparse.Namespace, profile: dict[str, Any]) -> Path:
    if args.out is not None:
        return Path(args.out)
    base = os.getenv("OFFLOAD_OUTPUT_DIR") or profile.get("base_dir") or "output"
    return Path(base) / args.command


def _format(args: argparse.Namespace, profile: dict[str, Any]) -> str:
    try:
        return normalize_format(args.format or profile.get("format") or "markdown")
    except UnknownFormatError as e:
        raise UsageError(str(e)) from e


def _flag_or_profile(value: Any, profile: dict[str, Any], key: str, default: Any) -> Any:
    if value is not None:
        return value
    found = profile.get(key)
    return default if found is None else found


def _policy(name: str) -> PolicyKind:
    try:
        return parse_policy(name)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _scenario(args: argparse.Namespace, profile: dict[str, Any], **flags: Any) -> ScenarioSpec:
    overrides = {key: value for key, value in flags.items() if value is not None}
    threshold = _flag_or_profile(args.overload_threshold, profile, "overload_threshold", None)
    if threshold is not None:
        overrides["overload_threshold"] = threshold
    return load_scenario(args.scenario, overrides)


def _binding(kind: PolicyKind, agent: DQNAgent | None, online_learning: bool) -> PolicyBinding:
    if kind is PolicyKind.RL:
        return PolicyBinding(kind, agent=agent, online_learning=online_learning)
    return PolicyBinding(kind)


def _evaluate(
    scenario: ScenarioSpec, binding: PolicyBinding, parallel: bool
) -> tuple[list[list[TraceEvent]], MetricsReport]:
    traces = replicate(scenario, binding, parallel=parallel)
    report = compute_metrics(traces, binding.name, scenario.duration, scenario.name)
    return traces, report


def _train(scenario: ScenarioSpec, cfg: AgentConfig, progress: bool):
    log_step(
        f"Training DQN: {cfg.episodes} episodes × {cfg.tasks_per_episode} tasks on {scenario.name}",
        symbol="🧠",
    )
    env = SimulationEnvironment(scenario, tasks_per_episode=cfg.tasks_per_episode, seed=cfg.seed)
    return train_agent(env, cfg, progress=progress)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace, profile: dict[str, Any]) -> int:
    kind = _policy(args.policy)
    if kind is PolicyKind.RL and args.agent is None:
        raise UsageError("--policy rl-hipa needs --agent PATH (write one with `main.py train`)")
    fmt = _format(args, profile)
    parallel = bool(_flag_or_profile(args.parallel, profile, "parallel", False))
    online = bool(_flag_or_profile(args.online_learning, profile, "online_learning", False))

    scenario = _scenario(args, profile, seed=args.seed, replications=args.replications)
    agent = load_agent(args.agent) if kind is PolicyKind.RL else None
    binding = _binding(kind, agent, online)
    out = _output_dir(args, profile)

    log_step(
        f"Simulating {binding.name} on {scenario.name} ({scenario.replications} replications)",
        {"seed": scenario.seed, "tasks": scenario.task_count, "parallel": parallel, "format": fmt},
        symbol="🚦",
    )
    traces, report = _evaluate(scenario, binding, parallel)
    for i, events in enumerate(traces):
        write_trace_csv(events, out / f"trace-{i:02d}.csv")
        write_trace_ndjson(events, out / f"trace-{i:02d}.ndjson")
    save_text(emit(report, fmt), out / f"report-{binding.name}.{EXTENSIONS[fmt]}")

    render_report(report)
    logger.log(RESULT, "%s: mean latency %.3f ms, edge share %.1f%%", binding.name, report.mean_latency_ms, report.edge_share)
    return EXIT_OK


def cmd_train(args: argparse.Namespace, profile: dict[str, Any]) -> int:
    cfg = load_agent_config(
        args.agent_config,
        {
            "episodes": args.episodes,
            "seed": args.seed,
            "tasks_per_episode": args.tasks_per_episode,
            "learning_rate": args.learning_rate,
        },
    )
    log_json_block("Agent config", cfg.model_dump(mode="json"))
    scenario = _scenario(args, profile)
    out = _output_dir(args, profile)

    result = _train(scenario, cfg, progress=args.progress)
    agent_path = Path(args.agent_out) if args.agent_out else out / "agent.odqn"
    save_agent(result.agent, agent_path)
    curve = "episode,mean_reward\n" + "".join(f"{i},{value!r}\n" for i, value in enumerate(result.learning_curve))
    save_text(curve, agent_path.with_name(agent_path.stem + "-curve.csv"))

    logger.log(
        RESULT,
        "trained %d episodes; final mean reward %.4f",
        cfg.episodes,
        result.learning_curve[-1],
    )
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, profile: dict[str, Any]) -> int:
    kinds = [_policy(name) for name in args.policies]
    names = [kind.value for kind in kinds]
    if len(set(names)) != len(names):
        raise UsageError(f"--policies lists a policy twice: {', '.join(names)}")
    baseline = _policy(args.baseline).value
    if baseline not in names:
        raise UsageError(f"--baseline {baseline} is not among --policies ({', '.join(names)})")
    fmt = _format(args, profile)
    parallel = bool(_flag_or_profile(args.parallel, profile, "parallel", False))
    online = bool(_flag_or_profile(args.online_learning, profile, "online_learning", False))

    scenario = _scenario(args, profile, seed=args.seed, replications=args.replications)
    out = _output_dir(args, profile)

    agent = None
    if PolicyKind.RL in kinds:
        if args.agent is not None:
            agent = load_agent(args.agent)
        else:
            cfg = load_agent_config(args.agent_config, {"episodes": args.train_episodes})
            agent = _train(scenario, cfg, progress=args.progress).agent

    reports = []
    for kind in kinds:
        binding = _binding(kind, agent, online)
        log_step(f"Running {binding.name} ({scenario.replications} replications)", symbol="🚦")
        try:
            _, report = _evaluate(scenario, binding, parallel)
        except Exception as e:
            raise RuntimeError(f"policy {binding.name} failed on scenario {scenario.name}: {e}") from e
        save_text(emit(report, fmt), out / f"report-{binding.name}.{EXTENSIONS[fmt]}", quiet=True)
        reports.append(report)

    comparison = compare(reports, baseline)
    save_text(emit(comparison, fmt), out / f"comparison.{EXTENSIONS[fmt]}")
    render_comparison(comparison)
    return EXIT_OK


def parse_grid_value(text: str) -> Any:
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_grid(items: Sequence[str]) -> dict[str, list[Any]]:
    """['task_count=500,5000', ...] -> {'task_count': [500, 5000], ...}"""
    grid: dict[str, list[Any]] = {}
    for item in items:
        key, sep, values = item.partition("=")
        key = key.strip()
        if not sep or not key or not values.strip():
            raise UsageError(f"--grid expects key=v1,v2,..., got '{item}'")
        if key in grid:
            raise UsageError(f"--grid key '{key}' given twice")
        grid[key] = [parse_grid_value(v) for v in values.split(",")]
    return grid


def grid_cells(grid: dict[str, list[Any]]) -> list[dict[str, Any]]:
    """Cartesian product in key order; an empty grid is one cell with no overrides."""
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def cmd_sweep(args: argparse.Namespace, profile: dict[str, Any]) -> int:
    kind = _policy(args.policy)
    if kind is PolicyKind.RL and args.agent is None:
        raise UsageError("--policy rl-hipa needs --agent PATH (write one with `main.py train`)")
    grid = parse_grid(args.grid or [])
    fmt = _format(args, profile)
    parallel = bool(_flag_or_profile(args.parallel, profile, "parallel", False))
    online = bool(_flag_or_profile(args.online_learning, profile, "online_learning", False))

    scenario = _scenario(args, profile, seed=args.seed, replications=args.replications)
    try:
        check_override_keys(scenario, list(grid))
    except UnknownGridKeyError as e:
        raise UsageError(str(e)) from e

    agent = load_agent(args.agent) if kind is PolicyKind.RL else None
    binding = _binding(kind, agent, online)
    out = _output_dir(args, profile)
    cells = grid_cells(grid)
    if grid:
        log_json_block("Grid", grid)
    log_step(f"Sweeping {len(cells)} cell(s) with {binding.name}", symbol="🧮")

    index = []
    for i, overrides in enumerate(cells):
        spec = with_overrides(scenario, overrides)
        _, report = _evaluate(spec, binding, parallel)
        name = f"cell-{i:03d}.{EXTENSIONS[fmt]}"
        save_text(emit(report, fmt), out / name, quiet=True)
        index.append(
            {
                "cell": i,
                "overrides": overrides,
                "report": name,
                "mean_latency_ms": report.mean_latency_ms,
                "bandwidth_gb_per_hour": report.bandwidth_gb_per_hour,
                "energy_kwh": report.energy_kwh,
            }
        )
        logger.info("cell %d %s: mean latency %.3f ms", i, overrides, report.mean_latency_ms)

    save_json({"policy": binding.name, "scenario": scenario.name, "grid": grid, "cells": index}, out / "index.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common(sub: argparse.ArgumentParser, *, replications: bool = True, fmt: bool = True) -> None:
    sub.add_argument("--scenario", type=Path, default=DEFAULT_SCENARIO, help="scenario JSON file")
    sub.add_argument("--seed", type=int, default=None, help="override the scenario (or agent) seed")
    sub.add_argument("--out", type=Path, default=None, help="output directory")
    sub.add_argument("--profile", type=Path, default=DEFAULT_PROFILE, help="run profile YAML")
    sub.add_argument("--overload-threshold", type=float, default=None, help="reroute above this utilization")
    if replications:
        sub.add_argument("--replications", type=_positive_int, default=None)
        sub.add_argument(
            "--parallel", action=argparse.BooleanOptionalAction, default=None, help="run replications on threads"
        )
        sub.add_argument(
            "--online-learning",
            action=argparse.BooleanOptionalAction,
            default=None,
            help="let rl-hipa keep learning from its own decisions",
        )
    if fmt:
        sub.add_argument("--format", default=None, help="report format: csv, json or markdown")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="main.py",
        description="Edge/fog/cloud task-offloading simulator.",
        epilog=PRECEDENCE,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    simulate = subparsers.add_parser("simulate", help="run one policy over a scenario", epilog=PRECEDENCE)
    _common(simulate)
    simulate.add_argument("--policy", required=True, help=", ".join(k.value for k in PolicyKind))
    simulate.add_argument("--agent", type=Path, default=None, help="trained agent file (rl-hipa)")
    simulate.set_defaults(handler=cmd_simulate)

    train = subparsers.add_parser("train", help="train the DQN agent", epilog=PRECEDENCE)
    _common(train, replications=False, fmt=False)
    train.add_argument("--agent-config", type=Path, default=DEFAULT_AGENT_CONFIG)
    train.add_argument("--episodes", type=_positive_int, default=None)
    train.add_argument("--tasks-per-episode", type=_positive_int, default=None)
    train.add_argument("--learning-rate", type=float, default=None)
    train.add_argument("--agent-out", type=Path, default=None, help="agent file path (default OUT/agent.odqn)")
    train.add_argument("--progress", action=argparse.BooleanOptionalAction, default=True)
    train.set_defaults(handler=cmd_train)

    comp = subparsers.add_parser("compare", help="run several policies on common seeds", epilog=PRECEDENCE)
    _common(comp)
    comp.add_argument("--policies", nargs="+", default=list(DEFAULT_COMPARE_POLICIES))
    comp.add_argument("--baseline", default=PolicyKind.CLOUD_ONLY.value)
    comp.add_argument("--agent", type=Path, default=None, help="trained agent; trained on the fly when absent")
    comp.add_argument("--agent-config", type=Path, default=DEFAULT_AGENT_CONFIG)
    comp.add_argument("--train-episodes", type=_positive_int, default=None)
    comp.add_argument("--progress", action=argparse.BooleanOptionalAction, default=False)
    comp.set_defaults(handler=cmd_compare)

    sweep = subparsers.add_parser("sweep", help="run one policy over a parameter grid", epilog=PRECEDENCE)
    _common(sweep)
    sweep.add_argument("--policy", default=PolicyKind.THRESHOLD.value)
    sweep.add_argument("--agent", type=Path, default=None)
    sweep.add_argument("--grid", action="append", metavar="KEY=V1,V2", help="dotted scenario key and values")
    sweep.set_defaults(handler=cmd_sweep)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        profile = load_profile(args.profile)
        return args.handler(args, profile)
    except UsageError as e:
        log_error("Usage error", e, EXIT_USAGE)
        return EXIT_USAGE
    except Exception as e:
        log_error(type(e).__name__, e, EXIT_FAILURE)
        logger.debug("command failed", exc_info=True)
        return EXIT_FAILURE
