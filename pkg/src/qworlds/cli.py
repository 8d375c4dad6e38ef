"""Command-line runner: `qworlds run <scenario>`, `qworlds list`.

Exit codes are stable: 0 success, 2 unknown scenario or usage error,
3 invalid parameters or config, 4 trajectory-integration failure.
Flags override config-file values; a config file holds flat
``key = value`` lines using the same names as the flags.
"""
from __future__ import annotations

import argparse
import os
import sys
import time

from . import __version__
from . import engines
from . import reporting
from .scenarios import (
    REGISTRY,
    IntegratorError,
    ScenarioError,
    ScenarioSpec,
    UnknownScenarioError,
    resolve,
)

EXIT_OK = 0
EXIT_UNKNOWN_SCENARIO = 2
EXIT_INVALID_PARAMETERS = 3
EXIT_INTEGRATOR_FAILURE = 4

# flag name -> parser for config-file and CLI string values
_PARSERS = {
    "mode": str,
    "collapse_stage": str,
    "alpha": complex,
    "beta": complex,
    "mu": float,
    "trials": int,
    "seed": int,
    "env_bits": int,
    "marker": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "dt": float,
    "t_max": float,
    "x_init": float,
    "out": str,
    "csv_dir": str,
    "scenario": str,
}


def read_config(path: str) -> dict:
    """Flat key = value text; '#' starts a comment; unknown keys rejected."""
    values: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ScenarioError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in _PARSERS:
            raise ScenarioError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ScenarioError(f"{path}:{lineno}: bad value for {key!r}: {value}") from exc
    return values


def parse_config(scenario: str, flags: dict, config_path: str | None = None) -> ScenarioSpec:
    """Resolve a scenario spec: config file first, explicit flags override."""
    merged: dict = {}
    if config_path:
        merged.update(read_config(config_path))
    file_scenario = merged.pop("scenario", None)
    if file_scenario is not None and file_scenario != scenario:
        raise ScenarioError(
            f"config names scenario {file_scenario!r} but {scenario!r} was requested"
        )
    for key, value in flags.items():
        if value is not None:
            merged[key] = value
    return resolve(scenario, merged)


def run_scenario(spec: ScenarioSpec) -> reporting.ScenarioReport:
    """Execute one resolved spec, write its sidecar files and report."""
    definition = REGISTRY[spec.scenario]
    started = time.perf_counter()
    results = definition.runner(spec)

    files: list[str] = []
    if definition.bohm:
        trajectory = results.pop("trajectory")
        results = results["record"]
        csv_dir = spec.csv_dir or (os.path.dirname(spec.out) if spec.out else "")
        csv_path = os.path.join(csv_dir, f"{spec.scenario}_trajectory.csv")
        reporting.write_trajectory_csv(csv_path, trajectory)
        files.append(csv_path)

    report = reporting.ScenarioReport(
        spec=spec,
        results=results,
        tool_version=__version__,
        files=tuple(files),
        wall_clock_s=time.perf_counter() - started,
        rng=engines.RNG_NAME,
    )
    if spec.out:
        directory = os.path.dirname(spec.out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(spec.out, "w", encoding="utf-8") as handle:
            handle.write(report.render())
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qworlds",
        description="interferometer thought experiments under interchangeable engines",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"qworlds {__version__} (report format {reporting.REPORT_FORMAT})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="print the scenario registry")

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("scenario")
    run.add_argument("--mode", choices=("mwi", "collapse"), default=None)
    run.add_argument("--collapse-stage", choices=("detector", "observer"),
                     dest="collapse_stage", default=None)
    run.add_argument("--alpha", default=None)
    run.add_argument("--beta", default=None)
    run.add_argument("--mu", default=None)
    run.add_argument("--trials", default=None)
    run.add_argument("--seed", default=None)
    run.add_argument("--env-bits", dest="env_bits", default=None)
    run.add_argument("--marker", action="store_const", const=True, default=None)
    run.add_argument("--dt", default=None)
    run.add_argument("--t-max", dest="t_max", default=None)
    run.add_argument("--x-init", dest="x_init", default=None)
    run.add_argument("--out", default=None)
    run.add_argument("--csv-dir", dest="csv_dir", default=None)
    run.add_argument("--config", default=None)
    return parser


def _collect_flags(args: argparse.Namespace) -> dict:
    flags = {}
    for key, parse in _PARSERS.items():
        if key == "scenario":
            continue
        raw = getattr(args, key, None)
        if raw is None:
            flags[key] = None
        elif isinstance(raw, str):
            try:
                flags[key] = parse(raw)
            except ValueError as exc:
                raise ScenarioError(f"bad value for --{key.replace('_', '-')}: {raw}") from exc
        else:
            flags[key] = raw
    return flags


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "list":
        for name in REGISTRY:
            print(f"{name:20s} {REGISTRY[name].description}")
        return EXIT_OK

    try:
        spec = parse_config(args.scenario, _collect_flags(args), args.config)
        report = run_scenario(spec)
    except UnknownScenarioError as exc:
        print(f"error: unknown scenario {exc.args[0]!r} (try `qworlds list`)", file=sys.stderr)
        return EXIT_UNKNOWN_SCENARIO
    except (ScenarioError, engines.EngineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_PARAMETERS
    except IntegratorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR_FAILURE

    if not spec.out:
        sys.stdout.write(report.render())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
