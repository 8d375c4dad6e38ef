"""Deterministic report rendering and CSV sidecar output.

A report is a nested record flattened to dotted `key = value` lines in
insertion order, so identical resolved runs produce byte-identical text
except for the wall-clock line.  Trajectory bulk data goes to CSV files
(header ``t,x,v,density``, full double precision) referenced by path.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

REPORT_FORMAT = 1
WALL_CLOCK_KEY = "wall_clock_s"


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    if isinstance(value, complex):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(format_value(v) for v in value)
    return str(value)


def flatten(record: dict, prefix: str = "") -> list[str]:
    lines: list[str] = []
    for key, value in record.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.extend(flatten(value, prefix=f"{path}."))
        elif isinstance(value, (list, tuple)) and any(isinstance(v, dict) for v in value):
            for i, item in enumerate(value):
                lines.extend(flatten(item, prefix=f"{path}.{i}."))
        else:
            lines.append(f"{path} = {format_value(value)}")
    return lines


@dataclass
class ScenarioReport:
    spec: object                  # resolved ScenarioSpec
    results: dict
    tool_version: str
    files: tuple = ()
    wall_clock_s: float = 0.0
    rng: str = ""

    def render(self) -> str:
        record: dict = {
            "tool": "qworlds",
            "version": self.tool_version,
            "report_format": REPORT_FORMAT,
        }
        record["spec"] = self.spec.as_record()
        if self.rng:
            record["rng"] = self.rng
        record["results"] = self.results
        if self.files:
            record["files"] = {str(i): f for i, f in enumerate(self.files)}
        lines = flatten(record)
        lines.append(f"{WALL_CLOCK_KEY} = {self.wall_clock_s!r}")
        return "\n".join(lines) + "\n"


def strip_wall_clock(text: str) -> str:
    """Comparison helper: drop the single nondeterministic line."""
    return "\n".join(
        line for line in text.splitlines() if not line.startswith(WALL_CLOCK_KEY + " ")
    ) + "\n"


def write_trajectory_csv(path: str, trajectory) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("t,x,v,density\n")
        for t, x, v, rho in zip(trajectory.t, trajectory.x, trajectory.v, trajectory.density):
            handle.write(f"{float(t)!r},{float(x)!r},{float(v)!r},{float(rho)!r}\n")
