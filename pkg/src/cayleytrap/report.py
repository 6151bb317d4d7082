"""Rendering of exploration reports as JSON or a short text summary."""

from __future__ import annotations

import json
import math

from .groups import GroupBackend
from .simulator import ExplorationReport

REPORT_FIELDS = (
    "verdict", "U", "T_state", "T_quotient", "T_pair",
    "holonomy", "holonomy_order", "visited_count", "steps_used",
)


def report_to_dict(report: ExplorationReport, backend: GroupBackend) -> dict:
    order = report.holonomy_order
    if order == math.inf:
        order = "infinite"
    return {
        "verdict": str(report.verdict),
        "U": report.U,
        "T_state": report.T_state,
        "T_quotient": report.T_quotient,
        "T_pair": report.T_pair,
        "holonomy": None if report.holonomy is None else backend.render(report.holonomy),
        "holonomy_order": order,
        "visited_count": report.visited_count,
        "steps_used": report.steps_used,
    }


def emit_report(report: ExplorationReport, backend: GroupBackend, format: str = "text") -> str:
    d = report_to_dict(report, backend)
    if format == "json":
        return json.dumps(d, separators=(", ", ": "))
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")

    def show(v):
        return "-" if v is None else str(v)

    lines = [f"verdict: {d['verdict']}"]
    if d["U"] is not None:
        lines.append(
            f"preperiod U={d['U']}, state period {show(d['T_state'])}, "
            f"quotient period {show(d['T_quotient'])}, pair period {show(d['T_pair'])}"
        )
        lines.append(f"holonomy {show(d['holonomy'])} of order {show(d['holonomy_order'])}")
    if report.verdict.value == "FiniteExploration":
        lines.append(f"visited vertices: {d['visited_count']}")
    elif report.verdict.value == "DriftUnbounded":
        lines.append(f"vertices visited before the drift repeats: {d['visited_count']}")
    lines.append(f"steps evaluated: {d['steps_used']}")
    return "\n".join(lines)
