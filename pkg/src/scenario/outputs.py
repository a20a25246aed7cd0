"""File emission of a RunLog: trajectory and verdict tables, text report, config echo."""
import csv
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from src.schemas.run import ExperimentSummary
from src.schemas.verdict import PerformanceReportModel

logger = logging.getLogger(__name__)

TRAJECTORIES_FILE = "trajectories.csv"
VERDICTS_FILE = "verdicts.csv"
REPORT_FILE = "report.txt"
CONFIG_FILE = "config.json"
SUMMARY_FILE = "summary.json"

VERDICT_COLUMNS = ["detector", "k0", "statistic", "threshold", "decision", "polarity", "branch"]


def _num(value: float) -> str:
    return f"{float(value):.17g}"


def trajectory_columns(m: int, p: int) -> list[str]:
    """Column order of trajectories.csv for m inputs and p outputs."""
    return (
        ["k", "t"]
        + [f"u{i + 1}" for i in range(m)]
        + [f"y{i + 1}" for i in range(p)]
        + [f"ry{i + 1}" for i in range(p)]
        + [f"ru{i + 1}" for i in range(m)]
        + [f"ryu{i + 1}" for i in range(p)]
        + ["J_rel"]
    )


def _open(path: Path):
    return open(path, "w", encoding="utf-8", newline="")


def write_trajectories(log, path: Path) -> Path:
    m, p = log.u.shape[1], log.y.shape[1]
    t = log.t
    with _open(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(trajectory_columns(m, p))
        for i in range(log.steps):
            row = [str(int(log.k[i])), _num(t[i])]
            for block in (log.u, log.y, log.r_y, log.r_u, log.r_yu):
                row.extend(_num(v) for v in block[i])
            row.append(_num(log.J_rel[i]))
            writer.writerow(row)
    return path


def write_verdicts(log, path: Path) -> Path:
    with _open(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(VERDICT_COLUMNS)
        for v in log.verdicts:
            writer.writerow([
                v.detector,
                v.k0,
                _num(v.statistic),
                _num(v.threshold),
                v.decision.value,
                v.polarity.value,
                v.branch or "",
            ])
    return path


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return json.dumps(np.asarray(value, dtype=float).round(12).tolist())
    return str(value)


def _section(title: str, body: dict) -> list[str]:
    lines = [f"[{title}]"]
    for key in sorted(body):
        lines.append(f"{key} = {_format_value(body[key])}")
    return lines


def render_report(log) -> str:
    """Plain-text report: run header, alarm counts, performance and detector parameters."""
    lines = [
        f"run = {log.name}",
        f"architecture = {log.architecture}",
        f"seed = {log.seed}",
        f"steps = {log.steps}",
        f"Ts = {log.Ts:g}",
        "",
        "[verdicts]",
    ]
    detectors = sorted({v.detector for v in log.verdicts})
    for name in detectors:
        rate, n = log.alarm_rate(name)
        lines.append(f"{name}: {n} verdicts, alarm rate {rate:.6f}")
    if not detectors:
        lines.append("none")

    reports = log.reports
    if "performance" in reports:
        lines += ["", "[performance]", PerformanceReportModel(**reports["performance"]).to_text()]
    for key in ("psi_margin", "llr", "pdd"):
        if key in reports:
            lines += [""] + _section(key, reports[key])
    for event in reports.get("reconfigurations", []):
        body = dict(event)
        step = body.pop("step")
        lines += ["", f"[reconfiguration at step {step}]", PerformanceReportModel(**body).to_text()]
    return "\n".join(lines) + "\n"


def write_report(log, path: Path) -> Path:
    with _open(path) as fh:
        fh.write(render_report(log))
    return path


def write_config(log, path: Path) -> Path:
    with _open(path) as fh:
        json.dump(log.config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_summary(summary: ExperimentSummary, path: Path) -> Path:
    tree = summary.model_dump(mode="json")
    tree["passed"] = summary.passed
    with _open(path) as fh:
        json.dump(tree, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def emit_outputs(log, directory: str | Path, summary: ExperimentSummary | None = None) -> dict[str, Path]:
    """Write every table and report of ``log`` into ``directory``.

    Re-emitting the same log gives byte-identical files. I/O errors are
    not caught.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "trajectories": write_trajectories(log, out / TRAJECTORIES_FILE),
        "verdicts": write_verdicts(log, out / VERDICTS_FILE),
        "report": write_report(log, out / REPORT_FILE),
        "config": write_config(log, out / CONFIG_FILE),
    }
    if summary is not None:
        files["summary"] = write_summary(summary, out / SUMMARY_FILE)
    logger.info(f"Wrote {len(files)} output files for '{log.name}' to {out}")
    return files
