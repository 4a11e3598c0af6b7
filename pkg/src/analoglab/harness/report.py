"""Running an experiment, persisting it, and checking the precision claim.

Outputs are ``<experiment>.csv`` (one row per cell) and ``<experiment>.json``
(config echo, summary, claim verdict).  Wall time is kept on the in-memory
report only, so files are byte-identical across reruns.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .config import ExperimentConfig
from .experiments import Experiment, get_experiment

__all__ = [
    "ClaimVerdict",
    "IncompleteSweep",
    "IoFailure",
    "JThreshold",
    "RunReport",
    "SCHEMA_VERSION",
    "run",
    "verify_claim",
    "write_report",
]

SCHEMA_VERSION = 1

# allowed distance, in octaves, between the measured flip and the prediction
CLAIM_WINDOW = 2.0


class IncompleteSweep(ValueError):
    pass


class IoFailure(OSError):
    pass


@dataclass(frozen=True)
class RunReport:
    config: ExperimentConfig
    columns: tuple[str, ...]
    records: list[dict[str, Any]]
    summary: dict[str, Any]
    wall_time: float = field(default=0.0, compare=False)

    @property
    def experiment(self) -> Experiment:
        return get_experiment(self.config.experiment)


@dataclass(frozen=True)
class JThreshold:
    j: int
    in_A: bool
    nu_j: int | None
    threshold: float | None
    log2_threshold: float | None
    expected_log2: float | None
    always_correct: bool
    flips: bool
    within_window: bool | None


@dataclass(frozen=True)
class ClaimVerdict:
    """Per-question thresholds and whether the claim's pattern was observed.

    ``holds`` needs every member to be wrong at some tested precision and
    right at every precision from its threshold up, with the threshold
    within :data:`CLAIM_WINDOW` octaves of the prediction, and every
    non-member to be right at every tested precision.
    """

    rows: tuple[JThreshold, ...]
    holds: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "holds": self.holds,
            "window_octaves": CLAIM_WINDOW,
            "per_j": [r.__dict__ for r in self.rows],
        }


def _correct(record: dict[str, Any]) -> bool:
    if "correct" in record:
        return bool(record["correct"])
    return bool(record["detected"]) == bool(record["in_A"])


def verify_claim(report: RunReport) -> ClaimVerdict:
    exp = report.experiment
    if exp.precision is None:
        raise IncompleteSweep(f"{exp.name} has no precision sweep")
    by_j: dict[int, list[dict[str, Any]]] = {}
    for r in report.records:
        by_j.setdefault(r["j"], []).append(r)
    if sorted(by_j) != list(range(report.config.J)):
        raise IncompleteSweep("report does not cover every j < J")
    sizes = {len(v) for v in by_j.values()}
    # a one-point sweep is complete but can never show a member's flip
    if len(sizes) != 1:
        raise IncompleteSweep("every j needs the same sweep of precisions")

    rows = []
    for j, cells in sorted(by_j.items()):
        cells = sorted(cells, key=exp.precision)
        ok = [_correct(c) for c in cells]
        first = cells[0]
        in_a, nu = bool(first["in_A"]), first["nu_j"]
        # threshold: least tested precision from which every answer is correct
        threshold = None
        for i in range(len(cells)):
            if all(ok[i:]):
                threshold = exp.precision(cells[i])
                break
        flips = threshold is not None and not ok[0]
        log2_t = math.log2(threshold) if threshold and threshold > 0 else None
        expected = exp.expected_log2(first) if (in_a and exp.expected_log2) else None
        within = None
        if in_a and flips and log2_t is not None and expected is not None:
            within = abs(log2_t - expected) <= CLAIM_WINDOW
        rows.append(JThreshold(j, in_a, nu, threshold, log2_t, expected, all(ok), flips, within))

    holds = all((r.flips and bool(r.within_window)) if r.in_A else r.always_correct for r in rows)
    return ClaimVerdict(tuple(rows), holds)


def run(config: ExperimentConfig) -> RunReport:
    exp = get_experiment(config.experiment)
    config = exp.default_sweep(config)
    start = time.perf_counter()
    outcome = exp.run(config)
    elapsed = time.perf_counter() - start
    report = RunReport(config, exp.columns, outcome.records, dict(outcome.summary), elapsed)
    if exp.precision is not None:
        report.summary["claim"] = verify_claim(report).to_dict()
    return report


def _csv_value(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.columns)
    for r in report.records:
        w.writerow([_csv_value(r[c]) for c in report.columns])
    return buf.getvalue()


def render_json(report: RunReport) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "experiment": report.config.experiment,
        "config": report.config.to_dict(),
        "cells": len(report.records),
        "columns": list(report.columns),
        "summary": report.summary,
    }
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(report: RunReport, out_dir: str | Path | None = None) -> tuple[Path, Path]:
    out = Path(out_dir if out_dir is not None else report.config.output_dir)
    name = report.config.experiment
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / f"{name}.csv", out / f"{name}.json"
        csv_path.write_text(render_csv(report), encoding="utf-8")
        json_path.write_text(render_json(report), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return csv_path, json_path
