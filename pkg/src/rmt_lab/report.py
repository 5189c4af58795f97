"""JSON and CSV serialization of results.

The CSV has the fixed columns ``statistic, t_or_interval, estimate, ci_lo,
ci_hi, n_samples, seed``. Floats are written with ``repr`` so files are
byte-stable; non-finite floats become the strings ``inf``, ``-inf`` and
``nan`` in JSON.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["CSV_COLUMNS", "Report", "jsonable", "write_report"]

CSV_COLUMNS = ("statistic", "t_or_interval", "estimate", "ci_lo", "ci_hi", "n_samples", "seed")


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    return obj


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass
class Report:
    command: str
    inputs: dict
    results: dict
    seed: int
    fitted: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    passed: bool | None = None
    attachments: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "command": self.command,
            "inputs": self.inputs,
            "seed": self.seed,
            "results": self.results,
            "fitted": self.fitted,
        }
        if self.passed is not None:
            out["passed"] = self.passed
        return jsonable(out)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([_cell(x) for x in row])
        return buf.getvalue()


def write_report(report: Report, prefix, run_info: dict | None = None) -> list[Path]:
    """Write ``<prefix>.json``, ``<prefix>.csv`` and any attachments.

    Run metadata (wall clock, workers, backend) goes to ``<prefix>.run.json``
    so the other files stay byte-identical across runs.
    """
    prefix = Path(prefix)
    if prefix.parent:
        prefix.parent.mkdir(parents=True, exist_ok=True)
    paths = [prefix.with_name(prefix.name + ".json"), prefix.with_name(prefix.name + ".csv")]
    paths[0].write_text(report.to_json())
    paths[1].write_text(report.to_csv())
    for suffix, text in report.attachments.items():
        extra = prefix.with_name(prefix.name + suffix)
        extra.write_text(text)
        paths.append(extra)
    if run_info is not None:
        meta = prefix.with_name(prefix.name + ".run.json")
        meta.write_text(json.dumps(jsonable(run_info), indent=2, sort_keys=True) + "\n")
        paths.append(meta)
    return paths
