"""Run reports and their byte-stable serialization.

Floats are written with 17 significant digits and keys in sorted order, so a
fixed config and seed always produce the same bytes. Wall-clock timings vary
from run to run and therefore go to a separate ``timings.json``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import operator
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

RELATIONS = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


@dataclass
class Check:
    """One assertion: ``measured <relation> threshold``.

    ``threshold`` is the tolerance for deviation-type checks and the bound
    for rate-type checks.
    """

    id: str
    description: str
    measured: float
    relation: str
    threshold: float

    @property
    def passed(self) -> bool:
        m = float(self.measured)
        return not math.isnan(m) and RELATIONS[self.relation](m, self.threshold)

    def as_dict(self) -> dict:
        return {"id": self.id, "description": self.description, "measured": float(self.measured),
                "relation": self.relation, "threshold": float(self.threshold), "passed": self.passed}


@dataclass
class RunReport:
    experiment: str
    config: dict
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)

    def check(self, id: str, description: str, measured, relation: str, threshold) -> Check:
        c = Check(id, description, float(measured), relation, float(threshold))
        self.checks.append(c)
        return c

    def table(self, name: str, columns: list[str], rows: list) -> None:
        self.tables[name] = {"columns": list(columns), "rows": [list(r) for r in rows]}

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        out = {"experiment": self.experiment, "config": self.config, "passed": self.passed,
               "checks": [c.as_dict() for c in self.checks], "tables": self.tables}
        if self.witnesses:
            out["witnesses"] = self.witnesses
        return out


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return format(x, ".17g")


def _scalar(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def dumps(obj, indent: int = 0) -> str:
    """JSON with sorted keys and 17-significant-digit floats."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    obj = _scalar(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_string(str(k))}: {dumps(obj[k], indent + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(not isinstance(_scalar(v), (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag], indent)
    return _string(str(obj))


def _string(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def _csv_cell(x) -> str:
    x = _scalar(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format_float(x).strip('"')
    if isinstance(x, complex):
        return f"{format_float(x.real)}{'+' if x.imag >= 0 else '-'}{format_float(abs(x.imag))}j"
    return str(x)


def _write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def default_out_dir() -> Path:
    return Path(os.environ.get("RAYLAB_OUT_DIR", "raylab-out"))


def emit(report: RunReport, fmt: str = "json", out_dir: str | os.PathLike | None = None) -> list[Path]:
    """Write the report; returns the deterministic files written (timings excluded)."""
    out = Path(out_dir) if out_dir is not None else default_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "json":
        path = out / f"{report.experiment}.json"
        path.write_text(dumps(report.as_dict()) + "\n", encoding="utf-8")
        written.append(path)
    elif fmt == "csv":
        path = out / f"{report.experiment}.checks.csv"
        cols = ["id", "description", "measured", "relation", "threshold", "passed"]
        _write_csv(path, cols, [[c.as_dict()[k] for k in cols] for c in report.checks])
        written.append(path)
        for name in sorted(report.tables):
            t = report.tables[name]
            path = out / f"{report.experiment}.{name}.csv"
            _write_csv(path, t["columns"], t["rows"])
            written.append(path)
        path = out / f"{report.experiment}.config.json"
        path.write_text(dumps(report.config) + "\n", encoding="utf-8")
        written.append(path)
        if report.witnesses:
            path = out / f"{report.experiment}.witnesses.json"
            path.write_text(dumps(report.witnesses) + "\n", encoding="utf-8")
            written.append(path)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    (out / f"{report.experiment}.timings.json").write_text(dumps(report.timings) + "\n", encoding="utf-8")
    return written
