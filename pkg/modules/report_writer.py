"""
Artifact writing: report.json (schema-versioned) and CSV curves.

Nothing time-dependent is written, so identical configs give identical files.
"""
from __future__ import annotations

import csv
import json
import math
import os
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from modules.polycore import GaussianRational, ratio_string

SCHEMA_VERSION = 1
REPORT_NAME = "report.json"


def to_plain(value):
    """JSON-safe copy: complex -> [re, im], non-finite floats -> strings, numpy scalars -> Python."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(value, (complex, np.complexfloating)):
        return [to_plain(value.real), to_plain(value.imag)]
    if isinstance(value, GaussianRational):
        return [ratio_string(value.re), ratio_string(value.im)]
    if isinstance(value, Fraction):
        return ratio_string(value)
    if hasattr(value, "to_json"):
        return to_plain(value.to_json())
    return value


def write_report(out_dir: str, subcommand: str, ok: bool, payload: dict, config: dict | None = None) -> str:
    os.makedirs(out_dir, exist_ok=True)
    report = {"schema": SCHEMA_VERSION, "subcommand": subcommand, "ok": bool(ok)}
    if config is not None:
        report["config"] = config
    report.update(payload)
    path = os.path.join(out_dir, REPORT_NAME)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_plain(report), f, ensure_ascii=False, indent=2)
        f.write("\n")
    return path


def write_curve(out_dir: str, filename: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV with the given header; floats written with repr precision."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, filename)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([to_plain(v) for v in row])
    return path


def read_report(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
