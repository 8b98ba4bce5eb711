"""Check records, suite reports and their canonical JSON form."""

from __future__ import annotations

import datetime
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np


@dataclass
class Record:
    name: str
    lhs: Any
    rhs: Any
    abs_err: float | None
    rel_err: float | None
    passed: bool
    tol: float | None = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "abs_err": self.abs_err,
                "rel_err": self.rel_err, "pass": bool(self.passed), "tol": self.tol,
                "detail": self.detail}


def compare(name: str, lhs: complex, rhs: complex, tol: float, relative: bool = True,
            **detail) -> Record:
    """Record for ``lhs == rhs``; passes on relative (or absolute) error at most ``tol``."""
    lhs, rhs = complex(lhs), complex(rhs)
    abs_err = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs))
    rel_err = abs_err / scale if scale > 0 else 0.0
    err = rel_err if relative else abs_err
    ok = bool(np.isfinite(abs_err)) and err <= tol
    return Record(name, lhs, rhs, abs_err, rel_err, ok, tol, dict(detail))


def bound(name: str, value: float, limit: float, **detail) -> Record:
    """Record for ``value <= limit``."""
    ok = bool(np.isfinite(value)) and value <= limit
    return Record(name, value, limit, None, None, ok, None, dict(detail))


def flag(name: str, ok: bool, **detail) -> Record:
    return Record(name, None, None, None, None, bool(ok), None, dict(detail))


@dataclass
class Report:
    suite: str
    records: list[Record]
    seed: int
    version: str
    timestamp: str
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(r.passed for r in self.records)

    def to_json(self) -> dict:
        return {"suite": self.suite, "records": [r.to_json() for r in self.records],
                "environment": {"version": self.version, "seed": self.seed,
                                "timestamp": self.timestamp},
                "error": self.error, "pass": self.passed}


def report_timestamp() -> str:
    """UTC time from ``SOURCE_DATE_EPOCH`` (default 0) so reports stay reproducible."""
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    return datetime.datetime.fromtimestamp(epoch, datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _plain(obj):
    """Convert to JSON-compatible values: complex as [re, im], non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_plain(float(obj.real)), _plain(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_json"):
        return _plain(obj.to_json())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Sorted keys, ASCII only, shortest round-trip floats."""
    return json.dumps(_plain(obj), sort_keys=True, ensure_ascii=True, allow_nan=False,
                      indent=2) + "\n"


def report_write(reports: list[Report], path: str | Path, config: dict | None = None) -> str:
    text = canonical_json(bundle(reports, config))
    Path(path).write_text(text, encoding="ascii")
    return text


def bundle(reports: list[Report], config: dict | None = None) -> dict:
    return {"reports": [r.to_json() for r in reports], "config": config,
            "pass": all(r.passed for r in reports)}
