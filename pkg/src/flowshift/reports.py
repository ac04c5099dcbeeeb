"""Verification reports and residual statistics."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class VerificationVerdict:
    passed: bool
    max_distance: float
    mean_distance: float
    tolerance: float
    distances: list = field(repr=False, default_factory=list)


@dataclass
class VerificationReport:
    suite_name: str
    passed: bool
    max_residual: float
    mean_residual: float
    quantile_95: float
    n_points: int
    tolerance: float
    identity: str = ""
    worst_cases: list = field(default_factory=list)
    wall_time: float = 0.0
    failures: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    rows: list = field(default_factory=list, repr=False)
    columns: tuple = ("label", "point", "residual")

    def to_dict(self):
        d = asdict(self)
        d.pop("rows")
        d.pop("columns")
        d["pass"] = d.pop("passed")
        return _jsonable(d)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def residual_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()


def _cell(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_cell(x) for x in np.ravel(np.asarray(v, dtype=object)))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "value") and hasattr(obj, "name"):  # Enum
        return obj.value
    return obj


def summarize(suite_name, labels, points, residuals, tolerance, identity="",
              failures=(), n_worst=5, extra=None):
    """Build a report from per-sample residuals; ``pass`` iff max <= tolerance."""
    res = np.asarray(residuals, dtype=float)
    rows = [(lab, np.asarray(p).tolist(), float(r)) for lab, p, r in zip(labels, points, res)]
    if res.size:
        mx = float(np.max(res))
        mean = float(np.mean(res))
        q95 = float(np.quantile(res, 0.95))
    else:
        mx = mean = q95 = 0.0
    order = np.argsort(-res, kind="stable")[:n_worst] if res.size else []
    worst = [{"input": rows[i][0], "point": rows[i][1], "residual": rows[i][2]} for i in order]
    failures = list(failures)
    passed = bool(res.size > 0 and mx <= tolerance and not failures)
    return VerificationReport(
        suite_name=suite_name, passed=passed, max_residual=mx, mean_residual=mean,
        quantile_95=q95, n_points=int(res.size), tolerance=float(tolerance), identity=identity,
        worst_cases=worst, failures=failures, extra=dict(extra or {}), rows=rows)


def merge(suite_name, reports, identity="", extra=None):
    """Combine sub-reports; passes iff every part passes."""
    rows = []
    failures = []
    for r in reports:
        rows.extend((f"{r.suite_name}:{lab}", p, v) for lab, p, v in r.rows)
        failures.extend(r.failures)
    tol = max((r.tolerance for r in reports), default=0.0)
    labels = [r[0] for r in rows]
    out = summarize(suite_name, labels, [r[1] for r in rows], [r[2] for r in rows], tol,
                    identity, failures, extra=extra)
    out.passed = bool(reports) and all(r.passed for r in reports)
    out.extra.setdefault("parts", {r.suite_name: r.passed for r in reports})
    return out
