"""Run a check specification and render the report.

Report schema (JSON)::

    {"version": 1,
     "checks": [{"id", "op", "status", "residual": [str], "params": {str: str},
                 "result": str}],
     "summary": {"total", "pass", "fail", "degenerate"}}

Timings are kept beside the body (``Report.timings``) and only appear in
text output, so JSON bodies are identical across runs and worker counts.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .checkspec import CheckSpec
from .dispatch import DEGENERATE, FAIL, PASS, run_check

REPORT_VERSION = 1
STATUSES = (PASS, FAIL, DEGENERATE)
_CHECK_KEYS = {"id": str, "op": str, "status": str, "residual": list, "params": dict, "result": str}


class ReportError(ValueError):
    pass


@dataclass
class Report:
    checks: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def summary(self) -> dict:
        counts = {s: 0 for s in STATUSES}
        for c in self.checks:
            counts[c["status"]] += 1
        return {"total": len(self.checks), **counts}

    @property
    def ok(self) -> bool:
        return all(c["status"] == PASS for c in self.checks)

    def body(self) -> dict:
        return {"version": REPORT_VERSION, "checks": self.checks, "summary": self.summary}


def _timed(args):
    check, seed = args
    start = time.perf_counter()
    out = run_check(check, seed)
    return out, time.perf_counter() - start


def run(spec: CheckSpec, seed: int = 0, jobs: int = 1) -> Report:
    work = [(c, seed) for c in spec.checks]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_timed, work))
    else:
        results = [_timed(w) for w in work]
    report = Report()
    for out, seconds in results:
        report.checks.append(out)
        report.timings[out["id"]] = seconds
    return report


def to_json(report: Report) -> str:
    return json.dumps(report.body(), indent=2, sort_keys=True) + "\n"


def validate_report(data: dict) -> dict:
    """Check a decoded report against the schema; returns it unchanged."""
    if not isinstance(data, dict) or set(data) != {"version", "checks", "summary"}:
        raise ReportError("report must have exactly version, checks and summary")
    if data["version"] != REPORT_VERSION:
        raise ReportError(f"unsupported report version {data['version']!r}")
    counts = {s: 0 for s in STATUSES}
    for c in data["checks"]:
        if set(c) != set(_CHECK_KEYS):
            raise ReportError(f"check entry has keys {sorted(c)}")
        for k, typ in _CHECK_KEYS.items():
            if not isinstance(c[k], typ):
                raise ReportError(f"check {c.get('id')!r}: {k} must be {typ.__name__}")
        if c["status"] not in STATUSES:
            raise ReportError(f"check {c['id']!r}: bad status {c['status']!r}")
        if not all(isinstance(r, str) for r in c["residual"]):
            raise ReportError(f"check {c['id']!r}: residual entries must be strings")
        if not all(isinstance(k, str) and isinstance(v, str) for k, v in c["params"].items()):
            raise ReportError(f"check {c['id']!r}: params must map strings to strings")
        counts[c["status"]] += 1
    if data["summary"] != {"total": len(data["checks"]), **counts}:
        raise ReportError("summary does not match the checks")
    return data


def parse_report(text: str) -> Report:
    data = validate_report(json.loads(text))
    return Report(list(data["checks"]))


def to_text(report: Report) -> str:
    rows = [("id", "status", "time", "result")]
    for c in report.checks:
        t = report.timings.get(c["id"])
        rows.append((c["id"], c["status"], "" if t is None else f"{t:.2f}s", c["result"]))
    widths = [max(len(r[k]) for r in rows) for k in range(3)]
    lines = []
    for r in rows:
        lines.append("  ".join(x.ljust(w) for x, w in zip(r[:3], widths)) + "  " + r[3])
        if r is rows[0]:
            lines.append("-" * (sum(widths) + 6 + len(r[3])))
    for c in report.checks:
        if c["residual"]:
            lines.append(f"\n{c['id']} ({c['op']}) residual:")
            lines.extend(f"    {line}" for line in c["residual"])
    s = report.summary
    lines.append(f"\n{s['total']} checks: {s['pass']} pass, {s['fail']} fail, "
                 f"{s['degenerate']} degenerate")
    return "\n".join(lines) + "\n"


def emit_report(report: Report, fmt: str = "text") -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "text":
        return to_text(report)
    raise ValueError(f"unknown format {fmt!r}")
