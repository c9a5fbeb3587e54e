"""Summary JSON documents and event-capture reports."""

from __future__ import annotations

import json
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import __version__
from .core import Window
from .selection import Summary, SummaryEntry
from .synthbench import CaptureReport

TOOL = "tss"


class SchemaError(ValueError):
    pass


class EmptySummaryError(ValueError):
    pass


def _num(x):
    return None if x is None else float(x)


def entry_to_dict(e: SummaryEntry) -> dict:
    w = e.window
    return {
        "series_id": w.series_id,
        "start": w.start,
        "anchor": w.anchor,
        "end": w.end,
        "values": [float(v) for v in w.values],
        "source": e.source,
        "utility_score": _num(e.utility_score),
        "diversity_score": _num(e.diversity_score),
    }


def summary_to_dict(summary: Summary, config: dict, status: str = "complete", error: str | None = None) -> dict:
    doc = {
        "tool": TOOL,
        "tool_version": __version__,
        "config": config,
        "method": summary.method,
        "status": status,
        "size": len(summary.entries),
        "prototype_shortfall": summary.shortfall,
        "entries": [entry_to_dict(e) for e in summary.entries],
    }
    if error is not None:
        doc["error"] = error
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


_ENTRY_KEYS = ("series_id", "start", "anchor", "end", "values", "source", "utility_score", "diversity_score")


def summary_from_dict(doc: dict) -> Summary:
    if not isinstance(doc, dict) or "entries" not in doc or not isinstance(doc["entries"], list):
        raise SchemaError("summary document needs an 'entries' list")
    entries = []
    for i, raw in enumerate(doc["entries"]):
        if not isinstance(raw, dict):
            raise SchemaError(f"entries[{i}] is not an object")
        missing = [k for k in _ENTRY_KEYS if k not in raw]
        if missing:
            raise SchemaError(f"entries[{i}] lacks {missing}")
        try:
            start, anchor, end = int(raw["start"]), int(raw["anchor"]), int(raw["end"])
            values = np.asarray(raw["values"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"entries[{i}]: {exc}") from None
        if not start <= anchor <= end or values.size != end - start + 1:
            raise SchemaError(f"entries[{i}]: inconsistent start/anchor/end/values")
        w = Window(str(raw["series_id"]), anchor, start, end, values)
        entries.append(SummaryEntry(w, str(raw["source"]), raw["utility_score"], raw["diversity_score"]))
    return Summary(entries, method=str(doc.get("method", "")), shortfall=int(doc.get("prototype_shortfall", 0)))


def read_summary(path: str | Path) -> tuple[Summary, dict]:
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise EmptySummaryError(f"{path} is empty")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    summary = summary_from_dict(doc)
    if not summary.entries:
        raise EmptySummaryError(f"{path} has no entries")
    return summary, doc


def _pct(x: float) -> float:
    return round(100.0 * x, 2)


def report_rows(reports: list[CaptureReport]) -> list[dict]:
    """One row per run, plus a mean row per (size, model) seen more than once."""
    rows = [
        {
            "size": r.m,
            "model": r.method,
            "runs": 1,
            "event_coverage_pct": _pct(r.event_coverage),
            "event_examples_pct": _pct(r.event_examples),
            "per_type": dict(r.per_type),
        }
        for r in reports
    ]
    groups = defaultdict(list)
    for r in reports:
        groups[(r.m, r.method)].append(r)
    for (m, method), rs in sorted(groups.items()):
        if len(rs) > 1:
            rows.append(
                {
                    "size": m,
                    "model": f"{method} (mean)",
                    "runs": len(rs),
                    "event_coverage_pct": _pct(float(np.mean([r.event_coverage for r in rs]))),
                    "event_examples_pct": _pct(float(np.mean([r.event_examples for r in rs]))),
                    "per_type": {},
                }
            )
    return rows


def format_table(rows: list[dict]) -> str:
    header = ("Size", "Model", "Event Coverage (%)", "Event Examples (%)")
    body = [(str(r["size"]), r["model"], f'{r["event_coverage_pct"]:.2f}', f'{r["event_examples_pct"]:.2f}') for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for b in body:
        lines.append("  ".join([b[0].rjust(widths[0]), b[1].ljust(widths[1]), b[2].rjust(widths[2]), b[3].rjust(widths[3])]))
    return "\n".join(lines) + "\n"
