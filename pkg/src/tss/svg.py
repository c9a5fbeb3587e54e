"""Minimal static SVG charts: one window line plot and a log-log scaling plot."""

from __future__ import annotations

import json
import math
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class SVG:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts: list[str] = []

    def add(self, fragment: str) -> None:
        self.parts.append(fragment)

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{stroke}" stroke-width="{width}"{extra}/>'
        )

    def polyline(self, points, stroke="#000", width=1.5):
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.add(f'<polyline points="{pts}" fill="none" stroke="{stroke}" stroke-width="{width}"/>')

    def circle(self, x, y, r, fill="#000"):
        self.add(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{fill}"/>')

    def text(self, x, y, s, size=11, anchor="start", fill="#222"):
        self.add(
            f'<text x="{x:.2f}" y="{y:.2f}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}" fill="{fill}">{escape(str(s))}</text>'
        )

    def render(self, metadata: dict | None = None, timestamp: str | None = None) -> str:
        head = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">',
        ]
        if timestamp is not None:
            head.append(f"<!-- generated: {escape(timestamp)} -->")
        if metadata is not None:
            head.append(f"<metadata>{escape(json.dumps(metadata, sort_keys=True))}</metadata>")
        head.append(f'<rect width="{self.width}" height="{self.height}" fill="#fff"/>')
        return "\n".join(head + self.parts + ["</svg>", ""])


def _fmt(v: float) -> str:
    return f"{v:.3g}"


def _ticks(lo: float, hi: float, k: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (k - 1) for i in range(k)]


def window_plot(
    values,
    start: int,
    anchor: int,
    title: str = "",
    subtitle: str = "",
    metadata: dict | None = None,
    timestamp: str | None = None,
    width: int = 480,
    height: int = 280,
) -> str:
    """Line plot of a window over its absolute time index, anchor marked."""
    vals = [float(v) for v in values]
    ml, mr, mt, mb = 56, 16, 44, 36
    pw, ph = width - ml - mr, height - mt - mb
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    pad = (hi - lo) * 0.05
    lo, hi = lo - pad, hi + pad
    n = len(vals)

    def px(i):
        return ml + (pw * i / (n - 1) if n > 1 else pw / 2)

    def py(v):
        return mt + ph * (hi - v) / (hi - lo)

    svg = SVG(width, height)
    svg.text(ml, 18, title, size=13)
    if subtitle:
        svg.text(ml, 34, subtitle, size=10, fill="#555")
    svg.line(ml, mt + ph, ml + pw, mt + ph, stroke="#888")
    svg.line(ml, mt, ml, mt + ph, stroke="#888")
    for v in _ticks(lo, hi):
        svg.line(ml - 4, py(v), ml, py(v), stroke="#888")
        svg.text(ml - 6, py(v) + 4, _fmt(v), size=9, anchor="end")
    step = max(1, (n - 1) // 5)
    for i in range(0, n, step):
        svg.line(px(i), mt + ph, px(i), mt + ph + 4, stroke="#888")
        svg.text(px(i), mt + ph + 16, start + i, size=9, anchor="middle")
    k = anchor - start
    if 0 <= k < n:
        svg.line(px(k), mt, px(k), mt + ph, stroke="#d62728", dash="4,3")
    svg.polyline([(px(i), py(v)) for i, v in enumerate(vals)], stroke=PALETTE[0])
    if 0 <= k < n:
        svg.circle(px(k), py(vals[k]), 3.5, fill="#d62728")
    return svg.render(metadata, timestamp)


def loglog_plot(
    panels: list[tuple[str, dict[str, tuple[list[float], list[float]]]]],
    title: str = "",
    metadata: dict | None = None,
    timestamp: str | None = None,
    panel_width: int = 360,
    height: int = 300,
) -> str:
    """Side-by-side log-log panels; each maps a series label to (x, y) lists."""
    ml, mr, mt, mb = 60, 16, 48, 40
    width = panel_width * len(panels)
    svg = SVG(width, height)
    svg.text(12, 18, title, size=13)
    labels = sorted({name for _, series in panels for name in series})
    colors = {name: PALETTE[i % len(PALETTE)] for i, name in enumerate(labels)}
    for p, (ylabel, series) in enumerate(panels):
        x0 = p * panel_width + ml
        pw, ph = panel_width - ml - mr, height - mt - mb
        xs = [x for xv, _ in series.values() for x in xv if x > 0]
        ys = [y for _, yv in series.values() for y in yv if y > 0]
        if not xs or not ys:
            continue
        lx0, lx1 = math.floor(math.log10(min(xs))), math.ceil(math.log10(max(xs)))
        ly0, ly1 = math.floor(math.log10(min(ys))), math.ceil(math.log10(max(ys)))
        lx1, ly1 = max(lx1, lx0 + 1), max(ly1, ly0 + 1)

        def px(x):
            return x0 + pw * (math.log10(x) - lx0) / (lx1 - lx0)

        def py(y):
            return mt + ph * (ly1 - math.log10(y)) / (ly1 - ly0)

        svg.line(x0, mt + ph, x0 + pw, mt + ph, stroke="#888")
        svg.line(x0, mt, x0, mt + ph, stroke="#888")
        for e in range(lx0, lx1 + 1):
            svg.line(px(10**e), mt + ph, px(10**e), mt + ph + 4, stroke="#888")
            svg.text(px(10**e), mt + ph + 16, f"1e{e}", size=9, anchor="middle")
        for e in range(ly0, ly1 + 1):
            svg.line(x0 - 4, py(10**e), x0, py(10**e), stroke="#888")
            svg.text(x0 - 6, py(10**e) + 4, f"1e{e}", size=9, anchor="end")
        svg.text(x0 + pw / 2, height - 6, "n (points)", size=10, anchor="middle")
        svg.text(x0, mt - 8, ylabel, size=10)
        for name in labels:
            if name not in series:
                continue
            pts = [(px(x), py(y)) for x, y in zip(*series[name]) if x > 0 and y > 0]
            svg.polyline(pts, stroke=colors[name])
            for x, y in pts:
                svg.circle(x, y, 2.5, fill=colors[name])
    for i, name in enumerate(labels):
        svg.line(width - 150, 14 + 14 * i, width - 130, 14 + 14 * i, stroke=colors[name], width=2)
        svg.text(width - 124, 18 + 14 * i, name, size=10)
    return svg.render(metadata, timestamp)
