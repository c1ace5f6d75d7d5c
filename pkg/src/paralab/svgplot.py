"""Tiny SVG line-plot writer for sweep results."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT, PAD = 640, 400, 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def line_plot(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    path,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
) -> None:
    """Write one polyline per series; non-finite points are skipped."""
    tx = (lambda v: math.log2(v)) if logx else float
    pts = {
        name: [(tx(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(y) and (not logx or x > 0)]
        for name, (xs, ys) in series.items()
    }
    allx = [p[0] for ps in pts.values() for p in ps] or [0.0, 1.0]
    ally = [p[1] for ps in pts.values() for p in ps] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    margin = 0.05 * (y1 - y0)
    y0, y1 = y0 - margin, y1 + margin

    def sx(x):
        return PAD + (x - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def sy(y):
        return HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        label = f"{2 ** t:g}" if logx else f"{t:g}"
        out.append(f'<text x="{sx(t):.1f}" y="{HEIGHT - PAD + 16}" text-anchor="middle">{label}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{PAD - 6}" y="{sy(t) + 4:.1f}" text-anchor="end">{t:.3g}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{PAD / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 14 {HEIGHT / 2})">{escape(ylabel)}</text>')
    for k, (name, ps) in enumerate(pts.items()):
        color = COLORS[k % len(COLORS)]
        if ps:
            coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in ps)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
            out.extend(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" fill="{color}"/>' for x, y in ps)
        out.append(f'<text x="{WIDTH - PAD}" y="{PAD + 14 * (k + 1)}" text-anchor="end" fill="{color}">{escape(name)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
