"""Self-contained SVG line charts with a fixed 800x600 viewBox."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 800, 600
LEFT, RIGHT, TOP, BOTTOM = 90, 30, 50, 70
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_chart(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    *,
    title: str,
    xlabel: str,
    ylabel: str,
    logy: bool = False,
) -> str:
    """SVG text for ``(label, xs, ys)`` series drawn as polylines with markers."""
    pts = []
    for label, xs, ys in series:
        vals = [(float(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(y) and (not logy or y > 0)]
        if logy:
            vals = [(x, math.log10(y)) for x, y in vals]
        pts.append((label, vals))
    allx = [x for _, v in pts for x, _ in v] or [0.0, 1.0]
    ally = [y for _, v in pts for _, y in v] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return TOP + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="28" text-anchor="middle" font-family="sans-serif" font-size="18">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        ylab = f"1e{_fmt(fy)}" if logy else _fmt(fy)
        out.append(f'<text x="{sx(fx):.2f}" y="{TOP + ph + 20}" text-anchor="middle" font-family="sans-serif" font-size="12">{_fmt(fx)}</text>')
        out.append(f'<text x="{LEFT - 8}" y="{sy(fy) + 4:.2f}" text-anchor="end" font-family="sans-serif" font-size="12">{ylab}</text>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 20}" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(xlabel)}</text>')
    out.append(
        f'<text x="20" y="{TOP + ph / 2}" text-anchor="middle" font-family="sans-serif" font-size="14" '
        f'transform="rotate(-90 20 {TOP + ph / 2})">{escape(ylabel + (" (log10)" if logy else ""))}</text>'
    )
    for k, (label, vals) in enumerate(pts):
        color = COLORS[k % len(COLORS)]
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in vals)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{path}"/>')
        if len(vals) <= 50:
            for x, y in vals:
                out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        out.append(f'<text x="{LEFT + 10}" y="{TOP + 20 + 18 * k}" font-family="sans-serif" font-size="13" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
