"""Minimal deterministic SVG line plots of success rates."""

from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT = 480, 340
MARGIN = dict(left=60, right=20, top=30, bottom=50)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _num(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def line_plot(x: list[float], series: dict[str, list[float]], xlabel: str, ylabel: str = "probability",
              title: str = "") -> str:
    """Polylines of each series over ``x`` on a ``[0, 1]`` vertical axis."""
    x0, x1 = min(x), max(x)
    if x1 == x0:
        x1 = x0 + 1
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + (1 - v) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    left, right = MARGIN["left"], MARGIN["left"] + pw
    top, bottom = MARGIN["top"], MARGIN["top"] + ph
    out.append(f'<polyline points="{left},{top} {left},{bottom} {right},{bottom}" fill="none" stroke="black"/>')
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = py(t)
        out.append(f'<line x1="{left - 4}" y1="{_num(y)}" x2="{left}" y2="{_num(y)}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{_num(y + 4)}" text-anchor="end">{_num(t)}</text>')
    for v in x:
        xx = px(v)
        out.append(f'<line x1="{_num(xx)}" y1="{bottom}" x2="{_num(xx)}" y2="{bottom + 4}" stroke="black"/>')
        out.append(f'<text x="{_num(xx)}" y="{bottom + 18}" text-anchor="middle">{_num(v)}</text>')
    out.append(f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {(top + bottom) / 2:.1f})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{(left + right) / 2:.1f}" y="18" text-anchor="middle">{escape(title)}</text>')
    for i, (name, ys) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{_num(px(a))},{_num(py(b))}" for a, b in zip(x, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = top + 14 + 16 * i
        out.append(f'<line x1="{right - 110}" y1="{ly}" x2="{right - 90}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{right - 85}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
