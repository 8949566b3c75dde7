"""Minimal self-contained SVG line charts."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


@dataclass
class Series:
    label: str
    x: list
    y: list
    dashed: bool = False
    color: str | None = None


def _n(v: float) -> str:
    return f"{v:.2f}"


def line_chart(series, title="", xlabel="", ylabel="", width=720, height=440,
               xlim=None, ylim=(0.0, 1.0)) -> str:
    """Render ``series`` as an SVG document string; output depends only on the inputs."""
    left, right, top, bottom = 70, 170, 40, 55
    pw, ph = width - left - right, height - top - bottom
    xs = [v for s in series for v in s.x]
    x0, x1 = xlim if xlim else (min(xs, default=0.0), max(xs, default=1.0))
    if x1 <= x0:
        x1 = x0 + 1.0
    y0, y1 = ylim

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        v = min(max(v, y0), y1)
        return top + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{_n(left + pw / 2)}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
    ]
    for k in range(6):
        fx = x0 + (x1 - x0) * k / 5
        fy = y0 + (y1 - y0) * k / 5
        out.append(f'<line x1="{_n(sx(fx))}" y1="{top}" x2="{_n(sx(fx))}" y2="{top + ph}" stroke="#e5e5e5"/>')
        out.append(f'<line x1="{left}" y1="{_n(sy(fy))}" x2="{left + pw}" y2="{_n(sy(fy))}" stroke="#e5e5e5"/>')
        out.append(f'<text x="{_n(sx(fx))}" y="{top + ph + 18}" text-anchor="middle">{fx:.2f}</text>')
        out.append(f'<text x="{left - 8}" y="{_n(sy(fy) + 4)}" text-anchor="end">{fy:.1f}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    out.append(f'<text x="{_n(left + pw / 2)}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{_n(top + ph / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 18 {_n(top + ph / 2)})">{escape(ylabel)}</text>')

    for i, s in enumerate(series):
        color = s.color or PALETTE[i % len(PALETTE)]
        points = " ".join(f"{_n(sx(a))},{_n(sy(b))}" for a, b in zip(s.x, s.y))
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        out.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="2"{dash}/>')
        ly = top + 12 + 20 * i
        lx = left + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
