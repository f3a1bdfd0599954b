"""A small static SVG line-plot writer (axes, ticks, legend, one polyline per curve)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f")
WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=70, right=180, top=40, bottom=55)


@dataclass
class Curve:
    label: str
    xs: list
    ys: list
    dashed: bool = False
    markers: bool = True


@dataclass
class Figure:
    title: str
    xlabel: str
    ylabel: str
    curves: list = field(default_factory=list)

    def add(self, label, xs, ys, **kw):
        self.curves.append(Curve(label, [float(x) for x in xs], [float(y) for y in ys], **kw))


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(k * mag for k in (1, 2, 2.5, 5, 10) if k * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    if ticks[-1] < hi:
        ticks.append(round(t, 12))
    return ticks


def _fmt(t: float) -> str:
    return f"{t:.6g}"


def render(fig: Figure) -> str:
    xs = [x for c in fig.curves for x in c.xs] or [0.0, 1.0]
    ys = [y for c in fig.curves for y in c.ys] or [0.0, 1.0]
    xt = nice_ticks(min(xs), max(xs))
    yt = nice_ticks(min(0.0, min(ys)), max(ys))
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]
    left, top = MARGIN["left"], MARGIN["top"]
    pw = WIDTH - left - MARGIN["right"]
    ph = HEIGHT - top - MARGIN["bottom"]

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="13">{escape(fig.title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in xt:
        X = px(t)
        out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{top + ph + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in yt:
        Y = py(t)
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<line x1="{left}" y1="{Y:.2f}" x2="{left + pw}" y2="{Y:.2f}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(fig.xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(fig.ylabel)}</text>')
    for i, c in enumerate(fig.curves):
        colour = PALETTE[i % len(PALETTE)]
        dash = ' stroke-dasharray="6 4"' if c.dashed else ""
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(c.xs, c.ys))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.6"{dash} points="{pts}">'
                   f'<title>{escape(c.label)}</title></polyline>')
        if c.markers:
            for x, y in zip(c.xs, c.ys):
                out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.2" fill="{colour}"/>')
        ly = top + 14 + 18 * i
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{colour}" stroke-width="1.6"{dash}/>')
        out.append(f'<text x="{lx + 28}" y="{ly + 4}">{escape(c.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save(fig: Figure, path) -> None:
    with open(path, "w") as fh:
        fh.write(render(fig))
