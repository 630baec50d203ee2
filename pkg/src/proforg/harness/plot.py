"""Deterministic SVG line plots of regret curves.

Output depends only on the input numbers and the style: coordinates are
printed at two decimals, element ids are derived from series order, and no
timestamps or random ids are emitted, so identical inputs give identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f")


@dataclass(frozen=True)
class Series:
    label: str
    steps: np.ndarray
    values: np.ndarray
    stderr: np.ndarray | None = None


@dataclass(frozen=True)
class PlotStyle:
    width: int = 640
    height: int = 400
    margin_left: int = 64
    margin_right: int = 160
    margin_top: int = 36
    margin_bottom: int = 48
    title: str = "Normalized prospective regret"
    x_label: str = "online step"
    y_label: str = "normalized regret"
    show_bands: bool = True
    font: str = "DejaVu Sans, Arial, sans-serif"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / n
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = np.ceil(lo / step - 1e-9) * step
    return np.arange(start, hi + step * 1e-6, step)


def _num(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def _label(x: float) -> str:
    return f"{x:.6g}"


def plot(series: list, style: PlotStyle = PlotStyle()) -> str:
    """Render ``series`` as one polyline each, with optional stderr bands and a legend."""
    series = [s for s in series]
    if not series or any(len(s.steps) == 0 for s in series):
        raise ValueError("plot needs at least one non-empty series")
    xs = np.concatenate([np.asarray(s.steps, dtype=np.float64) for s in series])
    ys = np.concatenate([np.asarray(s.values, dtype=np.float64) for s in series])
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("series contain non-finite values")
    x0, x1 = float(xs.min()), float(xs.max())
    if x1 == x0:
        x1 = x0 + 1.0
    y0 = min(0.0, float(ys.min()))
    y1 = max(1.0, float(ys.max()))
    left, top = style.margin_left, style.margin_top
    pw = style.width - style.margin_left - style.margin_right
    ph = style.height - style.margin_top - style.margin_bottom

    def px(x):
        return left + (np.asarray(x, dtype=np.float64) - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (np.clip(np.asarray(y, dtype=np.float64), y0, y1) - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width}" height="{style.height}" '
        f'viewBox="0 0 {style.width} {style.height}" font-family="{escape(style.font)}" font-size="12">',
        f'<rect id="background" x="0" y="0" width="{style.width}" height="{style.height}" fill="#ffffff"/>',
        f'<text id="title" x="{_num(left + pw / 2)}" y="{_num(top - 14)}" text-anchor="middle" '
        f'font-size="14">{escape(style.title)}</text>',
        '<g id="axes" stroke="#000000" stroke-width="1">',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}"/>',
        "</g>",
        '<g id="ticks" font-size="10">',
    ]
    for t in _nice_ticks(x0, x1):
        x = _num(float(px(t)))
        out.append(f'<line x1="{x}" y1="{top + ph}" x2="{x}" y2="{top + ph + 4}" stroke="#000000"/>')
        out.append(f'<text x="{x}" y="{top + ph + 16}" text-anchor="middle">{_label(t)}</text>')
    for t in _nice_ticks(y0, y1):
        y = _num(float(py(t)))
        out.append(f'<line x1="{left - 4}" y1="{y}" x2="{left}" y2="{y}" stroke="#000000"/>')
        out.append(f'<text x="{left - 6}" y="{y}" text-anchor="end" dominant-baseline="middle">'
                   f'{_label(t)}</text>')
    out.append("</g>")
    out.append(f'<text id="x-label" x="{_num(left + pw / 2)}" y="{style.height - 10}" '
               f'text-anchor="middle">{escape(style.x_label)}</text>')
    out.append(f'<text id="y-label" x="14" y="{_num(top + ph / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 14 {_num(top + ph / 2)})">{escape(style.y_label)}</text>')

    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        sx = px(s.steps)
        if style.show_bands and s.stderr is not None and np.any(np.asarray(s.stderr) > 0):
            lo = py(np.asarray(s.values) - np.asarray(s.stderr))
            hi = py(np.asarray(s.values) + np.asarray(s.stderr))
            pts = [f"{_num(a)},{_num(b)}" for a, b in zip(sx, hi)]
            pts += [f"{_num(a)},{_num(b)}" for a, b in zip(sx[::-1], lo[::-1])]
            out.append(f'<polygon id="band-{i}" points="{" ".join(pts)}" fill="{color}" '
                       f'fill-opacity="0.2" stroke="none"/>')
        pts = " ".join(f"{_num(a)},{_num(b)}" for a, b in zip(sx, py(s.values)))
        out.append(f'<polyline id="series-{i}" points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')

    out.append('<g id="legend">')
    lx = left + pw + 12
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        ly = top + 12 + 18 * i
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text id="legend-{i}" x="{lx + 26}" y="{ly}" dominant-baseline="middle">'
                   f'{escape(s.label)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
