"""Deterministic SVG rendering of sweep grids and fidelity traces.

No plotting library: the figures the pipeline needs are two-axis
heatmaps, one-axis line plots, and two-line time series, all of which
are a few hundred SVG elements.  Output is a pure function of the input
arrays (floats rendered with %.6g, no timestamps), so reruns are
byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .liouville import RunResult
from .sweeps import SweepGrid

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 90, 40, 55

# coarse perceptually-uniform ramp, interpolated linearly
_RAMP = np.array([
    (0.267, 0.005, 0.329), (0.283, 0.141, 0.458), (0.254, 0.265, 0.530),
    (0.207, 0.372, 0.553), (0.164, 0.471, 0.558), (0.128, 0.567, 0.551),
    (0.135, 0.659, 0.518), (0.267, 0.749, 0.441), (0.478, 0.821, 0.318),
    (0.741, 0.873, 0.150), (0.993, 0.906, 0.144),
])


def _color(v: float) -> str:
    if not np.isfinite(v):
        return "#999999"
    x = min(max(float(v), 0.0), 1.0) * (len(_RAMP) - 1)
    k = min(int(x), len(_RAMP) - 2)
    r, g, b = _RAMP[k] + (x - k) * (_RAMP[k + 1] - _RAMP[k])
    return f"#{round(r * 255):02x}{round(g * 255):02x}{round(b * 255):02x}"


def _f(x) -> str:
    return f"{float(x):.6g}"


def _ticks(lo: float, hi: float, n: int = 5):
    return np.linspace(lo, hi, n)


class _Svg:
    def __init__(self, width=WIDTH, height=HEIGHT):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
        ]

    def rect(self, x, y, w, h, fill, stroke=None):
        s = f' stroke="{stroke}" stroke-width="0.5"' if stroke else ""
        self.parts.append(
            f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" '
            f'fill="{fill}"{s}/>'
        )

    def line(self, x1, y1, x2, y2, stroke="black", width=1.0):
        self.parts.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{stroke}" stroke-width="{_f(width)}"/>'
        )

    def polyline(self, xs, ys, stroke, width=1.5, dash=None):
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in zip(xs, ys))
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
            f'stroke-width="{_f(width)}"{d}/>'
        )

    def text(self, x, y, s, size=12, anchor="middle", rotate=None):
        r = f' transform="rotate({rotate} {_f(x)} {_f(y)})"' if rotate is not None else ""
        self.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" '
            f'font-size="{size}" text-anchor="{anchor}"{r}>{s}</text>'
        )

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _frame(svg: _Svg, x_label: str, y_label: str, title: str,
           x_lo, x_hi, y_lo, y_hi):
    """Axes box, ticks, and labels; returns data->pixel transforms."""
    px0, px1 = MARGIN_L, WIDTH - MARGIN_R
    py0, py1 = HEIGHT - MARGIN_B, MARGIN_T

    def tx(x):
        return px0 + (x - x_lo) / (x_hi - x_lo) * (px1 - px0)

    def ty(y):
        return py0 + (y - y_lo) / (y_hi - y_lo) * (py1 - py0)

    svg.rect(px0, py1, px1 - px0, py0 - py1, "none", stroke="black")
    for v in _ticks(x_lo, x_hi):
        svg.line(tx(v), py0, tx(v), py0 + 4)
        svg.text(tx(v), py0 + 17, _f(v), size=11)
    for v in _ticks(y_lo, y_hi):
        svg.line(px0 - 4, ty(v), px0, ty(v))
        svg.text(px0 - 8, ty(v) + 4, _f(v), size=11, anchor="end")
    svg.text((px0 + px1) / 2, HEIGHT - 12, x_label)
    svg.text(18, (py0 + py1) / 2, y_label, rotate=-90)
    svg.text((px0 + px1) / 2, 22, title, size=14)
    return tx, ty


def heatmap_svg(grid: SweepGrid) -> str:
    ax1, ax2 = grid.spec.axes
    vals = grid.fidelity
    svg = _Svg()
    x = np.asarray(ax2.values, dtype=float)  # columns
    y = np.asarray(ax1.values, dtype=float)  # rows
    x_edges = _edges(x)
    y_edges = _edges(y)
    tx, ty = _frame(
        svg, ax2.name, ax1.name, f"{grid.spec.name}: F over ({ax1.name}, {ax2.name})",
        x_edges[0], x_edges[-1], y_edges[0], y_edges[-1],
    )
    for i in range(len(y)):
        for j in range(len(x)):
            xp, yp = tx(x_edges[j]), ty(y_edges[i + 1])
            svg.rect(
                xp, yp, tx(x_edges[j + 1]) - xp, ty(y_edges[i]) - yp,
                _color(vals[i, j]),
            )
    # colorbar on the right
    cb_x, cb_w = WIDTH - MARGIN_R + 25, 16
    cb_y0, cb_y1 = HEIGHT - MARGIN_B, MARGIN_T
    for k in range(64):
        f0 = k / 64
        ya = cb_y0 + (cb_y1 - cb_y0) * f0
        yb = cb_y0 + (cb_y1 - cb_y0) * (k + 1) / 64
        svg.rect(cb_x, min(ya, yb), cb_w, abs(yb - ya) + 0.5, _color(f0 + 1 / 128))
    svg.rect(cb_x, cb_y1, cb_w, cb_y0 - cb_y1, "none", stroke="black")
    for v in (0.0, 0.5, 1.0):
        yv = cb_y0 + (cb_y1 - cb_y0) * v
        svg.text(cb_x + cb_w + 4, yv + 4, _f(v), size=11, anchor="start")
    svg.text(cb_x + cb_w / 2, cb_y1 - 8, "F", size=12)
    return svg.render()


def _edges(centers: np.ndarray) -> np.ndarray:
    mid = (centers[1:] + centers[:-1]) / 2
    first = centers[0] - (mid[0] - centers[0])
    last = centers[-1] + (centers[-1] - mid[-1])
    return np.concatenate([[first], mid, [last]])


def line_svg(grid: SweepGrid) -> str:
    (ax,) = grid.spec.axes
    x = np.asarray(ax.values, dtype=float)
    svg = _Svg()
    tx, ty = _frame(
        svg, ax.name, "fidelity", f"{grid.spec.name}: final populations vs {ax.name}",
        float(x[0]), float(x[-1]), 0.0, 1.0,
    )
    ok = np.isfinite(grid.fidelity)
    svg.polyline(tx(x[ok]), ty(grid.fidelity[ok]), "#c8a400")
    svg.polyline(tx(x[ok]), ty(grid.fidelity1[ok]), "#2060c0", dash="6,3")
    for xv, yv in zip(x[ok], grid.fidelity[ok]):
        svg.rect(tx(xv) - 3, ty(yv) - 3, 6, 6, "#c8a400")
    for xv, yv in zip(x[ok], grid.fidelity1[ok]):
        svg.parts.append(
            f'<circle cx="{_f(tx(xv))}" cy="{_f(ty(yv))}" r="3.2" fill="#2060c0"/>'
        )
    svg.text(WIDTH - MARGIN_R - 10, MARGIN_T + 18, "F2 (squares)", anchor="end", size=12)
    svg.text(WIDTH - MARGIN_R - 10, MARGIN_T + 34, "F1 (circles)", anchor="end", size=12)
    return svg.render()


def timeseries_svg(runs, title="population transfer") -> str:
    """Two-line F1/F2 plot; ``runs`` is [(label, times, f1, f2), ...]."""
    if not runs:
        raise ValueError("no traces to plot")
    svg = _Svg()
    t_lo = min(float(np.min(r[1])) for r in runs)
    t_hi = max(float(np.max(r[1])) for r in runs)
    tx, ty = _frame(svg, "t", "population", title, t_lo, t_hi, 0.0, 1.0)
    for k, (label, times, f1, f2) in enumerate(runs):
        shade = 0.15 + 0.7 * k / max(1, len(runs) - 1) if len(runs) > 1 else 0.4
        svg.polyline(tx(np.asarray(times)), ty(np.asarray(f1)), _color(shade))
        svg.polyline(
            tx(np.asarray(times)), ty(np.asarray(f2)), _color(shade), dash="5,3"
        )
        svg.text(
            WIDTH - MARGIN_R - 10, MARGIN_T + 18 + 15 * k, str(label),
            anchor="end", size=11,
        )
    svg.text(MARGIN_L + 10, MARGIN_T + 18, "F1 solid, F2 dashed", anchor="start", size=11)
    return svg.render()


def run_result_svg(result: RunResult, title="population transfer") -> str:
    if len(result.times) == 0:
        raise ValueError("empty run result")
    return timeseries_svg([("", result.times, result.f1, result.f2)], title=title)


def emit_plots(obj, out_dir) -> list:
    """Write the SVGs appropriate for a SweepGrid or RunResult; returns paths."""
    out_dir = Path(out_dir)
    plots = out_dir / "plots"
    plots.mkdir(parents=True, exist_ok=True)
    written = []
    if isinstance(obj, SweepGrid):
        if obj.fidelity.size == 0:
            raise ValueError("empty sweep grid")
        name = obj.spec.name
        if len(obj.spec.axes) == 2:
            path = plots / f"{name}_heatmap.svg"
            path.write_text(heatmap_svg(obj))
        else:
            path = plots / f"{name}_lines.svg"
            path.write_text(line_svg(obj))
        written.append(path)
    elif isinstance(obj, RunResult):
        path = plots / "traces.svg"
        path.write_text(run_result_svg(obj))
        written.append(path)
    else:
        raise TypeError(f"cannot plot {type(obj).__name__}")
    return written
