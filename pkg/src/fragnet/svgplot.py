"""Self-contained SVG scatter plots of sweep outcomes, no plotting framework.

Each run with a defined spl becomes one ``<circle class="mark">`` at
(cd, spl), filled from a two-stop linear color ramp (blue to red in RGB)
over the chosen sigma column; runs without a defined spl are omitted and
counted in the legend.  An optional cubic least-squares trend of spl on cd
can be overlaid.  Output is byte-deterministic for identical inputs.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np

from .metrics import RunResult

__all__ = ["scatter_svg", "ramp_color"]

_RAMP_LOW = (44, 123, 182)  # #2c7bb6
_RAMP_HIGH = (215, 25, 28)  # #d7191c

_WIDTH = 680
_HEIGHT = 480
_MARGIN_LEFT = 64
_MARGIN_RIGHT = 170
_MARGIN_TOP = 36
_MARGIN_BOTTOM = 56


def ramp_color(value: float, low: float, high: float) -> str:
    """Hex color for ``value`` on the documented blue-to-red linear ramp.

    A degenerate range (low == high) maps everything to the midpoint color.
    """
    if high > low:
        t = (value - low) / (high - low)
        t = min(max(t, 0.0), 1.0)
    else:
        t = 0.5
    channels = [
        round(a + t * (b - a)) for a, b in zip(_RAMP_LOW, _RAMP_HIGH)
    ]
    return "#{:02x}{:02x}{:02x}".format(*channels)


def _axis_range(values: Sequence[float]) -> Tuple[float, float]:
    low, high = min(values), max(values)
    if high == low:
        return low - 0.5, high + 0.5
    pad = 0.05 * (high - low)
    return low - pad, high + pad


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def scatter_svg(
    rows: Sequence[RunResult],
    color_by: str = "sigma_d",
    trend: Optional[str] = None,
    title: Optional[str] = None,
) -> str:
    """Render runs as an SVG scatter of (cd, spl); returns the SVG text.

    ``color_by`` selects the sigma column driving the color ramp.  With
    ``trend="cubic"`` a least-squares cubic of spl on cd is overlaid as a
    polyline.  Raises ValueError when no run has a defined spl (nothing to
    plot) or when a requested trend lacks enough points.
    """
    if color_by not in ("sigma_d", "sigma_rs", "sigma_rw"):
        raise ValueError(f"color_by must be one of the sigma columns, got {color_by!r}")
    if trend not in (None, "cubic"):
        raise ValueError(f"trend must be None or 'cubic', got {trend!r}")

    plotted = [r for r in rows if r.spl is not None]
    omitted = len(rows) - len(plotted)
    if not plotted:
        raise ValueError("no rows with a defined spl; nothing to plot")

    xs = [r.cd for r in plotted]
    ys = [r.spl for r in plotted]
    colors = [getattr(r, color_by) for r in plotted]
    x_lo, x_hi = _axis_range(xs)
    y_lo, y_hi = _axis_range(ys)
    c_lo, c_hi = min(colors), max(colors)

    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def px(x: float) -> float:
        return _MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    out: List[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">'
    )
    out.append(
        "<defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
        f'<stop offset="0" stop-color="{ramp_color(0.0, 0.0, 1.0)}"/>'
        f'<stop offset="1" stop-color="{ramp_color(1.0, 0.0, 1.0)}"/>'
        "</linearGradient></defs>"
    )
    out.append(f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>')
    if title:
        out.append(
            f'<text x="{_MARGIN_LEFT}" y="22" font-family="sans-serif" '
            f'font-size="14">{title}</text>'
        )

    # frame and ticks
    frame_bottom = _MARGIN_TOP + plot_h
    frame_right = _MARGIN_LEFT + plot_w
    out.append(
        f'<rect x="{_MARGIN_LEFT}" y="{_MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#444444" stroke-width="1"/>'
    )
    for i in range(5):
        tx = x_lo + i * (x_hi - x_lo) / 4
        x_pix = _fmt(px(tx))
        out.append(
            f'<line x1="{x_pix}" y1="{frame_bottom}" x2="{x_pix}" y2="{frame_bottom + 5}" '
            'stroke="#444444"/>'
        )
        out.append(
            f'<text x="{x_pix}" y="{frame_bottom + 18}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle">{tx:.3g}</text>'
        )
        ty = y_lo + i * (y_hi - y_lo) / 4
        y_pix = _fmt(py(ty))
        out.append(
            f'<line x1="{_MARGIN_LEFT - 5}" y1="{y_pix}" x2="{_MARGIN_LEFT}" y2="{y_pix}" '
            'stroke="#444444"/>'
        )
        out.append(
            f'<text x="{_MARGIN_LEFT - 8}" y="{y_pix}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end" dominant-baseline="middle">{ty:.3g}</text>'
        )
    out.append(
        f'<text x="{_MARGIN_LEFT + plot_w / 2:.0f}" y="{_HEIGHT - 14}" '
        'font-family="sans-serif" font-size="12" text-anchor="middle">'
        "mean cross-group cultural distance (cd)</text>"
    )
    out.append(
        f'<text x="16" y="{_MARGIN_TOP + plot_h / 2:.0f}" font-family="sans-serif" '
        'font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {_MARGIN_TOP + plot_h / 2:.0f})">'
        "mean shortest path length (spl)</text>"
    )

    # marks
    for r in plotted:
        color = ramp_color(getattr(r, color_by), c_lo, c_hi)
        out.append(
            f'<circle class="mark" cx="{_fmt(px(r.cd))}" cy="{_fmt(py(r.spl))}" '
            f'r="3" fill="{color}" fill-opacity="0.75"/>'
        )

    # optional cubic trend of spl on cd
    if trend == "cubic":
        if len(plotted) < 4:
            raise ValueError("cubic trend needs at least 4 plotted points")
        coeffs = np.polyfit(np.array(xs), np.array(ys), 3)
        grid = np.linspace(min(xs), max(xs), 100)
        fitted = np.polyval(coeffs, grid)
        points = " ".join(
            f"{_fmt(px(float(gx)))},{_fmt(py(float(gy)))}"
            for gx, gy in zip(grid, fitted)
            if y_lo <= gy <= y_hi
        )
        out.append(
            f'<polyline class="trend" points="{points}" fill="none" '
            'stroke="#222222" stroke-width="1.5"/>'
        )

    # legend: color ramp for the chosen sigma plus omitted-row note
    legend_x = frame_right + 24
    out.append(
        f'<rect x="{legend_x}" y="{_MARGIN_TOP}" width="14" height="120" '
        'fill="url(#ramp)" stroke="#444444" stroke-width="0.5"/>'
    )
    out.append(
        f'<text x="{legend_x + 20}" y="{_MARGIN_TOP + 10}" font-family="sans-serif" '
        f'font-size="11">{c_hi:.3g}</text>'
    )
    out.append(
        f'<text x="{legend_x + 20}" y="{_MARGIN_TOP + 120}" font-family="sans-serif" '
        f'font-size="11">{c_lo:.3g}</text>'
    )
    out.append(
        f'<text x="{legend_x}" y="{_MARGIN_TOP + 140}" font-family="sans-serif" '
        f'font-size="11">{color_by}</text>'
    )
    out.append(
        f'<text x="{legend_x}" y="{_MARGIN_TOP + 160}" font-family="sans-serif" '
        f'font-size="11">{len(plotted)} runs</text>'
    )
    if omitted:
        out.append(
            f'<text x="{legend_x}" y="{_MARGIN_TOP + 176}" font-family="sans-serif" '
            f'font-size="11">{omitted} without spl omitted</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
