"""Self-contained SVG plotting.

Just enough for the experiment reports: line and scatter series on linear or
log-scale y axes, with ticks, grid, labels, and a legend. Output depends only
on the input data, never on clock or environment, so plot files are
reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_WIDTH = 720
_HEIGHT = 480
_MARGIN_LEFT = 78
_MARGIN_RIGHT = 24
_MARGIN_TOP = 46
_MARGIN_BOTTOM = 62


@dataclass(frozen=True, eq=False)
class Series:
    """One plotted data set; ``mode`` is 'line' or 'points'."""

    label: str
    x: Sequence[float]
    y: Sequence[float]
    mode: str = "line"


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    raw = (hi - lo) / max(target, 1)
    magnitude = 10.0 ** math.floor(math.log10(raw))
    step = 10.0 * magnitude
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * magnitude:
            step = mult * magnitude
            break
    first = math.ceil(lo / step) * step
    ticks = []
    value = first
    while value <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(value) < 1e-12 * step else value)
        value += step
    return ticks


def _decade_ticks(lo_exp: int, hi_exp: int) -> list[int]:
    span = hi_exp - lo_exp
    step = max(1, math.ceil(span / 8))
    return list(range(lo_exp, hi_exp + 1, step))


def _fmt_tick(value: float) -> str:
    return "%g" % value


def render_plot(
    path: str | Path,
    series: Sequence[Series],
    *,
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    log_y: bool = False,
) -> None:
    """Render series to an SVG file.

    Non-finite points are dropped; with ``log_y`` nonpositive y values are
    dropped as well. Raises ValueError when nothing remains to plot.
    """
    cleaned: list[tuple[Series, list[float], list[float]]] = []
    for entry in series:
        xs, ys = [], []
        for x, y in zip(entry.x, entry.y):
            x, y = float(x), float(y)
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if log_y and y <= 0.0:
                continue
            xs.append(x)
            ys.append(y)
        if xs:
            cleaned.append((entry, xs, ys))
    if not cleaned:
        raise ValueError("no finite data points to plot")

    all_x = [x for _, xs, _ in cleaned for x in xs]
    all_y = [y for _, _, ys in cleaned for y in ys]
    x_lo, x_hi = min(all_x), max(all_x)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    pad = 0.04 * (x_hi - x_lo)
    x_lo, x_hi = x_lo - pad, x_hi + pad

    if log_y:
        t_lo = math.log10(min(all_y))
        t_hi = math.log10(max(all_y))
        if t_hi == t_lo:
            t_lo, t_hi = t_lo - 0.5, t_hi + 0.5
        tick_exps = _decade_ticks(math.floor(t_lo), math.ceil(t_hi))
        t_lo = min(t_lo, tick_exps[0])
        t_hi = max(t_hi, tick_exps[-1])
        y_ticks = [(float(e), "1e%d" % e) for e in tick_exps]
        transform = math.log10
        y_lo, y_hi = t_lo, t_hi
    else:
        y_lo, y_hi = min(all_y), max(all_y)
        if y_hi == y_lo:
            y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
        pad = 0.06 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad
        y_ticks = [(v, _fmt_tick(v)) for v in _nice_ticks(y_lo, y_hi)]
        transform = float

    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def sx(x: float) -> float:
        return _MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        t = transform(y)
        return _MARGIN_TOP + (y_hi - t) / (y_hi - y_lo) * plot_h

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">'
    )
    parts.append(
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>'
    )
    if title:
        parts.append(
            f'<text x="{_WIDTH / 2:.1f}" y="26" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{escape(title)}</text>'
        )

    # Axes box.
    parts.append(
        f'<rect x="{_MARGIN_LEFT}" y="{_MARGIN_TOP}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="#333" stroke-width="1"/>'
    )

    for tick in _nice_ticks(x_lo, x_hi):
        px = sx(tick)
        parts.append(
            f'<line x1="{px:.2f}" y1="{_MARGIN_TOP}" x2="{px:.2f}" '
            f'y2="{_MARGIN_TOP + plot_h}" stroke="#ddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{_MARGIN_TOP + plot_h + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f"{escape(_fmt_tick(tick))}</text>"
        )
    for value, label in y_ticks:
        if not y_lo <= value <= y_hi:
            continue
        py = _MARGIN_TOP + (y_hi - value) / (y_hi - y_lo) * plot_h
        parts.append(
            f'<line x1="{_MARGIN_LEFT}" y1="{py:.2f}" '
            f'x2="{_MARGIN_LEFT + plot_w}" y2="{py:.2f}" '
            f'stroke="#ddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_LEFT - 6}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{escape(label)}</text>'
        )

    if x_label:
        parts.append(
            f'<text x="{_MARGIN_LEFT + plot_w / 2:.1f}" y="{_HEIGHT - 16}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="13">'
            f"{escape(x_label)}</text>"
        )
    if y_label:
        cy = _MARGIN_TOP + plot_h / 2
        parts.append(
            f'<text x="20" y="{cy:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 20 {cy:.1f})">{escape(y_label)}</text>'
        )

    for index, (entry, xs, ys) in enumerate(cleaned):
        color = _PALETTE[index % len(_PALETTE)]
        if entry.mode == "line":
            points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
            parts.append(
                f'<polyline points="{points}" fill="none" stroke="{color}" '
                f'stroke-width="1.8"/>'
            )
        elif entry.mode == "points":
            for x, y in zip(xs, ys):
                parts.append(
                    f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                    f'fill="{color}" fill-opacity="0.75"/>'
                )
        else:
            raise ValueError(f"series mode must be 'line' or 'points', got {entry.mode!r}")

    legend_y = _MARGIN_TOP + 14
    for index, (entry, _, _) in enumerate(cleaned):
        if not entry.label:
            continue
        color = _PALETTE[index % len(_PALETTE)]
        ly = legend_y + 16 * index
        lx = _MARGIN_LEFT + plot_w - 150
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2.5"/>'
        )
        parts.append(
            f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{escape(entry.label)}</text>'
        )

    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
