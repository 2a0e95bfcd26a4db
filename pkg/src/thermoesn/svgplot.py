"""Dependency-free deterministic SVG line/phase plots from CSV columns.

The output is a function of the input bytes alone (no timestamps, no
environment lookups), so identical inputs give byte-identical SVG files.
Axes and ticks are drawn with ``<line>`` elements; each plotted series is
exactly one ``<polyline>``.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigError, InvalidArgumentError
from .series import read_csv_columns

WIDTH = 800
HEIGHT = 500
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64.0, 16.0, 16.0, 40.0
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22")
N_TICKS = 5


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _scale(lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    return lo, hi


class _Frame:
    """Affine map from data space to the SVG viewport."""

    def __init__(self, x: np.ndarray, ys: list[np.ndarray]):
        self.x0, self.x1 = _scale(float(np.min(x)), float(np.max(x)))
        lo = min(float(np.min(y)) for y in ys)
        hi = max(float(np.max(y)) for y in ys)
        self.y0, self.y1 = _scale(lo, hi)

    def px(self, v: float) -> float:
        span = WIDTH - MARGIN_L - MARGIN_R
        return MARGIN_L + (v - self.x0) / (self.x1 - self.x0) * span

    def py(self, v: float) -> float:
        span = HEIGHT - MARGIN_T - MARGIN_B
        return HEIGHT - MARGIN_B - (v - self.y0) / (self.y1 - self.y0) * span


def _axis_elements(frame: _Frame, x_label: str, y_label: str) -> list[str]:
    parts = []
    x_axis_y = HEIGHT - MARGIN_B
    parts.append(f'<line x1="{MARGIN_L}" y1="{x_axis_y}" '
                 f'x2="{WIDTH - MARGIN_R}" y2="{x_axis_y}" '
                 'stroke="black" stroke-width="1"/>')
    parts.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" '
                 f'x2="{MARGIN_L}" y2="{x_axis_y}" '
                 'stroke="black" stroke-width="1"/>')
    for k in range(N_TICKS):
        f = k / (N_TICKS - 1)
        xv = frame.x0 + f * (frame.x1 - frame.x0)
        yv = frame.y0 + f * (frame.y1 - frame.y0)
        xp, yp = frame.px(xv), frame.py(yv)
        parts.append(f'<line x1="{xp:.2f}" y1="{x_axis_y}" x2="{xp:.2f}" '
                     f'y2="{x_axis_y + 5}" stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{xp:.2f}" y="{x_axis_y + 18}" '
                     f'font-size="11" text-anchor="middle">{_fmt(xv)}</text>')
        parts.append(f'<line x1="{MARGIN_L - 5}" y1="{yp:.2f}" '
                     f'x2="{MARGIN_L}" y2="{yp:.2f}" '
                     'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{yp + 4:.2f}" '
                     f'font-size="11" text-anchor="end">{_fmt(yv)}</text>')
    parts.append(f'<text x="{(MARGIN_L + WIDTH - MARGIN_R) / 2:.2f}" '
                 f'y="{HEIGHT - 6}" font-size="12" '
                 f'text-anchor="middle">{x_label}</text>')
    parts.append(f'<text x="14" y="{(MARGIN_T + HEIGHT - MARGIN_B) / 2:.2f}" '
                 f'font-size="12" text-anchor="middle" '
                 f'transform="rotate(-90 14 '
                 f'{(MARGIN_T + HEIGHT - MARGIN_B) / 2:.2f})">{y_label}</text>')
    return parts


def _polyline(frame: _Frame, x: np.ndarray, y: np.ndarray,
              color: str) -> str:
    pts = " ".join(f"{frame.px(xi):.2f},{frame.py(yi):.2f}"
                   for xi, yi in zip(x, y))
    return (f'<polyline fill="none" stroke="{color}" stroke-width="1.2" '
            f'points="{pts}"/>')


def render_plot(header: list[str], rows: np.ndarray, columns: list[str],
                *, phase: bool = False, manifest: str | None = None) -> str:
    """Render columns of a table to an SVG document string.

    Line mode plots each requested column against the first requested
    column; phase mode takes exactly two columns as (x, y).
    """
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise InvalidArgumentError("plot needs a non-empty table")
    index = {}
    for name in columns:
        if name not in header:
            raise ConfigError(f"column '{name}' not found "
                              f"(available: {', '.join(header)})")
        index[name] = header.index(name)
    if phase:
        if len(columns) != 2:
            raise ConfigError("phase mode takes exactly two columns")
        series = [(columns[1], rows[:, index[columns[0]]],
                   rows[:, index[columns[1]]])]
        x_label, y_label = columns[0], columns[1]
    else:
        if len(columns) < 2:
            raise ConfigError("line mode takes an x column and at least one y")
        x = rows[:, index[columns[0]]]
        series = [(name, x, rows[:, index[name]]) for name in columns[1:]]
        x_label = columns[0]
        y_label = columns[1] if len(columns) == 2 else ""
    frame = _Frame(series[0][1], [y for _, _, y in series])
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
             f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">']
    if manifest:
        parts.append(f"<!-- {manifest} -->")
    parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    parts.extend(_axis_elements(frame, x_label, y_label))
    for k, (name, x, y) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        parts.append(_polyline(frame, x, y, color))
        parts.append(f'<text x="{WIDTH - MARGIN_R - 6}" '
                     f'y="{MARGIN_T + 16 + 16 * k}" font-size="12" '
                     f'text-anchor="end" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot(csv_path, columns: list[str], out_svg, *,
              phase: bool = False, manifest: str | None = None) -> None:
    """Plot CSV columns to an SVG file (deterministic bytes)."""
    header, rows = read_csv_columns(csv_path)
    svg = render_plot(header, rows, columns, phase=phase, manifest=manifest)
    with open(out_svg, "w", encoding="ascii") as fh:
        fh.write(svg)
