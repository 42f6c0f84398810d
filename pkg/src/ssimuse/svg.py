"""Hand-emitted SVG line charts (mean with std whiskers), no plotting deps.

Output is a plain text SVG with no timestamps or randomness, so identical
inputs always produce identical bytes.
"""

from __future__ import annotations

import math

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_MARGIN_LEFT = 64
_MARGIN_RIGHT = 24
_MARGIN_TOP = 36
_MARGIN_BOTTOM = 48


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def line_chart(path, *, title: str, x_labels: list[str],
               series: list[tuple[str, list[float], list[float]]],
               width: int = 640, height: int = 420) -> None:
    """Write a chart of one or more (label, means, stds) series.

    X positions are the categories in ``x_labels``; every series must carry
    one mean and one std per category.
    """
    if not series or not x_labels:
        raise ValueError("need at least one series and one x label")
    for label, means, stds in series:
        if len(means) != len(x_labels) or len(stds) != len(x_labels):
            raise ValueError(f"series {label!r} does not match the x labels")

    lows = [m - s for _, means, stds in series for m, s in zip(means, stds)
            if not math.isnan(m)]
    highs = [m + s for _, means, stds in series for m, s in zip(means, stds)
             if not math.isnan(m)]
    y_min = min(lows, default=0.0)
    y_max = max(highs, default=1.0)
    if y_max <= y_min:
        y_min, y_max = y_min - 0.5, y_max + 0.5
    pad = 0.05 * (y_max - y_min)
    y_min -= pad
    y_max += pad

    plot_w = width - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = height - _MARGIN_TOP - _MARGIN_BOTTOM

    def x_at(index: int) -> float:
        if len(x_labels) == 1:
            return _MARGIN_LEFT + plot_w / 2
        return _MARGIN_LEFT + plot_w * index / (len(x_labels) - 1)

    def y_at(value: float) -> float:
        return _MARGIN_TOP + plot_h * (1.0 - (value - y_min) / (y_max - y_min))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:g}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP}" x2="{_MARGIN_LEFT}" '
        f'y2="{_MARGIN_TOP + plot_h}" stroke="black"/>',
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP + plot_h}" '
        f'x2="{_MARGIN_LEFT + plot_w}" y2="{_MARGIN_TOP + plot_h}" stroke="black"/>',
    ]

    for tick in range(5):
        value = y_min + (y_max - y_min) * tick / 4
        y = y_at(value)
        parts.append(f'<line x1="{_MARGIN_LEFT - 4}" y1="{y:g}" x2="{_MARGIN_LEFT}" '
                     f'y2="{y:g}" stroke="black"/>')
        parts.append(f'<text x="{_MARGIN_LEFT - 8}" y="{y + 4:g}" '
                     f'text-anchor="end">{_fmt(value)}</text>')

    for index, label in enumerate(x_labels):
        x = x_at(index)
        base = _MARGIN_TOP + plot_h
        parts.append(f'<line x1="{x:g}" y1="{base}" x2="{x:g}" y2="{base + 4}" '
                     f'stroke="black"/>')
        parts.append(f'<text x="{x:g}" y="{base + 18}" text-anchor="middle">{label}</text>')

    for rank, (label, means, stds) in enumerate(series):
        color = _PALETTE[rank % len(_PALETTE)]
        points = " ".join(f"{x_at(i):g},{y_at(m):g}" for i, m in enumerate(means)
                          if not math.isnan(m))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        for i, (m, s) in enumerate(zip(means, stds)):
            if math.isnan(m):
                continue
            x = x_at(i)
            parts.append(f'<circle cx="{x:g}" cy="{y_at(m):g}" r="3" fill="{color}"/>')
            if s > 0:
                top, bottom = y_at(m + s), y_at(m - s)
                parts.append(f'<line x1="{x:g}" y1="{top:g}" x2="{x:g}" y2="{bottom:g}" '
                             f'stroke="{color}"/>')
                for cap in (top, bottom):
                    parts.append(f'<line x1="{x - 4:g}" y1="{cap:g}" x2="{x + 4:g}" '
                                 f'y2="{cap:g}" stroke="{color}"/>')
        legend_y = _MARGIN_TOP + 14 * rank
        legend_x = width - _MARGIN_RIGHT - 150
        parts.append(f'<line x1="{legend_x}" y1="{legend_y:g}" x2="{legend_x + 18}" '
                     f'y2="{legend_y:g}" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{legend_x + 24}" y="{legend_y + 4:g}">{label}</text>')

    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
