"""Minimal deterministic SVG line charts for scenario results.

No plotting dependency: the charts are simple enough (a handful of
series, point markers, a legend) that emitting SVG primitives directly keeps
the output byte-stable across environments, which the determinism
contract needs.
"""
from __future__ import annotations

import math

_WIDTH, _HEIGHT = 640, 420
_ML, _MR, _MT, _MB = 70, 25, 25, 55

_COLORS = {
    "honest": "#1f77b4",
    "poisoned": "#d62728",
    "open_loop": "#2ca02c",
}

_AXIS_LABELS = {
    "txpower": ("Number of receivers K", "Transmit power fraction"),
    "avgsnr": ("Transmit power P (dB)", "Average SNR (dB)"),
    "minrate": ("Number of receivers K", "Minimum rate (bits/s/Hz)"),
}


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list:
    if not math.isfinite(lo) or not math.isfinite(hi):
        return [0.0, 1.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks or [lo, hi]


def _series_from(result) -> dict:
    """curve -> list of (x, y) with NaN means dropped; y in display units."""
    series: dict = {}
    for agg in result.aggregates:
        y = agg.mean
        if result.figure == "avgsnr":
            y = 10.0 * math.log10(y) if y > 0 else float("nan")
        if math.isnan(y):
            continue
        series.setdefault(agg.curve, []).append((agg.x, y))
    return series


def render_plot(result, path) -> None:
    """Write an SVG line chart, one series per curve in the result."""
    if not result.aggregates:
        raise ValueError("empty result")
    series = _series_from(result)
    xs = [p[0] for pts in series.values() for p in pts]
    ys = [p[1] for pts in series.values() for p in pts]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi - x_lo < 1e-12:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad_y = 0.06 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    pw = _WIDTH - _ML - _MR
    ph = _HEIGHT - _MT - _MB

    def px(x: float) -> float:
        return _ML + pw * (x - x_lo) / (x_hi - x_lo)

    def py(y: float) -> float:
        return _MT + ph * (1.0 - (y - y_lo) / (y_hi - y_lo))

    xlabel, ylabel = _AXIS_LABELS[result.figure]
    out = []
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
               f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">')
    out.append(f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>')
    out.append(f'<g font-family="sans-serif" font-size="12" fill="black">')

    # frame
    out.append(f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" '
               f'fill="none" stroke="black" stroke-width="1"/>')
    for t in _nice_ticks(x_lo, x_hi):
        if t < x_lo - 1e-12 or t > x_hi + 1e-12:
            continue
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{_MT + ph}" x2="{x:.2f}" '
                   f'y2="{_MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{_MT + ph + 18}" '
                   f'text-anchor="middle">{t:.6g}</text>')
    for t in _nice_ticks(y_lo, y_hi):
        if t < y_lo - 1e-12 or t > y_hi + 1e-12:
            continue
        y = py(t)
        out.append(f'<line x1="{_ML - 5}" y1="{y:.2f}" x2="{_ML}" '
                   f'y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{y + 4:.2f}" '
                   f'text-anchor="end">{t:.6g}</text>')
    out.append(f'<text x="{_ML + pw / 2:.2f}" y="{_HEIGHT - 12}" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{_MT + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_MT + ph / 2:.2f})">{ylabel}</text>')

    # series
    for curve in sorted(series):
        color = _COLORS.get(curve, "#7f7f7f")
        pts = series[curve]
        if len(pts) > 1:
            coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
            out.append(f'<polyline points="{coords}" fill="none" '
                       f'stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" '
                       f'fill="{color}"/>')

    # legend
    ly = _MT + 10
    for curve in sorted(series):
        color = _COLORS.get(curve, "#7f7f7f")
        lx = _ML + pw - 130
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{lx + 28}" y="{ly + 4}">{curve}</text>')
        ly += 16

    out.append("</g>")
    out.append("</svg>")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
