"""Minimal deterministic SVG emitters for line, scatter and bar charts.

Hand-rolled on purpose: output bytes depend only on the input data, so
report artifacts diff cleanly between runs.
"""

from __future__ import annotations

from pathlib import Path

WIDTH = 720
HEIGHT = 360
MARGIN = 50

_PALETTE = ["#1f6feb", "#d1242f", "#1a7f37", "#8250df", "#9a6700"]


def _scale(values: list[float], lo_px: float, hi_px: float) -> tuple[float, float, float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        hi = lo + 1.0
    k = (hi_px - lo_px) / (hi - lo)
    return lo, k, lo_px


def _axes(title: str, x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="monospace" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="18" text-anchor="middle" font-size="13">{title}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="#444"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="#444"/>',
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{x_lo:.4g}</text>',
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{x_hi:.4g}</text>',
        f'<text x="{MARGIN - 6}" y="{HEIGHT - MARGIN}" text-anchor="end">{y_lo:.4g}</text>',
        f'<text x="{MARGIN - 6}" y="{MARGIN + 4}" text-anchor="end">{y_hi:.4g}</text>',
    ]


def line_chart(series: list[tuple[str, list[tuple[float, float]]]], title: str, path: str | Path) -> None:
    """Polyline per (label, [(x, y), ...]) series, shared axes."""
    xs = [x for _, pts in series for x, _ in pts]
    ys = [y for _, pts in series for _, y in pts]
    if not xs:
        raise ValueError("nothing to plot")
    x0, kx, px0 = _scale(xs, MARGIN, WIDTH - MARGIN)
    y0, ky, py0 = _scale(ys, HEIGHT - MARGIN, MARGIN)
    parts = _axes(title, min(xs), max(xs), min(ys), max(ys))
    for i, (label, pts) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(
            f"{px0 + (x - x0) * kx:.2f},{py0 + (y - y0) * ky:.2f}" for x, y in pts
        )
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.2"/>')
        parts.append(
            f'<text x="{WIDTH - MARGIN}" y="{MARGIN + 14 * (i + 1)}" text-anchor="end" '
            f'fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def scatter(points: list[tuple[float, float]], title: str, path: str | Path) -> None:
    xs = [x for x, _ in points]
    ys = [y for _, y in points]
    if not xs:
        raise ValueError("nothing to plot")
    x0, kx, px0 = _scale(xs, MARGIN, WIDTH - MARGIN)
    y0, ky, py0 = _scale(ys, HEIGHT - MARGIN, MARGIN)
    parts = _axes(title, min(xs), max(xs), min(ys), max(ys))
    for x, y in points:
        parts.append(
            f'<circle cx="{px0 + (x - x0) * kx:.2f}" cy="{py0 + (y - y0) * ky:.2f}" '
            f'r="2" fill="#1f6feb" fill-opacity="0.6"/>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def bar_chart(labels: list[str], values: list[float], title: str, path: str | Path) -> None:
    if not labels:
        raise ValueError("nothing to plot")
    y0, ky, py0 = _scale([0.0, *values], HEIGHT - MARGIN, MARGIN)
    parts = _axes(title, 0, len(labels), min(0.0, *values), max(0.0, *values))
    span = (WIDTH - 2 * MARGIN) / len(labels)
    zero_px = py0 + (0.0 - y0) * ky
    for i, (label, value) in enumerate(zip(labels, values)):
        x = MARGIN + i * span
        top = py0 + (value - y0) * ky
        lo, hi = min(top, zero_px), max(top, zero_px)
        parts.append(
            f'<rect x="{x + span * 0.1:.2f}" y="{lo:.2f}" width="{span * 0.8:.2f}" '
            f'height="{max(hi - lo, 0.5):.2f}" fill="#1f6feb"/>'
        )
        parts.append(
            f'<text x="{x + span / 2:.2f}" y="{HEIGHT - MARGIN + 16}" text-anchor="end" '
            f'transform="rotate(-30 {x + span / 2:.2f} {HEIGHT - MARGIN + 16})">{label}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
