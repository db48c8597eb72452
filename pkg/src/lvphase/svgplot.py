"""Minimal deterministic SVG renderer for phase-transition curves.

Byte-identical output for identical input: no timestamps, no generated ids,
fixed float formatting.  Elements carry ``data-role`` attributes so tests
and downstream tooling can locate them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

WIDTH, HEIGHT = 840, 520
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 24, 44, 56
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")
RULE_COLOR = "#d62728"
REF_COLORS = ("#2ca02c", "#d62728", "#9467bd")


@dataclass
class PlotCurve:
    """One curve: raw points, smoothed line, optional confidence half-widths."""

    label: str
    x: np.ndarray
    raw: np.ndarray
    smoothed: np.ndarray
    half_width: np.ndarray | None = None


@dataclass
class PlotSpec:
    """Everything the renderer needs; rules are vertical dashed lines."""

    curves: list[PlotCurve]
    title: str = ""
    x_label: str = ""
    y_label: str = "proportion feasible"
    rules: dict[str, float] = field(default_factory=dict)
    ref_lines: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)


def _f(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, count: int = 6) -> np.ndarray:
    return np.linspace(lo, hi, count)


def render(spec: PlotSpec) -> str:
    """Render the plot spec to SVG text."""
    if not spec.curves:
        raise ConfigurationError("nothing to plot")
    spans = [c.x for c in spec.curves]
    if spec.rules:
        spans.append(np.array(list(spec.rules.values())))
    xs = np.concatenate(spans)
    x_lo, x_hi = float(xs.min()), float(xs.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    y_lo, y_hi = -0.02, 1.02

    inner_w = WIDTH - MARGIN_L - MARGIN_R
    inner_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v: float) -> float:
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * inner_w

    def sy(v: float) -> float:
        return MARGIN_T + (y_hi - v) / (y_hi - y_lo) * inner_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<rect data-role="frame" x="{MARGIN_L}" y="{MARGIN_T}" width="{inner_w}" '
        f'height="{inner_h}" fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    if spec.title:
        out.append(
            f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-family="monospace" '
            f'font-size="15" fill="#111111">{spec.title}</text>'
        )

    for tv in _ticks(x_lo, x_hi):
        px = sx(tv)
        out.append(
            f'<line x1="{_f(px)}" y1="{HEIGHT - MARGIN_B}" x2="{_f(px)}" '
            f'y2="{HEIGHT - MARGIN_B + 5}" stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_f(px)}" y="{HEIGHT - MARGIN_B + 20}" text-anchor="middle" '
            f'font-family="monospace" font-size="11" fill="#333333">{tv:.4g}</text>'
        )
    for tv in _ticks(0.0, 1.0):
        py = sy(tv)
        out.append(
            f'<line x1="{MARGIN_L - 5}" y1="{_f(py)}" x2="{MARGIN_L}" y2="{_f(py)}" '
            f'stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{MARGIN_L - 9}" y="{_f(py + 4)}" text-anchor="end" '
            f'font-family="monospace" font-size="11" fill="#333333">{tv:.1f}</text>'
        )
    if spec.x_label:
        out.append(
            f'<text x="{MARGIN_L + inner_w // 2}" y="{HEIGHT - 12}" text-anchor="middle" '
            f'font-family="monospace" font-size="13" fill="#111111">{spec.x_label}</text>'
        )
    if spec.y_label:
        out.append(
            f'<text x="18" y="{MARGIN_T + inner_h // 2}" text-anchor="middle" '
            f'font-family="monospace" font-size="13" fill="#111111" '
            f'transform="rotate(-90 18 {MARGIN_T + inner_h // 2})">{spec.y_label}</text>'
        )

    for i, (label, (rx, ry)) in enumerate(sorted(spec.ref_lines.items())):
        color = REF_COLORS[i % len(REF_COLORS)]
        pts = " ".join(f"{_f(sx(a))},{_f(sy(b))}" for a, b in zip(rx, ry))
        out.append(
            f'<polyline data-role="ref-{label}" points="{pts}" fill="none" '
            f'stroke="{color}" stroke-width="1.5" stroke-dasharray="2,3"/>'
        )

    for i, curve in enumerate(spec.curves):
        color = PALETTE[i % len(PALETTE)]
        if curve.half_width is not None:
            upper = np.clip(curve.raw + curve.half_width, 0.0, 1.0)
            lower = np.clip(curve.raw - curve.half_width, 0.0, 1.0)
            ring = (
                [f"{_f(sx(a))},{_f(sy(b))}" for a, b in zip(curve.x, upper)]
                + [f"{_f(sx(a))},{_f(sy(b))}" for a, b in zip(curve.x[::-1], lower[::-1])]
            )
            out.append(
                f'<polygon data-role="confidence-band" points="{" ".join(ring)}" '
                f'fill="{color}" fill-opacity="0.15" stroke="none"/>'
            )
        pts = " ".join(f"{_f(sx(a))},{_f(sy(b))}" for a, b in zip(curve.x, curve.smoothed))
        out.append(
            f'<polyline data-role="smoothed-line" points="{pts}" fill="none" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        for a, b in zip(curve.x, curve.raw):
            out.append(
                f'<circle data-role="raw-point" cx="{_f(sx(a))}" cy="{_f(sy(b))}" r="2.5" '
                f'fill="{color}" fill-opacity="0.8"/>'
            )
        out.append(
            f'<text x="{WIDTH - MARGIN_R - 8}" y="{MARGIN_T + 18 + 16 * i}" text-anchor="end" '
            f'font-family="monospace" font-size="12" fill="{color}">{curve.label}</text>'
        )

    for label, rx in sorted(spec.rules.items()):
        px = sx(rx)
        out.append(
            f'<line data-role="rule-{label}" x1="{_f(px)}" y1="{MARGIN_T}" x2="{_f(px)}" '
            f'y2="{HEIGHT - MARGIN_B}" stroke="{RULE_COLOR}" stroke-width="1.5" '
            f'stroke-dasharray="5,4"/>'
        )
        out.append(
            f'<text x="{_f(px + 4)}" y="{MARGIN_T + 14}" font-family="monospace" '
            f'font-size="11" fill="{RULE_COLOR}">{label}</text>'
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"
