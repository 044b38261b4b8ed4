"""Minimal SVG 1.1 emission: per-cluster small multiples and a contingency
heatmap. No plotting dependency; output is byte-deterministic."""

from __future__ import annotations

import numpy as np

PANEL_W = 280
PANEL_H = 170
PAD = 14
TITLE_H = 22
PANELS_PER_ROW = 3

MEMBER_STYLE = 'fill="none" stroke="#8a8f98" stroke-width="1" stroke-opacity="0.45"'
CENTER_STYLE = 'fill="none" stroke="#d62728" stroke-width="2"'
FRAME_STYLE = 'fill="none" stroke="#444444" stroke-width="1"'
TEXT_STYLE = 'font-family="sans-serif" font-size="12" fill="#222222"'


def _header(width: int, height: int) -> str:
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">\n'
    )


def _polyline(xs, ys, style: str) -> str:
    points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    return f'<polyline points="{points}" {style}/>\n'


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo
    if span <= 0:
        span = 1.0
    return out_lo + (np.asarray(values) - lo) / span * (out_hi - out_lo)


def cluster_small_multiples(title: str, clusters) -> str:
    """One panel per cluster: member traces in grey, the center in red.

    ``clusters`` is a sequence of (label, member_arrays, center_array).
    The y-range is shared across panels so shapes are comparable.
    """
    clusters = list(clusters)
    all_vals = [c for _, members, center in clusters for c in list(members) + [center]]
    lo = min(float(v.min()) for v in all_vals)
    hi = max(float(v.max()) for v in all_vals)
    margin = 0.05 * max(hi - lo, 1e-9)
    lo -= margin
    hi += margin

    k = len(clusters)
    rows = (k + PANELS_PER_ROW - 1) // PANELS_PER_ROW
    cols = min(k, PANELS_PER_ROW)
    width = PAD + cols * (PANEL_W + PAD)
    height = TITLE_H + PAD + rows * (PANEL_H + TITLE_H + PAD)

    parts = [_header(width, height)]
    parts.append(f'<text x="{PAD}" y="{TITLE_H - 6}" {TEXT_STYLE}>{title}</text>\n')
    for idx, (label, members, center) in enumerate(clusters):
        row, col = divmod(idx, PANELS_PER_ROW)
        x0 = PAD + col * (PANEL_W + PAD)
        y0 = TITLE_H + PAD + row * (PANEL_H + TITLE_H + PAD)
        parts.append(
            f'<text x="{x0}" y="{y0 + 12}" {TEXT_STYLE}>'
            f"cluster {label} (n={len(members)})</text>\n"
        )
        py0 = y0 + TITLE_H
        parts.append(
            f'<rect x="{x0}" y="{py0}" width="{PANEL_W}" height="{PANEL_H}" '
            f"{FRAME_STYLE}/>\n"
        )
        m = center.size
        xs = _scale(np.arange(m), 0, m - 1 if m > 1 else 1, x0 + 2, x0 + PANEL_W - 2)
        for trace in members:
            ys = _scale(trace, lo, hi, py0 + PANEL_H - 2, py0 + 2)
            parts.append(_polyline(xs, ys, MEMBER_STYLE))
        ys = _scale(center, lo, hi, py0 + PANEL_H - 2, py0 + 2)
        parts.append(_polyline(xs, ys, CENTER_STYLE))
    parts.append("</svg>\n")
    return "".join(parts)


def agreement_heatmap(table: np.ndarray, row_name: str, col_name: str) -> str:
    """Contingency heatmap with per-cell counts."""
    table = np.asarray(table)
    cell = 64
    left = 90
    top = 56
    width = left + table.shape[1] * cell + PAD
    height = top + table.shape[0] * cell + PAD
    peak = max(int(table.max()), 1)

    parts = [_header(width, height)]
    parts.append(
        f'<text x="{left}" y="18" {TEXT_STYLE}>{row_name} (rows) vs '
        f"{col_name} (columns)</text>\n"
    )
    for y in range(table.shape[1]):
        parts.append(
            f'<text x="{left + y * cell + cell / 2:.1f}" y="{top - 8}" '
            f'text-anchor="middle" {TEXT_STYLE}>{y}</text>\n'
        )
    for x in range(table.shape[0]):
        parts.append(
            f'<text x="{left - 10}" y="{top + x * cell + cell / 2 + 4:.1f}" '
            f'text-anchor="end" {TEXT_STYLE}>{x}</text>\n'
        )
        for y in range(table.shape[1]):
            count = int(table[x, y])
            opacity = 0.08 + 0.92 * count / peak
            cx = left + y * cell
            cy = top + x * cell
            parts.append(
                f'<rect x="{cx}" y="{cy}" width="{cell}" height="{cell}" '
                f'fill="#1f77b4" fill-opacity="{opacity:.3f}" '
                f'stroke="#444444" stroke-width="1"/>\n'
            )
            color = "#ffffff" if count / peak > 0.55 else "#222222"
            parts.append(
                f'<text x="{cx + cell / 2:.1f}" y="{cy + cell / 2 + 4:.1f}" '
                f'text-anchor="middle" font-family="sans-serif" font-size="13" '
                f'fill="{color}">{count}</text>\n'
            )
    parts.append("</svg>\n")
    return "".join(parts)
