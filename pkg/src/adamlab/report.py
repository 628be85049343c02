"""Deterministic CSV tables and minimal hand-written SVG plots.

CSV is the canonical artifact: one header row, fixed column order, floats at
17 significant digits, so reruns with identical inputs are byte-identical.
SVG output is presentation-only (polylines, axes, tick labels) and carries no
timestamps or environment state.
"""

from __future__ import annotations

import math
from pathlib import Path


def fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row width {len(row)} != header width {len(header)}")
        lines.append(",".join(fmt_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_kv_report(path, mapping) -> None:
    """Flat key: value audit report (constants maps and the like)."""
    lines = [f"{k}: {fmt_value(v)}" for k, v in mapping.items()]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 72, 24, 36, 52
_COLORS = ("#1f6fb2", "#c94f2a", "#3a9a4c", "#7d5ba6", "#b08b2e")


def _ticks(lo: float, hi: float, n: int = 5):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    span = hi - lo
    raw = span / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-12 * span:
        ticks.append(v)
        v += step
    return ticks or [lo]


class SvgPlot:
    """Line/scatter plot on a fixed canvas with optional log axes."""

    def __init__(self, title="", xlabel="", ylabel="", logx=False, logy=False):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.logx, self.logy = logx, logy
        self.series = []  # (xs, ys, label, kind)
        self.hlines = []  # (y, label)

    def add_line(self, xs, ys, label=""):
        self.series.append((list(xs), list(ys), label, "line"))

    def add_scatter(self, xs, ys, label=""):
        self.series.append((list(xs), list(ys), label, "scatter"))

    def add_hline(self, y, label=""):
        self.hlines.append((float(y), label))

    def _transform_data(self):
        pts = []
        for xs, ys, label, kind in self.series:
            txy = [
                (math.log10(x) if self.logx else x, math.log10(y) if self.logy else y)
                for x, y in zip(xs, ys)
                if math.isfinite(x) and math.isfinite(y)
                and (not self.logx or x > 0) and (not self.logy or y > 0)
            ]
            pts.append((txy, label, kind))
        hl = [
            (math.log10(y) if self.logy else y, label)
            for y, label in self.hlines
            if not self.logy or y > 0
        ]
        return pts, hl

    def render(self) -> str:
        pts, hlines = self._transform_data()
        all_x = [p[0] for txy, _, _ in pts for p in txy]
        all_y = [p[1] for txy, _, _ in pts for p in txy] + [y for y, _ in hlines]
        if not all_x:
            all_x, all_y = [0.0, 1.0], [0.0, 1.0]
        lo_x, hi_x = min(all_x), max(all_x)
        lo_y, hi_y = min(all_y), max(all_y)
        if hi_x == lo_x:
            hi_x = lo_x + 1.0
        if hi_y == lo_y:
            hi_y = lo_y + 1.0
        pad_y = 0.06 * (hi_y - lo_y)
        lo_y, hi_y = lo_y - pad_y, hi_y + pad_y

        def px(x):
            return _ML + (x - lo_x) / (hi_x - lo_x) * (_W - _ML - _MR)

        def py(y):
            return _H - _MB - (y - lo_y) / (hi_y - lo_y) * (_H - _MT - _MB)

        def tick_text(v):
            shown = 10.0 ** v if (self.logx or self.logy) else v
            return f"{shown:.4g}"

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}" font-family="monospace" font-size="11">',
            f'<rect width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="13">{self.title}</text>',
        ]
        axis = 'stroke="black" stroke-width="1"'
        out.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" {axis}/>')
        out.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" {axis}/>')
        for tx in _ticks(lo_x, hi_x):
            out.append(f'<line x1="{px(tx):.1f}" y1="{_H - _MB}" x2="{px(tx):.1f}" y2="{_H - _MB + 4}" {axis}/>')
            label = f"{10.0 ** tx:.4g}" if self.logx else f"{tx:.4g}"
            out.append(
                f'<text x="{px(tx):.1f}" y="{_H - _MB + 16}" text-anchor="middle">{label}</text>'
            )
        for ty in _ticks(lo_y, hi_y):
            out.append(f'<line x1="{_ML - 4}" y1="{py(ty):.1f}" x2="{_ML}" y2="{py(ty):.1f}" {axis}/>')
            label = f"{10.0 ** ty:.4g}" if self.logy else f"{ty:.4g}"
            out.append(
                f'<text x="{_ML - 6}" y="{py(ty) + 4:.1f}" text-anchor="end">{label}</text>'
            )
        out.append(
            f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 12}" text-anchor="middle">{self.xlabel}</text>'
        )
        out.append(
            f'<text x="16" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.1f})">{self.ylabel}</text>'
        )
        for y, label in hlines:
            out.append(
                f'<line x1="{_ML}" y1="{py(y):.1f}" x2="{_W - _MR}" y2="{py(y):.1f}" '
                f'stroke="#888888" stroke-width="1" stroke-dasharray="6 4"/>'
            )
            if label:
                out.append(f'<text x="{_W - _MR - 4}" y="{py(y) - 4:.1f}" text-anchor="end" fill="#555555">{label}</text>')
        legend_y = _MT + 6
        for idx, (txy, label, kind) in enumerate(pts):
            color = _COLORS[idx % len(_COLORS)]
            if kind == "line" and len(txy) > 1:
                coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in txy)
                out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            else:
                for x, y in txy:
                    out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.4" fill="{color}"/>')
            if label:
                out.append(f'<text x="{_W - _MR - 4}" y="{legend_y + 6}" text-anchor="end" fill="{color}">{label}</text>')
                legend_y += 14
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.render())
