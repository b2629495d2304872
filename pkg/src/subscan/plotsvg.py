"""Hand-emitted SVG charts for experiment result CSVs.

One panel per (size, permutation kind): p-value against the signal
multiplier, with a median line, a min-max band, the attainable floor as a
dashed horizontal line, and a dashed vertical reference at multiplier 1.
No plotting library is involved; the file is assembled from primitives.
"""

from __future__ import annotations

import math
from statistics import median

from .experiment import read_rows

__all__ = ["emit_plot"]

_W, _H = 1280, 720  # fixed 16:9 canvas
_MARGIN = dict(left=62, right=16, top=34, bottom=44)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


class _Panel:
    def __init__(self, x: float, y: float, w: float, h: float, title: str):
        self.x, self.y, self.w, self.h = x, y, w, h
        self.title = title
        self.inner_x = x + _MARGIN["left"]
        self.inner_y = y + _MARGIN["top"]
        self.inner_w = max(w - _MARGIN["left"] - _MARGIN["right"], 10)
        self.inner_h = max(h - _MARGIN["top"] - _MARGIN["bottom"], 10)

    def sx(self, v: float, lo: float, hi: float) -> float:
        frac = 0.5 if hi == lo else (v - lo) / (hi - lo)
        return self.inner_x + frac * self.inner_w

    def sy(self, v: float, lo: float = 0.0, hi: float = 1.0) -> float:
        frac = 0.5 if hi == lo else (v - lo) / (hi - lo)
        return self.inner_y + (1.0 - frac) * self.inner_h


def _panel_elements(panel: _Panel, rows, xlo: float, xhi: float) -> list[str]:
    out = []
    px, py, pw, ph = panel.inner_x, panel.inner_y, panel.inner_w, panel.inner_h
    out.append(
        f'<rect x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(pw)}" height="{_fmt(ph)}" '
        'fill="white" stroke="#444" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{_fmt(px + pw / 2)}" y="{_fmt(panel.y + 22)}" text-anchor="middle" '
        f'font-size="15" font-family="sans-serif">{panel.title}</text>'
    )
    for yt in (0.0, 0.25, 0.5, 0.75, 1.0):
        yy = panel.sy(yt)
        out.append(
            f'<line x1="{_fmt(px - 4)}" y1="{_fmt(yy)}" x2="{_fmt(px)}" y2="{_fmt(yy)}" '
            'stroke="#444" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(px - 8)}" y="{_fmt(yy + 4)}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">{_fmt(yt)}</text>'
        )
    xticks = sorted({row.multiplier for row in rows}) or [xlo, xhi]
    for xt in xticks:
        xx = panel.sx(xt, xlo, xhi)
        out.append(
            f'<line x1="{_fmt(xx)}" y1="{_fmt(py + ph)}" x2="{_fmt(xx)}" '
            f'y2="{_fmt(py + ph + 4)}" stroke="#444" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(xx)}" y="{_fmt(py + ph + 17)}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif">{_fmt(xt)}</text>'
        )
    out.append(
        f'<text x="{_fmt(px + pw / 2)}" y="{_fmt(py + ph + 34)}" text-anchor="middle" '
        'font-size="12" font-family="sans-serif">signal multiplier</text>'
    )
    if not rows:
        return out

    by_mult: dict[float, list[float]] = {}
    for row in rows:
        by_mult.setdefault(row.multiplier, []).append(row.pvalue)
    mults = sorted(by_mult)
    med = [(x, median(by_mult[x])) for x in mults]
    lo_pts = [(x, min(by_mult[x])) for x in mults]
    hi_pts = [(x, max(by_mult[x])) for x in mults]

    if xlo <= 1.0 <= xhi:
        xx = panel.sx(1.0, xlo, xhi)
        out.append(
            f'<line x1="{_fmt(xx)}" y1="{_fmt(py)}" x2="{_fmt(xx)}" y2="{_fmt(py + ph)}" '
            'stroke="#999" stroke-width="1" stroke-dasharray="3,3"/>'
        )
    floor = rows[0].floor
    yy = panel.sy(floor)
    out.append(
        f'<line x1="{_fmt(px)}" y1="{_fmt(yy)}" x2="{_fmt(px + pw)}" y2="{_fmt(yy)}" '
        'stroke="#d62728" stroke-width="1" stroke-dasharray="5,3"/>'
    )
    if len(mults) > 1:
        band = [
            f"{_fmt(panel.sx(x, xlo, xhi))},{_fmt(panel.sy(v))}" for x, v in hi_pts
        ] + [
            f"{_fmt(panel.sx(x, xlo, xhi))},{_fmt(panel.sy(v))}"
            for x, v in reversed(lo_pts)
        ]
        out.append(
            f'<polygon points="{" ".join(band)}" fill="#9ecae1" fill-opacity="0.45" '
            'stroke="none"/>'
        )
        pts = " ".join(
            f"{_fmt(panel.sx(x, xlo, xhi))},{_fmt(panel.sy(v))}" for x, v in med
        )
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="#08519c" stroke-width="2"/>'
        )
    for x, v in med:
        out.append(
            f'<circle cx="{_fmt(panel.sx(x, xlo, xhi))}" cy="{_fmt(panel.sy(v))}" '
            'r="3" fill="#08519c"/>'
        )
    return out


def emit_plot(csv_path, out_path) -> None:
    """Render the CSV at ``csv_path`` into an SVG file at ``out_path``."""
    _, rows = read_rows(csv_path)
    panels: dict[tuple[int, int, str], list] = {}
    for row in rows:
        panels.setdefault((row.m, row.n, row.kind), []).append(row)
    keys = sorted(panels) or [None]

    mults = sorted({row.multiplier for row in rows})
    if mults:
        span = (mults[-1] - mults[0]) or 0.25
        xlo, xhi = mults[0] - 0.06 * span, mults[-1] + 0.06 * span
    else:
        xlo, xhi = 0.5, 1.6

    ncols = min(2, len(keys))
    nrows = math.ceil(len(keys) / ncols)
    pw, ph = _W / ncols, _H / nrows
    body = []
    for i, key in enumerate(keys):
        r, c = divmod(i, ncols)
        if key is None:
            title = "no data"
            panel_rows = []
        else:
            m, n, kind = key
            title = f"block {m}x{n}, {kind} shuffles"
            panel_rows = panels[key]
        panel = _Panel(c * pw, r * ph, pw, ph, title)
        body.extend(_panel_elements(panel, panel_rows, xlo, xhi))

    svg = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_W} {_H}" '
        f'width="{_W}" height="{_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="#fbfbfb"/>',
        *body,
        "</svg>",
    ]
    with open(out_path, "w") as fh:
        fh.write("\n".join(svg) + "\n")
