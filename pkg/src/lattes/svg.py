"""Static SVG 1.1 views: grayscale heatmaps and point scatters."""
from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

_HEAD = '<?xml version="1.0" encoding="UTF-8"?>\n<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'


def _meta(pairs: dict) -> str:
    body = "; ".join(f"{k}={v}" for k, v in pairs.items())
    return f"<metadata>{escape(body)}</metadata>\n"


def heatmap(values: np.ndarray, extent: tuple[float, float, float, float], title: str = "",
            cell: int = 6) -> str:
    """values[j, i] at x_i, y_j (y increasing upwards); linear grayscale, black = min.

    Non-finite cells are drawn in red.
    """
    values = np.asarray(values, dtype=float)
    ny, nx = values.shape
    finite = values[np.isfinite(values)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0
    w, h = nx * cell, ny * cell + 20
    out = [_HEAD.format(w=w, h=h),
           _meta({"scale": "linear", "min": f"{lo:.6g}", "max": f"{hi:.6g}",
                  "extent": ",".join(f"{e:.6g}" for e in extent)})]
    if title:
        out.append(f'<text x="2" y="14" font-size="12" font-family="monospace">{escape(title)}</text>\n')
    for j in range(ny):
        y = 20 + (ny - 1 - j) * cell
        for i in range(nx):
            v = values[j, i]
            if math.isfinite(v):
                g = int(round(255 * (v - lo) / span))
                fill = f"rgb({g},{g},{g})"
            else:
                fill = "rgb(255,0,0)"
            out.append(f'<rect x="{i * cell}" y="{y}" width="{cell}" height="{cell}" fill="{fill}"/>\n')
    out.append("</svg>\n")
    return "".join(out)


def scatter(points: Sequence[complex], extent: tuple[float, float, float, float] | None = None,
            title: str = "", size: int = 480, marked: Sequence[bool] | None = None) -> str:
    """Points of the complex plane; ``marked`` ones (e.g. exact rationals) drawn as squares."""
    pts = np.array(points, dtype=complex)
    if extent is None:
        if pts.size:
            x0, x1 = float(pts.real.min()), float(pts.real.max())
            y0, y1 = float(pts.imag.min()), float(pts.imag.max())
        else:
            x0 = x1 = y0 = y1 = 0.0
        pad = 0.05 * max(x1 - x0, y1 - y0, 1.0)
        extent = (x0 - pad, x1 + pad, y0 - pad, y1 + pad)
    x0, x1, y0, y1 = extent
    sx = size / (x1 - x0)
    sy = size / (y1 - y0)
    marked = list(marked) if marked is not None else [False] * len(pts)
    out = [_HEAD.format(w=size, h=size + 20),
           _meta({"extent": ",".join(f"{e:.6g}" for e in extent), "points": len(pts)})]
    if title:
        out.append(f'<text x="2" y="14" font-size="12" font-family="monospace">{escape(title)}</text>\n')
    # axes through the origin when visible
    if x0 < 0 < x1:
        X = -x0 * sx
        out.append(f'<line x1="{X:.2f}" y1="20" x2="{X:.2f}" y2="{size + 20}" stroke="#bbb"/>\n')
    if y0 < 0 < y1:
        Y = 20 + y1 * sy
        out.append(f'<line x1="0" y1="{Y:.2f}" x2="{size}" y2="{Y:.2f}" stroke="#bbb"/>\n')
    for z, m in zip(pts, marked):
        if not (x0 <= z.real <= x1 and y0 <= z.imag <= y1):
            continue
        X, Y = (z.real - x0) * sx, 20 + (y1 - z.imag) * sy
        if m:
            out.append(f'<rect x="{X - 2.5:.2f}" y="{Y - 2.5:.2f}" width="5" height="5" fill="black"/>\n')
        else:
            out.append(f'<circle cx="{X:.2f}" cy="{Y:.2f}" r="1.5" fill="black"/>\n')
    out.append("</svg>\n")
    return "".join(out)
