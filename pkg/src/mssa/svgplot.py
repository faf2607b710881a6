"""Minimal SVG line plots: no plotting dependency, deterministic output.

Just enough to eyeball filter weights and nowcast paths next to the tidy
CSVs that carry the actual numbers.
"""

from __future__ import annotations

import numpy as np

_PALETTE = ("#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
            "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#ff7f0e")


def _fmt(x):
    return "%.2f" % float(x)


def line_plot(series, title="", x=None, width=860, height=340, y_zero_line=True):
    """Render named series as an SVG string.

    Parameters
    ----------
    series : dict of name -> 1-D array
        All arrays must share one length.
    x : 1-D array, optional
        Common x values; defaults to 0..N-1.
    """
    names = list(series)
    if not names:
        raise ValueError("no series to plot")
    ys = [np.asarray(series[k], dtype=float) for k in names]
    n = ys[0].size
    if any(v.size != n for v in ys) or n < 2:
        raise ValueError("series must share a common length of at least 2")
    xs = np.arange(n, dtype=float) if x is None else np.asarray(x, dtype=float)
    if xs.size != n:
        raise ValueError("x has length %d, series have %d" % (xs.size, n))

    ml, mr, mt, mb = 56, 16, 30, 34
    iw, ih = width - ml - mr, height - mt - mb
    ally = np.concatenate(ys)
    ally = ally[np.isfinite(ally)]
    ylo, yhi = (ally.min(), ally.max()) if ally.size else (0.0, 1.0)
    if y_zero_line:
        ylo, yhi = min(ylo, 0.0), max(yhi, 0.0)
    if yhi - ylo < 1e-300:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    xlo, xhi = xs.min(), xs.max()
    if xhi - xlo < 1e-300:
        xhi = xlo + 1.0

    def px(v):
        return ml + (v - xlo) / (xhi - xlo) * iw

    def py(v):
        return mt + (yhi - v) / (yhi - ylo) * ih

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">' % (width, height, width, height),
        '<rect width="%d" height="%d" fill="white"/>' % (width, height),
        '<text x="%d" y="18" font-family="sans-serif" font-size="13">%s</text>'
        % (ml, _escape(title)),
    ]
    # frame + a few y ticks
    parts.append('<rect x="%d" y="%d" width="%d" height="%d" fill="none" '
                 'stroke="#888" stroke-width="1"/>' % (ml, mt, iw, ih))
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        yv = ylo + frac * (yhi - ylo)
        parts.append('<text x="%d" y="%s" text-anchor="end" font-family="sans-serif" '
                     'font-size="10" fill="#444">%s</text>'
                     % (ml - 6, _fmt(py(yv) + 3), "%.3g" % yv))
    for frac in (0.0, 0.5, 1.0):
        xv = xlo + frac * (xhi - xlo)
        parts.append('<text x="%s" y="%d" text-anchor="middle" font-family="sans-serif" '
                     'font-size="10" fill="#444">%s</text>'
                     % (_fmt(px(xv)), height - 12, "%.6g" % xv))
    if y_zero_line and ylo < 0.0 < yhi:
        parts.append('<line x1="%d" y1="%s" x2="%d" y2="%s" stroke="#bbb" '
                     'stroke-dasharray="4 3"/>' % (ml, _fmt(py(0.0)), ml + iw, _fmt(py(0.0))))
    for i, (name, y) in enumerate(zip(names, ys)):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join("%s,%s" % (_fmt(px(a)), _fmt(py(b)))
                       for a, b in zip(xs, y) if np.isfinite(b))
        parts.append('<polyline points="%s" fill="none" stroke="%s" '
                     'stroke-width="1.3"/>' % (pts, color))
        parts.append('<text x="%d" y="%d" font-family="sans-serif" font-size="11" '
                     'fill="%s">%s</text>'
                     % (ml + 8 + 110 * i, mt + 14, color, _escape(name)))
    parts.append("</svg>")
    return "\n".join(parts)


def _escape(text):
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def write_svg(path, series, title="", x=None, **kw):
    svg = line_plot(series, title=title, x=x, **kw)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg + "\n")
    return path
