"""A tiny log-log line chart written as SVG text."""

import math
from xml.sax.saxutils import escape

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
_W, _H, _PAD = 640, 420, 60


def _ticks(lo, hi):
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def loglog_svg(series, title="", xlabel="", ylabel=""):
    """``series`` maps a label to ``(xs, ys)``; non-positive points are skipped."""
    pts = {}
    for label, (xs, ys) in series.items():
        keep = [(math.log10(x), math.log10(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
        if keep:
            pts[label] = keep
    all_x = [p[0] for v in pts.values() for p in v] or [0.0, 1.0]
    all_y = [p[1] for v in pts.values() for p in v] or [0.0, 1.0]
    x0, x1 = math.floor(min(all_x)), math.ceil(max(all_x))
    y0, y1 = math.floor(min(all_y)), math.ceil(max(all_y))
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def sx(v):
        return _PAD + (v - x0) / (x1 - x0) * (_W - 2 * _PAD)

    def sy(v):
        return _H - _PAD - (v - y0) / (y1 - y0) * (_H - 2 * _PAD)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" font-family="sans-serif" font-size="11">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>',
           f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" stroke="black"/>',
           f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<text x="{sx(t):.1f}" y="{_H - _PAD + 16}" text-anchor="middle">1e{t}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{_PAD - 6}" y="{sy(t) + 4:.1f}" text-anchor="end">1e{t}</text>')
    for i, (label, points) in enumerate(pts.items()):
        color = _COLORS[i % len(_COLORS)]
        path = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in points)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        out.append(f'<text x="{_W - _PAD - 4}" y="{_PAD + 14 * (i + 1)}" fill="{color}" text-anchor="end">'
                   f'{escape(label)}</text>')
    out.append(f'<text x="{_W / 2}" y="{_PAD / 2}" text-anchor="middle" font-size="13">{escape(title)}</text>')
    out.append(f'<text x="{_W / 2}" y="{_H - 16}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{_H / 2}" transform="rotate(-90 14 {_H / 2})" text-anchor="middle">'
               f'{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
