"""Deterministic SVG rendering of 2D complexes.

Cells are emitted in sorted order with fixed-precision decimal coordinates,
so identical inputs give byte-identical files.
"""

from __future__ import annotations

from fractions import Fraction

from . import exact
from .complexes import Complex
from .errors import UnsupportedDimension

_STYLE = {
    "fill": "#9ecae8",
    "fill_opacity": "0.45",
    "stroke": "#1a3a5c",
    "stroke_width": "0.012",
    "vertex_radius": "0.025",
    "arrow": "#b03030",
}


def _coord(q: Fraction) -> str:
    return exact.decimal_str(q, 4)


def render_svg(cx: Complex, labels: bool = True, arrows=None,
               projection: tuple[int, int] | None = None,
               width: int = 640) -> str:
    """SVG text for a complex; `arrows` is an optional list of exact point
    pairs (tail, head) drawn on top (map-image arrows)."""
    if cx.ambient_dim != 2 and projection is None:
        raise UnsupportedDimension(
            f"ambient dimension {cx.ambient_dim} needs an axis projection"
        )
    i, j = projection if projection is not None else (0, 1)
    if cx.ambient_dim >= 1 and max(i, j) >= cx.ambient_dim:
        raise UnsupportedDimension("projection axes exceed ambient dimension")

    def proj(p):
        if cx.ambient_dim == 1:
            return (p[0], Fraction(0))
        return (p[i], p[j])

    pts = [proj(cx.point(v)) for v in cx.vertex_ids()]
    arrows = list(arrows or [])
    extra = [proj(p) for pair in arrows for p in pair]
    allpts = pts + extra
    if allpts:
        xs = [p[0] for p in allpts]
        ys = [p[1] for p in allpts]
        lo = (min(xs), min(ys))
        hi = (max(xs), max(ys))
        span = max(hi[0] - lo[0], hi[1] - lo[1], Fraction(1, 100))
    else:
        lo, hi, span = (Fraction(0), Fraction(0)), (Fraction(1), Fraction(1)), Fraction(1)
    margin = span / 10
    vb = (lo[0] - margin, lo[1] - margin,
          (hi[0] - lo[0]) + 2 * margin, (hi[1] - lo[1]) + 2 * margin)
    height = width  # square canvas; viewBox does the scaling
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="{_coord(vb[0])} {_coord(vb[1])} '
        f'{_coord(vb[2])} {_coord(vb[3])}">',
        f'<g transform="translate(0 {_coord(vb[1] * 2 + vb[3])}) '
        f'scale(1 -1)">',
    ]
    cells = sorted(cx.simplices, key=lambda s: (len(s), s))
    font = span / 25
    for s in cells:
        ps = [proj(cx.point(v)) for v in s]
        if len(s) == 3:
            path = " ".join(f"{_coord(p[0])},{_coord(p[1])}" for p in ps)
            lines.append(
                f'<polygon points="{path}" fill="{_STYLE["fill"]}" '
                f'fill-opacity="{_STYLE["fill_opacity"]}" stroke="none"/>'
            )
    for s in cells:
        if len(s) == 2:
            a, b = (proj(cx.point(v)) for v in s)
            lines.append(
                f'<line x1="{_coord(a[0])}" y1="{_coord(a[1])}" '
                f'x2="{_coord(b[0])}" y2="{_coord(b[1])}" '
                f'stroke="{_STYLE["stroke"]}" '
                f'stroke-width="{_coord(span * Fraction(6, 1000))}"/>'
            )
    for s in cells:
        if len(s) == 1:
            p = proj(cx.point(s[0]))
            lines.append(
                f'<circle cx="{_coord(p[0])}" cy="{_coord(p[1])}" '
                f'r="{_coord(span * Fraction(9, 1000))}" '
                f'fill="{_STYLE["stroke"]}"/>'
            )
    for tail, head in arrows:
        a, b = proj(tail), proj(head)
        lines.append(
            f'<line x1="{_coord(a[0])}" y1="{_coord(a[1])}" '
            f'x2="{_coord(b[0])}" y2="{_coord(b[1])}" '
            f'stroke="{_STYLE["arrow"]}" '
            f'stroke-width="{_coord(span * Fraction(4, 1000))}"/>'
        )
        lines.append(
            f'<circle cx="{_coord(b[0])}" cy="{_coord(b[1])}" '
            f'r="{_coord(span * Fraction(7, 1000))}" '
            f'fill="{_STYLE["arrow"]}"/>'
        )
    lines.append("</g>")
    if labels and len(cx.points) <= 64:
        for v in sorted(cx.vertex_ids(), key=cx.name_of):
            p = proj(cx.point(v))
            y_flipped = vb[1] * 2 + vb[3] - p[1]
            lines.append(
                f'<text x="{_coord(p[0] + font / 3)}" '
                f'y="{_coord(y_flipped - font / 3)}" '
                f'font-size="{_coord(font)}" font-family="monospace" '
                f'fill="#222222">{cx.name_of(v)}</text>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
