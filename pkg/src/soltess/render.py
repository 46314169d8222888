"""Static SVG rendering of tessellations in the unit-disk model.

The only floating-point code in the package; it is purely presentational and
feeds nothing back into the exact machinery.  Boundary points map to the
disk through the inverse of the fixed correspondence w -> i(1+w)/(1-w), and
geodesics are drawn as circular arcs orthogonal to the unit circle.
"""

from __future__ import annotations

import math

from .moebius import ExtendedRational, Geodesic
from .subgroup import psl2z_ball_in
from .tessellation import Tessellation

__all__ = ["render_svg", "disk_point"]

_SIZE = 1000.0
_RADIUS = 470.0
_CENTER = 500.0


def disk_point(x: ExtendedRational) -> tuple[float, float]:
    """The unit-disk boundary point for an extended rational, w = (z-i)/(z+i)."""
    if x.is_infinity:
        return (1.0, 0.0)
    z = x.p / x.q
    # (z - i)/(z + i) with z real
    den = z * z + 1.0
    return ((z * z - 1.0) / den, -2.0 * z / den)


def _svg_coords(w: tuple[float, float]) -> tuple[float, float]:
    # y axis points down in SVG
    return (_CENTER + _RADIUS * w[0], _CENTER - _RADIUS * w[1])


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _arc_path(g: Geodesic) -> str:
    """An SVG path for the geodesic arc orthogonal to the boundary circle."""
    w1 = disk_point(g.x)
    w2 = disk_point(g.y)
    x1, y1 = _svg_coords(w1)
    x2, y2 = _svg_coords(w2)
    dot = w1[0] * w2[0] + w1[1] * w2[1]
    if dot < -1.0 + 1e-12:
        # diametrically opposite: the geodesic is a straight chord
        return f"M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}"
    # centre c of the orthogonal circle solves <w1, c> = 1, <w2, c> = 1
    det = w1[0] * w2[1] - w1[1] * w2[0]
    if abs(det) < 1e-12:
        return f"M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}"
    cx = (w2[1] - w1[1]) / det
    cy = (w1[0] - w2[0]) / det
    r = math.sqrt(max(cx * cx + cy * cy - 1.0, 0.0)) * _RADIUS
    # sweep: the minor arc bends toward the disk centre; going from w1 to w2,
    # draw clockwise in maths coordinates iff (w1 - c) x (w2 - c) > 0, and the
    # y-flip into SVG coordinates turns that into sweep flag 1
    cross = (w1[0] - cx) * (w2[1] - cy) - (w1[1] - cy) * (w2[0] - cx)
    sweep = 1 if cross > 0 else 0
    return (
        f"M {_fmt(x1)} {_fmt(y1)} A {_fmt(r)} {_fmt(r)} 0 0 {sweep} {_fmt(x2)} {_fmt(y2)}"
    )


def _chord_len(g: Geodesic) -> float:
    w1 = disk_point(g.x)
    w2 = disk_point(g.y)
    return math.hypot(w1[0] - w2[0], w1[1] - w2[1]) * _RADIUS


def render_svg(t: Tessellation, depth: int, min_fraction: float = 0.005) -> str:
    """A deterministic SVG drawing of the tessellation.

    Orbit representatives are expanded by group words of length up to depth;
    arcs smaller than min_fraction of the image width are pruned.  Output is
    byte-identical across runs for equal inputs.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    threshold = min_fraction * _SIZE
    members = psl2z_ball_in(t.group, depth) if depth > 0 else ()
    edges: dict[Geodesic, str] = {}
    for o in t.orbits:
        edges.setdefault(o.geodesic, o.label)
        for m in members:
            img = o.geodesic.transform(m)
            if _chord_len(img) >= threshold:
                edges.setdefault(img, o.label)

    dist_geo = t.distinguished.geodesic()
    ordered = sorted(edges.items(), key=lambda kv: (str(kv[0].x), str(kv[0].y)))
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(_SIZE)}" '
        f'height="{int(_SIZE)}" viewBox="0 0 {int(_SIZE)} {int(_SIZE)}">',
        f'<circle cx="{_fmt(_CENTER)}" cy="{_fmt(_CENTER)}" r="{_fmt(_RADIUS)}" '
        'fill="none" stroke="black" stroke-width="2"/>',
    ]
    for geo, label in ordered:
        if geo == dist_geo:
            continue
        lines.append(
            f'<path d="{_arc_path(geo)}" fill="none" stroke="steelblue" '
            f'stroke-width="1.5" data-orbit="{label}" data-edge="{geo}"/>'
        )
    hit = t.locate(dist_geo)
    dist_label = hit[0] if hit else "?"
    lines.append(
        f'<path d="{_arc_path(dist_geo)}" fill="none" stroke="crimson" '
        f'stroke-width="3" data-orbit="{dist_label}" data-edge="{dist_geo}" '
        'data-distinguished="true"/>'
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
