"""Deterministic SVG drawings of walks, lattices, tilings and tile towers.

Coordinates are printed with two decimals and elements are emitted in a
fixed order, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import math

from . import fredkin1d, lozengemod as lz, sixvertex as sv

__all__ = [
    "svg_walk",
    "svg_fredkin_network",
    "svg_sixvertex",
    "svg_lozenge",
    "svg_prism_levels",
]

PALETTE = ("#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#7f7f7f", "#17becf")
SHADES = {"x": "#f2f2f2", "y": "#bdbdbd", "z": "#6e6e6e"}
GROUP_FILL = ("#ffffff", "#cfe2f3", "#f4cccc")


def _f(x: float) -> str:
    return f"{x + 0.0:.2f}".replace("-0.00", "0.00")


def _doc(width: float, height: float, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" '
            f'height="{_f(height)}" viewBox="0 0 {_f(width)} {_f(height)}">')
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _line(x1, y1, x2, y2, colour="#000000", width=1.5, dash=None) -> str:
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{colour}" stroke-width="{_f(width)}"{extra}/>')


def _text(x, y, s, size=10) -> str:
    return (f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" font-family="monospace" '
            f'text-anchor="middle">{s}</text>')


def _poly(points, fill, stroke="#000000") -> str:
    pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in points)
    return f'<polygon points="{pts}" fill="{fill}" stroke="{stroke}" stroke-width="0.8"/>'


def svg_walk(chain, unit: float = 30.0) -> str:
    """Height profile of a chain with each step in its colour."""
    if not chain:
        raise ValueError("empty chain")
    prof = fredkin1d.height_profile(chain)
    hmax = max(prof.heights)
    pad = unit
    body = []
    for i, v in enumerate(chain):
        x1, x2 = pad + i * unit, pad + (i + 1) * unit
        y1 = pad + (hmax - prof.heights[i]) * unit
        y2 = pad + (hmax - prof.heights[i + 1]) * unit
        body.append(_line(x1, y1, x2, y2, PALETTE[abs(v) % len(PALETTE)], 3))
    body.append(_line(pad, pad + hmax * unit, pad + len(chain) * unit, pad + hmax * unit, "#999999", 1, "4 3"))
    return _doc(2 * pad + len(chain) * unit, 2 * pad + hmax * unit, body)


def svg_fredkin_network(N: int, unit: float = 30.0) -> str:
    """Top-aligned towers of the 1D network (inverse step pyramid)."""
    heights = fredkin1d.tower_heights(N)
    top = max(heights)
    body = []
    for i, m in enumerate(heights):
        for depth in range(m):
            x, y = unit + i * unit, unit + depth * unit
            body.append(_poly([(x, y), (x + unit, y), (x + unit, y + unit), (x, y + unit)], "#ffffff"))
        body.append(_text(unit + (i + 0.5) * unit, unit * (top + 2), f"k1:{i}", 8))
    return _doc((N + 2) * unit, (top + 3) * unit, body)


def svg_sixvertex(key, L: int, unit: float = 50.0) -> str:
    """Spins as coloured edges (solid horizontal chains, dashed vertical) and dual heights."""
    lat = sv.lattice(L)
    phi = sv.height_field(key, L)
    pad = unit

    def pt(x, y):
        return pad + x * unit, pad + (L - 1 - y) * unit

    body = []
    for site, v in zip(lat.sites, key):
        kind, x, y = site
        a, b = (pt(x, y), pt(x, y + 1)) if kind == "h" else (pt(x, y), pt(x + 1, y))
        col = PALETTE[abs(v) % len(PALETTE)]
        body.append(_line(*a, *b, col, 3, None if kind == "h" else "6 3"))
        mx, my = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
        body.append(_text(mx + 8, my - 4, "+" if v > 0 else "-", 9))
    for (a, b), h in sorted(phi.items()):
        x, y = pt(a + 0.5, b + 0.5)
        body.append(_text(x, y + 3, str(h), 9))
    return _doc(2 * pad + (L + 1) * unit, 2 * pad + (L + 1) * unit, body)


def _layout(domain: lz.TriDomain, unit: float):
    if not domain.faces:
        raise ValueError("empty domain")
    pts = [lz.position(v) for v in domain.vertices]
    minx = min(p[0] for p in pts)
    maxy = max(p[1] for p in pts)
    pad = unit

    def pt(v):
        x, y = lz.position(v)
        return pad + (x - minx) * unit, pad + (maxy - y) * unit

    width = 2 * pad + (max(p[0] for p in pts) - minx) * unit
    height = 2 * pad + (maxy - min(p[1] for p in pts)) * unit
    return pt, width, height


def svg_lozenge(domain: lz.TriDomain, key, unit: float = 40.0) -> str:
    """Lozenges in three shades with the walk segments drawn in their colours."""
    pt, width, height = _layout(domain, unit)
    types, colours = lz.decode(key, domain)
    body = []
    for k, f in enumerate(domain.faces):
        if f[0] != "R":
            continue
        p = domain.index[lz.neighbour(f, types[k])]
        corners = set(lz.face_vertices(f)) | set(lz.face_vertices(domain.faces[p]))
        cx = sum(lz.position(v)[0] for v in corners) / 4
        cy = sum(lz.position(v)[1] for v in corners) / 4
        ring = sorted(corners, key=lambda v: math.atan2(lz.position(v)[1] - cy, lz.position(v)[0] - cx))
        body.append(_poly([pt(v) for v in ring], SHADES[types[k]]))
        for fam in lz.TYPE_FAMILIES[types[k]]:
            d = lz.FAMILY_DIR[fam]
            e1, e2 = lz.face_edges(f)[d], lz.face_edges(domain.faces[p])[d]
            m1 = [sum(c) / 2 for c in zip(*(pt(v) for v in lz.edge_ends(e1)))]
            m2 = [sum(c) / 2 for c in zip(*(pt(v) for v in lz.edge_ends(e2)))]
            dash = {"dashed": "5 3", "solid": None, "dotted": "1 3"}[fam]
            body.append(_line(*m1, *m2, PALETTE[colours[(k, fam)] % len(PALETTE)], 2, dash))
    return _doc(width, height, body)


def svg_prism_levels(domain: lz.TriDomain, key, s: int, unit: float = 40.0) -> str:
    """Exploded view: one panel per level with the tile name in every face."""
    tiling = lz.tiling_from_config(domain, key, s)
    pt, width, height = _layout(domain, unit)
    body = []
    for panel, lev in enumerate(range(tiling.top, 0, -1)):
        dx = panel * width
        body.append(_text(dx + width / 2, 14, f"l = {lev}", 12))
        for f in domain.faces:
            tile = next((t for t in tiling.towers[f] if t[0] == lev), None)
            corners = [pt(v) for v in lz.face_vertices(f)]
            corners = [(x + dx, y) for x, y in corners]
            if tile is None:
                body.append(_poly(corners, "none", "#cccccc"))
                continue
            name = tile[1]
            body.append(_poly(corners, GROUP_FILL[(int(name[1:]) - 1) // 3]))
            cx = sum(x for x, _ in corners) / 3
            cy = sum(y for _, y in corners) / 3
            body.append(_text(cx, cy + 3, name, 7))
    return _doc(width * tiling.top, height, body)
