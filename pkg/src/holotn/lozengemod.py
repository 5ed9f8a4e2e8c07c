"""Coloured lozenge tilings coupled to Fredkin chains in three directions.

Geometry
--------
Vertices of the triangular lattice are integer pairs ``(i, j)`` at position
``i * xh + j * yh`` with ``xh = (-sqrt3/2, -1/2)`` and ``yh = (sqrt3/2, -1/2)``;
the third unit vector is ``zh = -xh - yh``, i.e. the step ``(-1, -1)``.
Faces are ``("R", i, j)`` with corners ``u, u+yh, u+xh+yh`` and ``("L", i, j)``
with corners ``u, u+xh, u+xh+yh``.  Every face has one edge in each of the
directions ``"x"``, ``"y"`` and ``"z"``; an edge is stored as ``(dir, tail)``
with ``head = tail + dir``.

A lozenge is an R face and an L face sharing an edge; its type is the
direction of that shared edge.  The height field steps by ``+1`` along a
lozenge side in its positive direction and by ``-2`` across the shared
diagonal.  Boundary heights are fixed so that the lowest boundary vertex sits
at ``-1/2``.

Walk families
-------------
The ``dashed``, ``solid`` and ``dotted`` families are the de Bruijn strips
crossing ``y``, ``z`` and ``x`` edges respectively.  Reading the heights of
the crossed edges along a strip gives a walk; a lozenge contributes an up or
down step with the sign fixed by its type (``SIGN``).  A ground-basis tiling
has all edge heights ``>= 0`` and each matched up/down pair of every strip
carries one colour.

Configurations are keys with one code per face (in the sorted face order):
``100 * t + 10 * a + b`` with ``t`` the type index and ``a, b`` the colours of
the two families crossing the lozenge, in ``(dashed, solid, dotted)`` order.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import sqrt

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .fredkin1d import _move_local
from .statevec import WeightedState, norm, normalize
from .tensor_core import (
    LegAlphabet,
    NetworkGraph,
    QMonomial,
    SparseTensor,
    delta_cap,
)

__all__ = [
    "DomainError",
    "PeelError",
    "TriDomain",
    "LozengeTiling",
    "PrismTiling",
    "hexagon_faces",
    "hexagon_cluster",
    "single_hexagon",
    "small_domain",
    "is_tileable",
    "strong_boundary_ok",
    "hexagon_peel",
    "lozenge_tilings",
    "height_field",
    "spin_heights",
    "volume",
    "is_ground_basis",
    "enumerate_ground_basis",
    "ground_amplitudes",
    "ground_state",
    "lozenge_fredkin_move",
    "move_graph_connected",
    "hamiltonian_terms",
    "verify_annihilation",
    "prism_entries",
    "build_network",
    "physical_assignment",
    "key_from_symbols",
    "tiling_from_config",
    "config_from_tiling",
    "tiling_exponent",
    "solve_tile_weights",
    "domain_to_json",
    "domain_from_json",
]

DIRS = {"x": (1, 0), "y": (0, 1), "z": (-1, -1)}
TYPES = ("x", "y", "z")
FAMILY_DIR = {"dashed": "y", "solid": "z", "dotted": "x"}
FAMILIES = ("dashed", "solid", "dotted")
# families crossing a lozenge of each type, in label order
TYPE_FAMILIES = {"x": ("dashed", "solid"), "y": ("solid", "dotted"), "z": ("dashed", "dotted")}
SIGN = {("x", "dashed"): 1, ("x", "solid"): 1, ("y", "solid"): -1, ("y", "dotted"): 1,
        ("z", "dashed"): -1, ("z", "dotted"): -1}
HALF = Fraction(1, 2)


class DomainError(ValueError):
    pass


class PeelError(ValueError):
    """Raised when no boundary segment fixes a hexagon."""


def _add(u, d, k=1):
    return (u[0] + k * d[0], u[1] + k * d[1])


def position(v) -> tuple[float, float]:
    i, j = v
    return ((j - i) * sqrt(3) / 2, -(i + j) / 2)


def face_vertices(f):
    t, i, j = f
    u = (i, j)
    if t == "R":
        return (u, _add(u, DIRS["y"]), (i + 1, j + 1))
    return (u, _add(u, DIRS["x"]), (i + 1, j + 1))


def face_edges(f) -> dict:
    """Edges of a face keyed by direction, each as ``(dir, tail)``."""
    t, i, j = f
    u = (i, j)
    far = (i + 1, j + 1)
    if t == "R":
        return {"y": ("y", u), "x": ("x", (i, j + 1)), "z": ("z", far)}
    return {"x": ("x", u), "y": ("y", (i + 1, j)), "z": ("z", far)}


def edge_ends(e):
    d, tail = e
    return tail, _add(tail, DIRS[d])


def neighbour(f, d: str):
    """Face across the ``d`` edge of ``f``."""
    t, i, j = f
    if t == "R":
        return {"z": ("L", i, j), "y": ("L", i - 1, j), "x": ("L", i, j + 1)}[d]
    return {"z": ("R", i, j), "y": ("R", i + 1, j), "x": ("R", i, j - 1)}[d]


def hexagon_faces(c) -> tuple:
    """The six faces around vertex ``c``."""
    i, j = c
    return tuple(sorted([("R", i, j), ("R", i, j - 1), ("R", i - 1, j - 1),
                         ("L", i, j), ("L", i - 1, j), ("L", i - 1, j - 1)]))


# ------------------------------------------------------------------ domain

@dataclass(frozen=True)
class TriDomain:
    """Faces of a connected region together with its boundary heights."""

    faces: tuple
    boundary: tuple  # sorted ((vertex, height), ...)

    def __post_init__(self):
        if not self.faces:
            raise DomainError("empty domain")
        if len(set(self.faces)) != len(self.faces):
            raise DomainError("duplicate faces")
        seen = {self.faces[0]}
        todo = [self.faces[0]]
        fs = set(self.faces)
        while todo:
            f = todo.pop()
            for d in TYPES:
                g = neighbour(f, d)
                if g in fs and g not in seen:
                    seen.add(g)
                    todo.append(g)
        if len(seen) != len(fs):
            raise DomainError("domain is not connected")
        if {v for v, _ in self.boundary} != set(self.boundary_vertices):
            raise DomainError("boundary heights must cover exactly the boundary vertices")

    @classmethod
    def from_faces(cls, faces, boundary: dict | None = None) -> "TriDomain":
        faces = tuple(sorted(set(tuple(f) for f in faces)))
        if boundary is None:
            boundary = _forced_boundary(faces)
        b = tuple(sorted((tuple(v), Fraction(h)) for v, h in boundary.items()))
        return cls(faces, b)

    @cached_property
    def index(self) -> dict:
        return {f: k for k, f in enumerate(self.faces)}

    @cached_property
    def edge_faces(self) -> dict:
        out: dict = {}
        for f in self.faces:
            for e in face_edges(f).values():
                out.setdefault(e, []).append(f)
        return out

    @cached_property
    def edges(self) -> list:
        return sorted(self.edge_faces)

    @cached_property
    def boundary_edges(self) -> list:
        return [e for e in self.edges if len(self.edge_faces[e]) == 1]

    @cached_property
    def vertices(self) -> list:
        return sorted({v for f in self.faces for v in face_vertices(f)})

    @cached_property
    def degree(self) -> dict:
        deg = {v: 0 for v in self.vertices}
        for f in self.faces:
            for v in face_vertices(f):
                deg[v] += 1
        return deg

    @cached_property
    def boundary_vertices(self) -> list:
        return sorted({v for e in self.boundary_edges for v in edge_ends(e)})

    @cached_property
    def interior_vertices(self) -> list:
        b = set(self.boundary_vertices)
        return [v for v in self.vertices if v not in b]

    @property
    def boundary_heights(self) -> dict:
        return dict(self.boundary)

    def __len__(self) -> int:
        return len(self.faces)


def _forced_boundary(faces) -> dict:
    """Boundary heights forced by the shape (every boundary edge is a lozenge side)."""
    fs = set(faces)
    count: dict = {}
    for f in fs:
        for e in face_edges(f).values():
            count[e] = count.get(e, 0) + 1
    adj: dict = {}
    for e, n in count.items():
        if n == 1:
            a, b = edge_ends(e)
            adj.setdefault(a, []).append((b, 1))
            adj.setdefault(b, []).append((a, -1))
    if not adj:
        raise DomainError("domain has no boundary")
    h: dict = {}
    for start in sorted(adj):
        if start in h:
            continue
        h[start] = Fraction(0)
        todo = [start]
        while todo:
            v = todo.pop()
            for w, step in adj[v]:
                if w not in h:
                    h[w] = h[v] + step
                    todo.append(w)
                elif h[w] != h[v] + step:
                    raise DomainError("boundary winding is inconsistent; no lozenge tiling exists")
    low = min(h.values())
    return {v: x - low - HALF for v, x in h.items()}


def hexagon_cluster(centres) -> TriDomain:
    """Union of the hexagons around the given vertices."""
    faces = [f for c in centres for f in hexagon_faces(tuple(c))]
    if len(set(faces)) != len(faces):
        raise DomainError("hexagons overlap")
    return TriDomain.from_faces(faces)


def single_hexagon() -> TriDomain:
    return hexagon_cluster([(0, 0)])


SMALL_CENTRES = ((0, 0), (-1, 1), (1, 2))


def small_domain() -> TriDomain:
    """Three mutually adjacent hexagons meeting at one interior vertex."""
    return hexagon_cluster(SMALL_CENTRES)


def domain_to_json(domain: TriDomain) -> str:
    return json.dumps({
        "faces": [list(f) for f in domain.faces],
        "boundary": [[v[0], v[1], str(h)] for v, h in domain.boundary],
    }, sort_keys=True)


def domain_from_json(text: str) -> TriDomain:
    data = json.loads(text)
    try:
        faces = [(str(t), int(i), int(j)) for t, i, j in data["faces"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"bad domain json: {exc}") from None
    if any(t not in ("R", "L") for t, _, _ in faces):
        raise DomainError("face tags must be R or L")
    boundary = None
    if "boundary" in data:
        boundary = {(int(i), int(j)): Fraction(h) for i, j, h in data["boundary"]}
    return TriDomain.from_faces(faces, boundary)


# ------------------------------------------------------------- tileability

def boundary_steps_ok(domain: TriDomain) -> bool:
    """Every boundary edge steps by +1 along its positive direction."""
    h = domain.boundary_heights
    for e in domain.boundary_edges:
        a, b = edge_ends(e)
        if h[b] - h[a] != 1:
            return False
    return True


def _distance_matrix(domain: TriDomain) -> tuple[list, np.ndarray]:
    """Largest possible height increase between vertices (1 forward, 2 backward)."""
    verts = domain.vertices
    idx = {v: k for k, v in enumerate(verts)}
    rows, cols, vals = [], [], []
    for e in domain.edges:
        a, b = edge_ends(e)
        rows += [idx[a], idx[b]]
        cols += [idx[b], idx[a]]
        vals += [1.0, 2.0]
    g = csr_matrix((vals, (rows, cols)), shape=(len(verts), len(verts)))
    return verts, shortest_path(g, directed=True)


def is_tileable(domain: TriDomain) -> bool:
    """Boundary-step check plus the distance inequality over boundary pairs.

    ``h(v) - h(u) <= d(u, v)`` where ``d`` counts 1 per edge walked in its
    positive direction and 2 against it.
    """
    if not boundary_steps_ok(domain):
        return False
    verts, dist = _distance_matrix(domain)
    idx = {v: k for k, v in enumerate(verts)}
    h = domain.boundary_heights
    for u in h:
        for v in h:
            if h[v] - h[u] > dist[idx[u], idx[v]] + 1e-9:
                return False
    return True


def strong_boundary_ok(domain: TriDomain) -> bool:
    """All boundary heights within 1 of each other."""
    hs = [h for _, h in domain.boundary]
    return max(hs) - min(hs) <= 1


def hexagon_peel(domain_or_faces) -> list:
    """Unique hexagon tiling by peeling hexagons off the boundary.

    The face on a boundary edge can only belong to the hexagon around its
    third corner, so each step is forced.  Returns the centres in peel order.
    """
    faces = domain_or_faces.faces if isinstance(domain_or_faces, TriDomain) else domain_or_faces
    remaining = set(faces)
    centres = []
    while remaining:
        count: dict = {}
        for f in remaining:
            for e in face_edges(f).values():
                count.setdefault(e, []).append(f)
        bedges = sorted(e for e, fs in count.items() if len(fs) == 1)
        e = bedges[0]
        f = count[e][0]
        ends = set(edge_ends(e))
        w = next(v for v in face_vertices(f) if v not in ends)
        hexf = hexagon_faces(w)
        if not all(g in remaining for g in hexf):
            raise PeelError(f"stuck at boundary edge {e}; hexagon at {w} leaves the domain "
                            f"(boundary {bedges})")
        remaining.difference_update(hexf)
        centres.append(w)
    return centres


# ----------------------------------------------------------------- tilings

def lozenge_tilings(domain: TriDomain) -> list[tuple]:
    """All perfect matchings as per-face type tuples (backtracking)."""
    faces = domain.faces
    idx = domain.index
    n = len(faces)
    types: list = [None] * n
    out = []
    cand = []
    for f in faces:
        cand.append([(d, idx[neighbour(f, d)]) for d in TYPES if neighbour(f, d) in idx])

    def rec(k):
        while k < n and types[k] is not None:
            k += 1
        if k == n:
            out.append(tuple(types))
            return
        for d, g in cand[k]:
            if types[g] is None:
                types[k] = types[g] = d
                rec(k + 1)
                types[k] = types[g] = None

    rec(0)
    return sorted(out)


def _check_types(domain: TriDomain, types) -> None:
    for f, d in zip(domain.faces, types):
        g = neighbour(f, d)
        if g not in domain.index or types[domain.index[g]] != d:
            raise ValueError(f"face {f} is not matched consistently")


def height_field(domain: TriDomain, types) -> dict:
    """Vertex heights of a tiling; raises if the tiling is not consistent."""
    _check_types(domain, types)
    covered = set()
    for f, d in zip(domain.faces, types):
        covered.add(face_edges(f)[d])
    adj: dict = {v: [] for v in domain.vertices}
    for e in domain.edges:
        a, b = edge_ends(e)
        step = -2 if e in covered else 1
        adj[a].append((b, step))
        adj[b].append((a, -step))
    bh = domain.boundary_heights
    start = domain.boundary_vertices[0]
    h = {start: bh[start]}
    todo = [start]
    while todo:
        v = todo.pop()
        for w, step in adj[v]:
            if w not in h:
                h[w] = h[v] + step
                todo.append(w)
            elif h[w] != h[v] + step:
                raise ValueError("height field is not single valued")
    for v, x in bh.items():
        if h[v] != x:
            raise ValueError(f"tiling disagrees with the boundary height at {v}")
    return h


def edge_height(h: dict, e) -> Fraction:
    a, b = edge_ends(e)
    return (h[a] + h[b]) / 2


def spin_heights(domain: TriDomain, h: dict) -> dict:
    """``phi_r = -1/2 + mean of the three corner heights`` per face."""
    return {f: -HALF + sum(h[v] for v in face_vertices(f)) / 3 for f in domain.faces}


def _partner(domain, types, k) -> int:
    return domain.index[neighbour(domain.faces[k], types[k])]


def _lozenges(domain, types) -> list[int]:
    """Lozenge ids are the indices of their R faces."""
    return [k for k, f in enumerate(domain.faces) if f[0] == "R"]


def _lozenge_sides(domain, types, k, d) -> list:
    """The two ``d`` edges of lozenge ``k`` (empty if ``d`` is its diagonal)."""
    if types[k] == d:
        return []
    p = _partner(domain, types, k)
    return [face_edges(domain.faces[k])[d], face_edges(domain.faces[p])[d]]


@dataclass(frozen=True)
class Strip:
    """Oriented de Bruijn strip: lozenges, crossed edges and step signs."""

    family: str
    lozenges: tuple
    edges: tuple
    signs: tuple


@dataclass(frozen=True)
class Surface:
    types: tuple
    heights: dict = field(hash=False, compare=False)
    strips: tuple = field(hash=False, compare=False)
    slot: dict = field(hash=False, compare=False)  # (lozenge, family) -> (strip, position)


def _strips(domain: TriDomain, types, h) -> list[Strip]:
    out = []
    for fam in FAMILIES:
        d = FAMILY_DIR[fam]
        at_edge: dict = {}
        for k in _lozenges(domain, types):
            for e in _lozenge_sides(domain, types, k, d):
                at_edge.setdefault(e, []).append(k)
        ends = sorted(e for e, ls in at_edge.items() if len(ls) == 1)
        used = set()
        seen = set()
        for e0 in ends:
            if e0 in used:
                continue
            edges, lozs = [e0], []
            e, prev = e0, None
            while True:
                nxt = [k for k in at_edge[e] if k != prev]
                if not nxt:
                    break
                k = nxt[0]
                lozs.append(k)
                e = next(x for x in _lozenge_sides(domain, types, k, d) if x != e)
                edges.append(e)
                prev = k
                if len(at_edge[e]) == 1:
                    break
            used.add(e0)
            used.add(edges[-1])
            seen.update(lozs)
            heights = [edge_height(h, x) for x in edges]
            steps = [b - a for a, b in zip(heights, heights[1:])]
            want = [SIGN[(types[k], fam)] for k in lozs]
            if steps == want:
                pass
            elif steps == [-w for w in want]:
                edges.reverse()
                lozs.reverse()
                want.reverse()
            else:
                raise RuntimeError("strip steps disagree with lozenge orientation")
            out.append(Strip(fam, tuple(lozs), tuple(edges), tuple(want)))
        crossing = {k for k in _lozenges(domain, types) if types[k] != d}
        if seen != crossing:
            raise RuntimeError(f"closed {fam} strip in a simply connected domain")
    out.sort(key=lambda s: (FAMILIES.index(s.family), s.edges[0]))
    return out


@lru_cache(maxsize=4096)
def _surface(domain: TriDomain, types: tuple) -> Surface:
    h = height_field(domain, types)
    strips = _strips(domain, types, h)
    slot = {}
    for si, st in enumerate(strips):
        for p, k in enumerate(st.lozenges):
            slot[(k, st.family)] = (si, p)
    return Surface(types, h, tuple(strips), slot)


def _is_dyck_surface(domain: TriDomain, surf: Surface) -> bool:
    return all(edge_height(surf.heights, e) >= 0 for e in domain.edges)


@lru_cache(maxsize=64)
def dyck_surfaces(domain: TriDomain) -> tuple:
    """Uncoloured ground-basis tilings, i.e. all edge heights non-negative."""
    out = []
    for types in lozenge_tilings(domain):
        surf = _surface(domain, types)
        if _is_dyck_surface(domain, surf):
            out.append(surf)
    return tuple(out)


def _pairs(strip: Strip) -> list[tuple[int, int]]:
    stack, pairs = [], []
    for p, sg in enumerate(strip.signs):
        if sg > 0:
            stack.append(p)
        else:
            if not stack:
                raise ValueError("strip walk dips below zero")
            pairs.append((stack.pop(), p))
    if stack:
        raise ValueError("strip walk does not return to zero")
    return pairs


# --------------------------------------------------------- configurations

def encode(types, colours: dict, domain: TriDomain) -> tuple[int, ...]:
    """Key from face types and ``{(lozenge, family): colour}``."""
    key = []
    for k, f in enumerate(domain.faces):
        t = types[k]
        loz = k if f[0] == "R" else _partner(domain, types, k)
        fa, fb = TYPE_FAMILIES[t]
        key.append(100 * TYPES.index(t) + 10 * colours[(loz, fa)] + colours[(loz, fb)])
    return tuple(key)


def decode(key, domain: TriDomain) -> tuple[tuple, dict]:
    """Inverse of :func:`encode`; raises if the two halves of a lozenge differ."""
    types = tuple(TYPES[c // 100] for c in key)
    _check_types(domain, types)
    colours = {}
    for k, f in enumerate(domain.faces):
        p = _partner(domain, types, k)
        if key[k] != key[p]:
            raise ValueError(f"lozenge halves {f} and {domain.faces[p]} disagree")
        if f[0] == "R":
            fa, fb = TYPE_FAMILIES[types[k]]
            colours[(k, fa)] = key[k] // 10 % 10
            colours[(k, fb)] = key[k] % 10
    return types, colours


@dataclass(frozen=True)
class LozengeTiling:
    """Structured view of a key: lozenges with their per-family colours."""

    domain: TriDomain
    key: tuple

    @property
    def lozenges(self) -> list[tuple]:
        types, colours = decode(self.key, self.domain)
        out = []
        for k in _lozenges(self.domain, types):
            p = _partner(self.domain, types, k)
            cols = {fam: colours[(k, fam)] for fam in TYPE_FAMILIES[types[k]]}
            out.append((self.domain.faces[k], self.domain.faces[p], types[k], cols))
        return out

    @property
    def heights(self) -> dict:
        return height_field(self.domain, decode(self.key, self.domain)[0])


def volume(domain: TriDomain, key_or_types) -> Fraction:
    """Sum of the vertex heights over the whole domain."""
    types = tuple(key_or_types)
    if types and not isinstance(types[0], str):
        types = tuple(TYPES[c // 100] for c in types)
    return sum(_surface(domain, types).heights.values(), Fraction(0))


def is_ground_basis(domain: TriDomain, key, s: int | None = None) -> bool:
    try:
        types, colours = decode(key, domain)
        surf = _surface(domain, types)
    except (ValueError, RuntimeError, IndexError):
        return False
    if not _is_dyck_surface(domain, surf):
        return False
    if s is not None and any(not 1 <= c <= s for c in colours.values()):
        return False
    for st in surf.strips:
        try:
            pairs = _pairs(st)
        except ValueError:
            return False
        for a, b in pairs:
            if colours[(st.lozenges[a], st.family)] != colours[(st.lozenges[b], st.family)]:
                return False
    return True


def _colourings(domain: TriDomain, surf: Surface, s: int):
    slots = []
    for st in surf.strips:
        for a, b in _pairs(st):
            slots.append(((st.lozenges[a], st.family), (st.lozenges[b], st.family)))
    for cols in itertools.product(range(1, s + 1), repeat=len(slots)):
        colours = {}
        for (x, y), c in zip(slots, cols):
            colours[x] = colours[y] = c
        yield encode(surf.types, colours, domain)


def enumerate_ground_basis(domain: TriDomain, s: int) -> list[tuple[int, ...]]:
    """Dyck tilings crossed with all colour-correlated colourings, sorted."""
    if not 1 <= s <= 9:
        raise ValueError("colour count must be between 1 and 9")
    out = []
    for surf in dyck_surfaces(domain):
        out.extend(_colourings(domain, surf, s))
    return sorted(out)


def ground_amplitudes(domain: TriDomain, s: int) -> dict[tuple[int, ...], QMonomial]:
    vols = {surf.types: sum(surf.heights.values(), Fraction(0)) for surf in dyck_surfaces(domain)}
    out = {}
    for key in enumerate_ground_basis(domain, s):
        types = tuple(TYPES[c // 100] for c in key)
        out[key] = QMonomial.power(vols[types])
    return out


def ground_state(domain: TriDomain, s: int, q: float) -> WeightedState:
    amps = ground_amplitudes(domain, s)
    return normalize(WeightedState({k: v.evaluate(q) for k, v in amps.items()}))


# ------------------------------------------------------------------- moves

def _hexagon_pairing(domain, types, w):
    """Lozenges covering the hexagon at ``w`` and whether ``w`` is a peak."""
    hexf = hexagon_faces(w)
    if not all(f in domain.index for f in hexf):
        return None
    ks = [domain.index[f] for f in hexf]
    if any(_partner(domain, types, k) not in ks for k in ks):
        return None
    lozs = sorted(k for k in ks if domain.faces[k][0] == "R")
    return lozs


def _flip_types(domain, types, w) -> tuple:
    hexf = hexagon_faces(w)
    new = list(types)
    for f in hexf:
        if f[0] != "R":
            continue
        k = domain.index[f]
        for d in TYPES:
            g = neighbour(f, d)
            if g in hexf and d != types[k]:
                new[k] = new[domain.index[g]] = d
    return tuple(new)


def lozenge_fredkin_move(domain: TriDomain, key, w, j: int):
    """Move ``j`` (1..8) at the hexagon around vertex ``w``, or None.

    Bit ``b`` of ``j - 1`` picks the conditioning lozenge of family ``b``
    (dashed, solid, dotted): 0 uses the lozenge before the hexagon in the
    strip, 1 the one after it.  Colours move as in the 1D Fredkin move of
    that family.  The move works in both directions.
    """
    if not 1 <= j <= 8:
        raise ValueError("j must be in 1..8")
    types, colours = decode(key, domain)
    lozs = _hexagon_pairing(domain, types, w)
    if lozs is None:
        return None
    surf = _surface(domain, types)
    hexset = set(lozs)
    plan = []
    for b, fam in enumerate(FAMILIES):
        variant = 1 + ((j - 1) >> b & 1)
        si, p = min(surf.slot[(k, fam)] for k in lozs if (k, fam) in surf.slot)
        st = surf.strips[si]
        if st.lozenges[p + 1] not in hexset:
            raise RuntimeError("strip leaves the hexagon early")
        lo = p - 1 if variant == 1 else p
        if lo < 0 or lo + 3 > len(st.lozenges):
            return None
        trip = tuple(st.signs[lo + i] * colours[(st.lozenges[lo + i], fam)] for i in range(3))
        new = _move_local(*trip, variant)
        if new is None:
            return None
        cond = st.lozenges[lo] if variant == 1 else st.lozenges[lo + 2]
        plan.append((fam, variant, cond, new))
    new_types = _flip_types(domain, types, w)
    try:
        nsurf = _surface(domain, new_types)
    except (ValueError, RuntimeError):
        return None
    new_colours = dict(colours)
    for k in lozs:
        for fam in FAMILIES:
            new_colours.pop((k, fam), None)
    for fam, variant, cond, new in plan:
        si, pc = nsurf.slot[(cond, fam)]
        st = nsurf.strips[si]
        lo = pc if variant == 1 else pc - 2
        for i in range(3):
            k = st.lozenges[lo + i]
            if (st.signs[lo + i] > 0) != (new[i] > 0):
                raise RuntimeError("move pattern disagrees with the flipped tiling")
            new_colours[(k, fam)] = abs(new[i])
    return encode(new_types, new_colours, domain)


def _color_pairs(domain, key):
    """Adjacent matched pairs ``(family, lozenge a, lozenge b, edge)`` of every strip."""
    return _adjacent_pairs(domain, tuple(TYPES[c // 100] for c in key))


@lru_cache(maxsize=4096)
def _adjacent_pairs(domain, types) -> tuple:
    out = []
    for st in _surface(domain, types).strips:
        for p in range(len(st.lozenges) - 1):
            if st.signs[p] > 0 and st.signs[p + 1] < 0:
                out.append((st.family, st.lozenges[p], st.lozenges[p + 1], st.edges[p + 1]))
    return tuple(out)


def _recolour(domain, key, fam, a, b, c):
    types, colours = decode(key, domain)
    colours = dict(colours)
    colours[(a, fam)] = colours[(b, fam)] = c
    return encode(types, colours, domain)


def move_graph_connected(domain: TriDomain, s: int) -> bool:
    """BFS over the ground basis using the 8 moves and pair recolourings."""
    basis = enumerate_ground_basis(domain, s)
    if not basis:
        return True
    seen = {basis[0]}
    todo = deque([basis[0]])
    while todo:
        key = todo.popleft()
        nbrs = [lozenge_fredkin_move(domain, key, w, j)
                for w in domain.interior_vertices for j in range(1, 9)]
        for fam, a, b, _ in _color_pairs(domain, key):
            nbrs.extend(_recolour(domain, key, fam, a, b, c) for c in range(1, s + 1))
        for nb in nbrs:
            if nb is not None and nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return seen == set(basis)


# ------------------------------------------------------------- hamiltonian

def dimer_energy(domain: TriDomain, key) -> int:
    """``sum_r (n_r - 1)^2`` with ``n_r`` the dimers covering face ``r``."""
    e = 0
    for k, f in enumerate(domain.faces):
        d = TYPES[key[k] // 100]
        g = neighbour(f, d)
        n = int(g in domain.index and key[domain.index[g]] // 100 == key[k] // 100)
        e += (n - 1) ** 2
    return e


def forced_boundary_lozenges(domain: TriDomain) -> dict:
    """Face on each boundary edge mapped to the only type keeping its third corner legal."""
    bh = domain.boundary_heights
    out = {}
    for e in domain.boundary_edges:
        f = domain.edge_faces[e][0]
        ok = []
        for d in TYPES:
            if face_edges(f)[d] == e or neighbour(f, d) not in domain.index:
                continue
            # tile steps on the face except across d
            h = {}
            verts = face_vertices(f)
            for v in verts:
                if v in bh:
                    h[v] = bh[v]
            fe = face_edges(f)
            changed = True
            good = True
            while changed and good:
                changed = False
                for dd, ed in fe.items():
                    a, b = edge_ends(ed)
                    step = -2 if dd == d else 1
                    if a in h and b not in h:
                        h[b] = h[a] + step
                        changed = True
                    elif b in h and a not in h:
                        h[a] = h[b] - step
                        changed = True
                    elif a in h and b in h and h[b] - h[a] != step:
                        good = False
            if good and all(edge_height(h, ed) >= 0 for ed in fe.values()):
                ok.append(d)
        if len(ok) == 1:
            out[f] = ok[0]
    return out


def boundary_energy(domain: TriDomain, key) -> int:
    forced = forced_boundary_lozenges(domain)
    return sum(TYPES[key[domain.index[f]] // 100] != d for f, d in forced.items())


@dataclass
class MoveProjector:
    """Sum over colourings of ``|T><T|`` for move ``j`` at vertex ``w``.

    ``|T> = (q^{-3/2} |high> - q^{3/2} |low>) / sqrt(q^{-3} + q^3)``; the pair
    (high, low) is related by the move, so the projector acts on a
    configuration through its move partner only.
    """

    domain: TriDomain
    w: tuple
    j: int
    q: float

    def apply(self, state: WeightedState) -> WeightedState:
        nrm = 1.0 / sqrt(self.q ** -3 + self.q ** 3)
        hi, lo = nrm * self.q ** -1.5, -nrm * self.q ** 1.5
        out: dict = {}
        done = set()
        for key in state.terms:
            if key in done:
                continue
            other = lozenge_fredkin_move(self.domain, key, self.w, self.j)
            if other is None:
                continue
            done.update((key, other))
            if volume(self.domain, key) > volume(self.domain, other):
                high, low = key, other
            else:
                high, low = other, key
            overlap = hi * state.amplitude(high) + lo * state.amplitude(low)
            if overlap:
                out[high] = out.get(high, 0.0) + overlap * hi
                out[low] = out.get(low, 0.0) + overlap * lo
        return WeightedState(out)


@dataclass
class ColourTerm:
    """Colour term on the adjacent up/down pair of ``family`` across ``edge``.

    Unequal colours are penalised; equal colours see ``s (1 - |u><u|)`` with
    ``|u>`` the uniform superposition of equal colourings.
    """

    domain: TriDomain
    family: str
    edge: tuple
    s: int

    def apply(self, state: WeightedState) -> WeightedState:
        out: dict = {}
        for key, amp in state.terms.items():
            for fam, a, b, e in _color_pairs(self.domain, key):
                if fam != self.family or e != self.edge:
                    continue
                _, colours = decode(key, self.domain)
                ca, cb = colours[(a, fam)], colours[(b, fam)]
                if ca != cb:
                    out[key] = out.get(key, 0.0) + amp
                    continue
                for c in range(1, self.s + 1):
                    k2 = _recolour(self.domain, key, fam, a, b, c)
                    out[k2] = out.get(k2, 0.0) + amp * ((self.s - 1.0) if c == ca else -1.0)
        return WeightedState(out)


def hamiltonian_terms(domain: TriDomain, s: int, q: float) -> dict[str, list]:
    hs = [MoveProjector(domain, w, j, q) for w in domain.interior_vertices for j in range(1, 9)]
    hc = []
    for fam in FAMILIES:
        d = FAMILY_DIR[fam]
        for e in domain.edges:
            if e[0] == d and len(domain.edge_faces[e]) == 2:
                hc.append(ColourTerm(domain, fam, e, s))
    return {"H_S": hs, "H_C": hc}


@dataclass
class AnnihilationReport:
    residuals: dict
    max_residual: float

    @property
    def ok(self) -> bool:
        return self.max_residual < 1e-12


def verify_annihilation(domain: TriDomain, s: int, q: float,
                        state: WeightedState | None = None) -> AnnihilationReport:
    gs = state if state is not None else ground_state(domain, s, q)
    res = {
        "H_0": sqrt(sum((dimer_energy(domain, k) * a) ** 2 for k, a in gs.terms.items())),
        "H_boundary": sqrt(sum((boundary_energy(domain, k) * a) ** 2 for k, a in gs.terms.items())),
    }
    for fam, terms in hamiltonian_terms(domain, s, q).items():
        res[fam] = max((norm(t.apply(gs)) for t in terms), default=0.0)
    return AnnihilationReport(res, max(res.values()))


# ----------------------------------------------------------------- network
#
# A face carries a tower of rank-5 prisms: k1 bottom, k5 top, k2 / k3 / k4 the
# lateral faces over its y / x / z edge.  A label is (dashed, solid, dotted);
# a component is (m, colour) with m = +-1 an arrow and (0, c) the coloured
# degenerate zero.

LEG_OF_DIR = {"y": "k2", "x": "k3", "z": "k4"}
LEGS5 = ("k1", "k2", "k3", "k4", "k5")
O = (0, 0)
W2, W3, W4 = Fraction(0), Fraction(1, 4), Fraction(1, 2)
ANCILLA = Fraction(-1, 12)


def _p(c):
    return (1, c)


def _m(c):
    return (-1, c)


def _z(c):
    return (0, c)


def prism_entries(s: int):
    """Yield ``(side, tile, colours, labels k1..k5, weight)`` for every entry."""
    cs = range(1, s + 1)
    zero = (O, O, O)
    for c1, c2 in itertools.product(cs, repeat=2):
        phys = {
            "x": (_p(c1), _p(c2), O),
            "y": (O, _m(c1), _p(c2)),
            "z": (_m(c1), O, _m(c2)),
        }
        for side in "RL":
            for n, t in zip((1, 2, 3), TYPES):
                yield side, f"{side}{n}", (c1, c2), (phys[t], zero, zero, zero, phys[t]), W2
        x, y, z = phys["x"], phys["y"], phys["z"]
        yield "R", "R4", (c1, c2), (x, (_z(c1), O, O), x, zero, zero), W3
        yield "R", "R5", (c1, c2), (y, (O, _p(c1), _p(c2)), zero, (O, _z(c1), O), zero), W3
        yield "R", "R6", (c1, c2), (z, zero, (O, O, _z(c2)), (_p(c1), O, _p(c2)), zero), W3
        yield "L", "L4", (c1, c2), (x, zero, x, (O, _z(c2), O), zero), W3
        yield "L", "L5", (c1, c2), (y, (O, _p(c1), _p(c2)), (O, O, _z(c2)), zero, zero), W3
        yield "L", "L6", (c1, c2), (z, (_z(c1), O, O), zero, (_p(c1), O, _p(c2)), zero), W3
    for c1, c2, c3 in itertools.product(cs, repeat=3):
        pmp = (_p(c1), _m(c2), _p(c3))
        mpm = (_m(c1), _p(c2), _m(c3))
        mmm = (_m(c1), _m(c2), _m(c3))
        ppp = (_p(c1), _p(c2), _p(c3))
        cols = (c1, c2, c3)
        yield "R", "R7", cols, (zero, pmp, mmm, (O, _z(c2), O), zero), W4
        yield "R", "R8", cols, (zero, mpm, (O, O, _z(c3)), mpm, zero), W4
        yield "R", "R9", cols, (zero, (_z(c1), O, O), ppp, pmp, zero), W4
        yield "L", "L7", cols, (zero, (_z(c1), O, O), mmm, mpm, zero), W4
        yield "L", "L8", cols, (zero, mpm, ppp, (O, _z(c2), O), zero), W4
        yield "L", "L9", cols, (zero, pmp, (O, O, _z(c3)), pmp, zero), W4


@lru_cache(maxsize=None)
def _tile_table(s: int) -> dict:
    return {(name, cols): (labs, wt) for _, name, cols, labs, wt in prism_entries(s)}


@lru_cache(maxsize=None)
def prism_alphabet(s: int) -> LegAlphabet:
    zero = (O, O, O)
    syms = {lab for *_, labs, _ in prism_entries(s) for lab in labs}
    syms.discard(zero)
    return LegAlphabet([zero] + sorted(syms))


@lru_cache(maxsize=None)
def prism_tensors(s: int) -> dict[str, SparseTensor]:
    al = prism_alphabet(s)
    legs = tuple((k, al) for k in LEGS5)
    items = {"R": [], "L": []}
    for side, _, _, labs, wt in prism_entries(s):
        items[side].append((labs, QMonomial.power(wt)))
    return {k: SparseTensor.from_symbols(legs, v) for k, v in items.items()}


@lru_cache(maxsize=64)
def tower_ranges(domain: TriDomain) -> tuple[int, dict]:
    """Top level ``T`` and the lowest level of each tower.

    The turning (3-arrow) tile of face ``r`` sits at level ``T - phi_r``;
    towers reach down to the lowest such level over the uncoloured basis.
    """
    hmax = {f: Fraction(0) for f in domain.faces}
    for surf in dyck_surfaces(domain):
        for f, ph in spin_heights(domain, surf.heights).items():
            hmax[f] = max(hmax[f], ph)
    top = 1 + int(max(hmax.values()))
    return top, {f: top - int(h) for f, h in hmax.items()}


def weighted_walls(domain: TriDomain) -> set:
    """Boundary edges whose wall ancilla carries ``q^{-1/12}``.

    A boundary face touching a boundary vertex with four adjacent faces
    receives one weighted ancilla on its boundary edge.
    """
    out = set()
    for e in domain.boundary_edges:
        if any(domain.degree[v] == 4 for v in edge_ends(e)):
            out.add(e)
    return out


def build_network(domain: TriDomain, s: int, q: float | None = None) -> NetworkGraph:
    """Prism network; node ``(face, level)`` with levels ``bottom..T``."""
    top, bottom = tower_ranges(domain)
    tens = prism_tensors(s)
    al = prism_alphabet(s)
    weighted = weighted_walls(domain)
    net = NetworkGraph()
    for f in domain.faces:
        for lev in range(bottom[f], top + 1):
            net.add_node((f, lev), tens[f[0]], f)
        for lev in range(bottom[f], top):
            net.connect((f, lev), "k5", (f, lev + 1), "k1")
        net.add_node(("cap", f), delta_cap("k", al), f)
        net.connect((f, top), "k5", ("cap", f), "k")
        net.add_open((f, bottom[f]), "k1", "physical")
    for e in domain.edges:
        leg = LEG_OF_DIR[e[0]]
        fs = domain.edge_faces[e]
        for lev in range(1, top + 1):
            present = [f for f in fs if bottom[f] <= lev]
            if len(present) == 2:
                net.connect((present[0], lev), leg, (present[1], lev), leg)
                continue
            for f in present:
                wt = QMonomial.power(ANCILLA) if (len(fs) == 1 and e in weighted) else QMonomial(1, 0)
                net.add_node(("wall", f, lev, leg), delta_cap("k", al, weight=wt), f)
                net.connect((f, lev), leg, ("wall", f, lev, leg), "k")
    net.validate()
    return net.numeric(q) if q is not None else net


def physical_symbol(code: int):
    t = TYPES[code // 100]
    a, b = code // 10 % 10, code % 10
    return {"x": (_p(a), _p(b), O), "y": (O, _m(a), _p(b)), "z": (_m(a), O, _m(b))}[t]


def physical_assignment(net: NetworkGraph, key, domain: TriDomain) -> dict:
    return {(node, leg): physical_symbol(key[domain.index[node[0]]])
            for node, leg in net.physical_legs()}


def key_from_symbols(symbols, net: NetworkGraph, domain: TriDomain) -> tuple[int, ...]:
    key = [0] * len(domain)
    for (node, _), sym in zip(net.physical_legs(), symbols):
        da, so, do = sym
        if do == O:
            code = 10 * da[1] + so[1]
        elif da == O:
            code = 100 + 10 * so[1] + do[1]
        else:
            code = 200 + 10 * da[1] + do[1]
        key[domain.index[node[0]]] = code
    return tuple(key)


# --------------------------------------------------------------- bijection

_TURN = {"x": "4", "y": "5", "z": "6"}
_FLAT = {"x": "1", "y": "2", "z": "3"}
# 4-arrow tile of a hexagon face, keyed by the direction of its outer edge
_HEX_TILE = {("R", "z"): "R7", ("R", "x"): "R8", ("R", "y"): "R9",
             ("L", "y"): "L7", ("L", "z"): "L8", ("L", "x"): "L9"}
_OPEN_FAMILY = {"y": 0, "z": 1, "x": 2}  # component index of the 0^c on an outer edge


@dataclass
class PrismTiling:
    """Tile names and colours per tower, bottom to top."""

    top: int
    towers: dict  # face -> [(level, tile name, colours)]

    def label(self, face, level: int, leg: str, s: int):
        for lev, name, cols in self.towers[face]:
            if lev == level:
                return _tile_table(s)[(name, cols)][0][LEGS5.index(leg)]
        return (O, O, O)

    def counts(self, face) -> tuple[int, int, int]:
        n = [0, 0, 0]
        for _, name, _ in self.towers[face]:
            n[0 if name[1] in "123" else 1 if name[1] in "456" else 2] += 1
        return tuple(n)


def _outer_dir(face, w) -> str:
    return next(d for d, e in face_edges(face).items() if w not in edge_ends(e))


def tiling_from_config(domain: TriDomain, key, s: int) -> PrismTiling:
    """Prism tiling of a ground-basis key.

    The turning tile sits at ``T - phi_r``; the faces with ``phi_r > T - l``
    are peeled into hexagons at each level ``l``, and hexagon colours are
    read off the degenerate zeros they share with neighbouring tiles.
    """
    top, bottom = tower_ranges(domain)
    types, colours = decode(key, domain)
    surf = _surface(domain, types)
    phi = spin_heights(domain, surf.heights)
    towers = {f: [] for f in domain.faces}
    hexes = {}  # (level, centre) -> faces
    for lev in range(1, top + 1):
        active = [f for f in domain.faces if phi[f] > top - lev]
        if active:
            for w in hexagon_peel(active):
                hexes[(lev, w)] = hexagon_faces(w)
    hex_of = {(lev, f): w for (lev, w), fs in hexes.items() for f in fs}
    # union-find over the degenerate-zero slots
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        parent[find(a)] = find(b)

    known: dict = {}

    def slot(f, lev, d):
        """Degenerate-zero slot a tile exposes on its ``d`` edge, or None."""
        if (lev, f) in hex_of:
            w = hex_of[(lev, f)]
            if _outer_dir(f, w) == d:
                return ("hex", lev, w, _OPEN_FAMILY[d])
            return None
        if lev == top - phi[f]:
            k = domain.index[f]
            loz = k if f[0] == "R" else _partner(domain, types, k)
            name = f[0] + _TURN[types[k]]
            cols = tuple(colours[(loz, fam)] for fam in TYPE_FAMILIES[types[k]])
            lab = _tile_table(s)[(name, cols)][0][LEGS5.index(LEG_OF_DIR[d])]
            for comp, val in enumerate(lab):
                if val[0] == 0 and val[1] > 0:
                    sl = ("turn", f, comp)
                    known[sl] = val[1]
                    return sl
        return None

    for e in domain.edges:
        fs = domain.edge_faces[e]
        if len(fs) != 2:
            continue
        for lev in range(1, top + 1):
            a = slot(fs[0], lev, e[0]) if bottom[fs[0]] <= lev else None
            b = slot(fs[1], lev, e[0]) if bottom[fs[1]] <= lev else None
            if a is not None and b is not None:
                union(a, b)
    comp_colour: dict = {}
    for sl, c in known.items():
        r = find(sl)
        if comp_colour.setdefault(r, c) != c:
            raise ValueError("degenerate zeros carry two colours")
    for f in domain.faces:
        k = domain.index[f]
        loz = k if f[0] == "R" else _partner(domain, types, k)
        cols2 = tuple(colours[(loz, fam)] for fam in TYPE_FAMILIES[types[k]])
        turn = top - int(phi[f])
        for lev in range(bottom[f], top + 1):
            if lev < turn:
                towers[f].append((lev, f[0] + _FLAT[types[k]], cols2))
            elif lev == turn:
                towers[f].append((lev, f[0] + _TURN[types[k]], cols2))
            else:
                w = hex_of[(lev, f)]
                cols3 = []
                for comp in range(3):
                    r = find(("hex", lev, w, comp))
                    if r not in comp_colour:
                        raise ValueError(f"hexagon colour at {w}, level {lev} is not fixed")
                    cols3.append(comp_colour[r])
                towers[f].append((lev, _HEX_TILE[(f[0], _outer_dir(f, w))], tuple(cols3)))
    tiling = PrismTiling(top, towers)
    _check_continuity(domain, tiling, s)
    return tiling


def _check_continuity(domain: TriDomain, tiling: PrismTiling, s: int) -> None:
    top, bottom = tiling.top, tower_ranges(domain)[1]
    zero = (O, O, O)
    for f in domain.faces:
        levels = [lev for lev, _, _ in tiling.towers[f]]
        if levels != list(range(bottom[f], top + 1)):
            raise ValueError(f"tower of {f} has gaps")
        for lev in range(bottom[f], top):
            if tiling.label(f, lev, "k5", s) != tiling.label(f, lev + 1, "k1", s):
                raise ValueError(f"vertical mismatch in tower {f} at level {lev}")
        if tiling.label(f, top, "k5", s) != zero:
            raise ValueError(f"tower {f} leaks through the top")
    for e in domain.edges:
        leg = LEG_OF_DIR[e[0]]
        fs = domain.edge_faces[e]
        for lev in range(1, top + 1):
            labs = [tiling.label(f, lev, leg, s) for f in fs if bottom[f] <= lev]
            present = [f for f in fs if bottom[f] <= lev]
            if len(present) == 2 and labs[0] != labs[1]:
                raise ValueError(f"lateral mismatch on {e} at level {lev}")
            if len(present) == 1 and labs[0] != zero:
                raise ValueError(f"arrow leaves through {e} at level {lev}")


def config_from_tiling(domain: TriDomain, tiling: PrismTiling, s: int) -> tuple[int, ...]:
    """Read the physical key off the bottom faces of the towers."""
    out = []
    for f in domain.faces:
        lev, name, cols = tiling.towers[f][0]
        lab = _tile_table(s)[(name, cols)][0][0]
        t = {"1": "x", "2": "y", "3": "z", "4": "x", "5": "y", "6": "z"}.get(name[1])
        if t is None:
            raise ValueError(f"tower {f} starts with a 4-arrow tile")
        if physical_symbol(100 * TYPES.index(t) + 10 * cols[0] + cols[1]) != lab:
            raise ValueError("bottom label disagrees with the tile")
        out.append(100 * TYPES.index(t) + 10 * cols[0] + cols[1])
    return tuple(out)


def tiling_exponent(domain: TriDomain, tiling: PrismTiling) -> Fraction:
    """Sum of tile weights plus the weighted wall ancillas."""
    wts = {"1": W2, "2": W2, "3": W2, "4": W3, "5": W3, "6": W3, "7": W4, "8": W4, "9": W4}
    total = sum((wts[name[1]] for tw in tiling.towers.values() for _, name, _ in tw), Fraction(0))
    return total + ANCILLA * len(weighted_walls(domain))


# ----------------------------------------------------------- weight solver

def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> tuple[list | None, int]:
    """Gauss-Jordan over the rationals; returns one solution (free vars 0) and the rank."""
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    n = len(rows[0]) if rows else 0
    piv_cols = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                fac = m[i][c]
                m[i] = [a - fac * b for a, b in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
    if any(all(x == 0 for x in row[:-1]) and row[-1] != 0 for row in m):
        return None, r
    sol = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        sol[c] = m[i][-1]
    return sol, r


@dataclass
class WeightReport:
    bulk: tuple          # (x2, x3, x4)
    rank: int
    equations: int
    boundary: dict       # boundary face -> required 3-arrow exponent


def solve_tile_weights(domain: TriDomain, x2: Fraction | int | None = 0) -> WeightReport:
    """Tile exponents reproducing ``q^V`` tower by tower.

    Bulk towers give ``(M_r - phi_r - 1) x2 + x3 + phi_r x4 = phi_r/2 + 1/4``
    for every ``phi_r`` seen in the basis.  Boundary towers have a single
    3-arrow tile whose exponent collects ``phi_v / 2`` from corners with two
    faces, ``phi_v / 3`` from corners with four and ``phi_v / 6`` otherwise.
    Pass ``x2=None`` to leave ``x2`` free; it is then set to 0 and ``rank``
    tells whether the family is one-parameter.
    """
    top, bottom = tower_ranges(domain)
    bedge_faces = {domain.edge_faces[e][0] for e in domain.boundary_edges}
    seen = set()
    for surf in dyck_surfaces(domain):
        phi = spin_heights(domain, surf.heights)
        for f in domain.faces:
            if f not in bedge_faces:
                seen.add((top - bottom[f] + 1, phi[f]))
    # unknowns ordered (x3, x4, x2) so that x2 is the free one when unfixed
    rows, rhs = [], []
    for m_r, ph in sorted(seen):
        rows.append([Fraction(1), ph, Fraction(m_r) - ph - 1])
        rhs.append(ph / 2 + Fraction(1, 4))
    if x2 is not None:
        rows.append([Fraction(0), Fraction(0), Fraction(1)])
        rhs.append(Fraction(x2))
    sol, rank = _solve_exact(rows, rhs)
    if sol is None:
        raise ValueError("tile weight equations are inconsistent")
    sol = [sol[2], sol[0], sol[1]]
    bh = domain.boundary_heights
    share = {2: HALF, 4: Fraction(1, 3)}
    any_surf = dyck_surfaces(domain)[0]
    boundary = {}
    for f in sorted(bedge_faces):
        x = Fraction(0)
        for v in face_vertices(f):
            if v in bh:
                x += bh[v] * share[domain.degree[v]]
            else:
                x += any_surf.heights[v] / 6
        boundary[f] = x
    return WeightReport(tuple(sol), rank, len(rows), boundary)
