"""Coloured 6-vertex-coupled Fredkin chains on an ``L x L`` lattice.

Spins live on lattice edges.  ``Sh[x, y]`` (``0 <= x < L``, ``0 <= y < L-1``)
sits on the vertical edge from ``(x, y)`` to ``(x, y+1)`` and ``Sv[x, y]``
(``0 <= x < L-1``, ``0 <= y < L``) on the horizontal edge from ``(x, y)`` to
``(x+1, y)``.  A spin value is ``+c`` (up, ``S = +1/2``) or ``-c`` (down).

The height field lives on dual points; ``phi[a, b]`` is the height at
``(a + 1/2, b + 1/2)`` for ``-1 <= a, b <= L-1`` with

    phi[a, b] = phi[a-1, b] + 2 Sh[a, b] = phi[a, b-1] + 2 Sv[a, b].

The ring ``a = -1``, ``a = L-1``, ``b = -1``, ``b = L-1`` is fixed: it
alternates between 0 and 1 starting from ``phi[-1, -1] = 0``.  Horizontal
chain ``b`` is ``Sh[0..L-1, b]``; its walk runs along dual row ``b`` from
``phi[-1, b]`` to ``phi[L-1, b]``.  Vertical chain ``a`` is ``Sv[a, 0..L-1]``.
A chain whose ring value is 1 is a Dyck walk raised by one unit.

Configurations are stored as flat keys: the ``Sh`` values in ``(x, y)``
order followed by the ``Sv`` values in ``(x, y)`` order.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import sqrt

from .fredkin1d import _move_local, matching
from .statevec import WeightedState, apply_local_operator, norm, normalize
from .tensor_core import (
    LegAlphabet,
    NetworkGraph,
    QMonomial,
    SparseTensor,
    delta_cap,
)

__all__ = [
    "Lattice",
    "ice_rule_ok",
    "height_field",
    "volume",
    "volume_operator_form",
    "is_ground_basis",
    "enumerate_ground_basis",
    "ground_amplitudes",
    "ground_state",
    "fredkin_move_2d",
    "boundary_energy",
    "hamiltonian_terms",
    "verify_annihilation",
    "network_top",
    "build_network",
    "physical_assignment",
    "CubeTiling",
    "tiling_from_config",
    "config_from_tiling",
    "local_surjectivity_report",
    "gauge_identity_check",
    "TILE_WEIGHTS",
    "to_json",
    "from_json",
    "move_graph_connected",
]

Z = (0, 0)


class Lattice:
    """Site bookkeeping for a given ``L``."""

    def __init__(self, L: int):
        if L < 2 or L % 2:
            raise ValueError("L must be even and >= 2")
        self.L = L
        self.sites = [("h", x, y) for x in range(L) for y in range(L - 1)]
        self.sites += [("v", x, y) for x in range(L - 1) for y in range(L)]
        self.index = {s: k for k, s in enumerate(self.sites)}
        self.interior = [(a, b) for a in range(L - 1) for b in range(L - 1)]

    def __len__(self) -> int:
        return len(self.sites)

    def ring(self, a: int, b: int) -> int:
        """Fixed height on the boundary ring."""
        L = self.L
        if a in (-1, L - 1):
            return 0 if b in (-1, L - 1) else (b + 1) % 2
        if b in (-1, L - 1):
            return (a + 1) % 2
        raise ValueError(f"({a}, {b}) is not on the ring")

    def is_ring(self, a: int, b: int) -> bool:
        return a in (-1, self.L - 1) or b in (-1, self.L - 1)

    def row_base(self, b: int) -> int:
        return self.ring(-1, b)

    def col_base(self, a: int) -> int:
        return self.ring(a, -1)

    def spin(self, key, kind: str, x: int, y: int) -> int:
        """Signed spin value including the fixed spins outside the lattice (colour 0)."""
        L = self.L
        if kind == "h":
            if 0 <= x < L and 0 <= y < L - 1:
                return key[self.index[("h", x, y)]]
            if 0 <= x < L and y in (-1, L - 1):
                return 1 if x % 2 == 0 else -1
        else:
            if 0 <= x < L - 1 and 0 <= y < L:
                return key[self.index[("v", x, y)]]
            if 0 <= y < L and x in (-1, L - 1):
                return 1 if y % 2 == 0 else -1
        raise IndexError(f"no spin {kind}[{x}, {y}]")

    def row_sites(self, b: int) -> list[int]:
        return [self.index[("h", x, b)] for x in range(self.L)]

    def col_sites(self, a: int) -> list[int]:
        return [self.index[("v", a, y)] for y in range(self.L)]


@lru_cache(maxsize=None)
def lattice(L: int) -> Lattice:
    return Lattice(L)


def _half(v: int) -> Fraction:
    return Fraction(1 if v > 0 else -1, 2)


def ice_rule_ok(key, L: int) -> bool:
    """Two-in/two-out at every vertex, fixed outside spins included."""
    lat = lattice(L)
    for x in range(L):
        for y in range(L):
            t = (_half(lat.spin(key, "h", x, y - 1)) - _half(lat.spin(key, "h", x, y))
                 - _half(lat.spin(key, "v", x - 1, y)) + _half(lat.spin(key, "v", x, y)))
            if t != 0:
                return False
    return True


class IceRuleViolation(ValueError):
    """Height integration is path dependent."""


def height_field(key, L: int) -> dict[tuple[int, int], int]:
    """Integrate the heights of all dual points; raises on inconsistency."""
    lat = lattice(L)
    phi: dict[tuple[int, int], int] = {}
    for a in range(-1, L):
        for b in (-1, L - 1):
            phi[(a, b)] = lat.ring(a, b)
    for b in range(0, L - 1):
        phi[(-1, b)] = lat.ring(-1, b)
        phi[(L - 1, b)] = lat.ring(L - 1, b)
    for b in range(L - 1):
        for a in range(L - 1):
            phi[(a, b)] = phi[(a - 1, b)] + (1 if key[lat.index[("h", a, b)]] > 0 else -1)
    for a in range(L - 1):
        for b in range(L):
            step = 1 if key[lat.index[("v", a, b)]] > 0 else -1
            if phi[(a, b)] != phi[(a, b - 1)] + step:
                raise IceRuleViolation(f"vertical relation fails at dual ({a}, {b})")
    for b in range(L - 1):
        step = 1 if key[lat.index[("h", L - 1, b)]] > 0 else -1
        if phi[(L - 1, b)] != phi[(L - 2, b)] + step:
            raise IceRuleViolation(f"horizontal relation fails at dual ({L - 1}, {b})")
    return phi


def volume(key, L: int) -> int:
    """Sum of heights over the interior dual points."""
    phi = height_field(key, L)
    return sum(phi[p] for p in lattice(L).interior)


def volume_operator_form(key, L: int) -> Fraction:
    """``L/2 + sum (L-1-x) Sh + sum (L-1-y) Sv`` evaluated on a configuration."""
    lat = lattice(L)
    v = Fraction(L, 2)
    for (kind, x, y), val in zip(lat.sites, key):
        w = (L - 1 - x) if kind == "h" else (L - 1 - y)
        v += w * _half(val)
    return v


def _chain_ok(values, base: int) -> bool:
    h = base
    for v in values:
        h += 1 if v > 0 else -1
        if h < base:
            return False
    if h != base:
        return False
    pairs = matching(values)
    return all(values[i] == -values[j] for i, j in pairs.items() if i < j)


def is_ground_basis(key, L: int, s: int | None = None) -> bool:
    lat = lattice(L)
    if len(key) != len(lat) or any(v == 0 for v in key):
        return False
    if s is not None and any(abs(v) > s for v in key):
        return False
    if not ice_rule_ok(key, L):
        return False
    for b in range(L - 1):
        if not _chain_ok([key[i] for i in lat.row_sites(b)], lat.row_base(b)):
            return False
    for a in range(L - 1):
        if not _chain_ok([key[i] for i in lat.col_sites(a)], lat.col_base(a)):
            return False
    return True


def _surfaces(L: int):
    """Height fields on the interior dual points obeying all chain floors."""
    lat = lattice(L)
    pts = [(a, b) for b in range(L - 1) for a in range(L - 1)]
    phi = {}
    for a in range(-1, L):
        for b in range(-1, L):
            if lat.is_ring(a, b):
                phi[(a, b)] = lat.ring(a, b)

    def rec(k):
        if k == len(pts):
            yield dict(phi)
            return
        a, b = pts[k]
        left, below = phi[(a - 1, b)], phi[(a, b - 1)]
        floor = max(lat.row_base(b), lat.col_base(a))
        for v in (left - 1, left + 1):
            if v < floor or abs(v - below) != 1:
                continue
            if a == L - 2 and abs(v - phi[(L - 1, b)]) != 1:
                continue
            if b == L - 2 and abs(v - phi[(a, L - 1)]) != 1:
                continue
            phi[(a, b)] = v
            yield from rec(k + 1)
        phi.pop((a, b), None)

    yield from rec(0)


def _spins_from_heights(phi, L: int) -> list[int]:
    lat = lattice(L)
    out = []
    for kind, x, y in lat.sites:
        if kind == "h":
            out.append(1 if phi[(x, y)] > phi[(x - 1, y)] else -1)
        else:
            out.append(1 if phi[(x, y)] > phi[(x, y - 1)] else -1)
    return out


def enumerate_ground_basis(L: int, s: int) -> list[tuple[int, ...]]:
    """All ground-basis configurations, sorted."""
    lat = lattice(L)
    chains = [lat.row_sites(b) for b in range(L - 1)] + [lat.col_sites(a) for a in range(L - 1)]
    out = []
    for phi in _surfaces(L):
        base = _spins_from_heights(phi, L)
        pair_list = []
        for sites in chains:
            vals = [base[i] for i in sites]
            for i, j in matching(vals).items():
                if i < j:
                    pair_list.append((sites[i], sites[j]))
        for cols in itertools.product(range(1, s + 1), repeat=len(pair_list)):
            key = list(base)
            for (i, j), c in zip(pair_list, cols):
                key[i], key[j] = c, -c
            out.append(tuple(key))
    out.sort()
    return out


def ground_amplitudes(L: int, s: int) -> dict[tuple[int, ...], QMonomial]:
    return {k: QMonomial.power(volume(k, L)) for k in enumerate_ground_basis(L, s)}


def ground_state(L: int, s: int, q: float) -> WeightedState:
    amps = ground_amplitudes(L, s)
    return normalize(WeightedState({k: v.evaluate(q) for k, v in amps.items()}))


# ---------------------------------------------------------------- moves

def _move_sites(L: int, a: int, b: int, j: int):
    """Six sites of move ``j`` at dual point ``(a, b)`` or None if off the lattice.

    Returns ``(row triple, column triple)`` of site indices, each ordered
    along its chain.  Bit 0 of ``j - 1`` picks the row variant (F1 uses the
    spin before the peak, F2 the one after), bit 1 the column variant.
    """
    lat = lattice(L)
    if not (0 <= a <= L - 2 and 0 <= b <= L - 2) or j not in (1, 2, 3, 4):
        return None
    hv, vv = ((j - 1) & 1) + 1, ((j - 1) >> 1) + 1
    xs = (a - 1, a, a + 1) if hv == 1 else (a, a + 1, a + 2)
    ys = (b - 1, b, b + 1) if vv == 1 else (b, b + 1, b + 2)
    if min(xs) < 0 or max(xs) > L - 1 or min(ys) < 0 or max(ys) > L - 1:
        return None
    row = tuple(lat.index[("h", x, b)] for x in xs)
    col = tuple(lat.index[("v", a, y)] for y in ys)
    return row, col, hv, vv


def fredkin_move_2d(key, L: int, a: int, b: int, j: int):
    """Apply 2D Fredkin move ``j`` at dual point ``(a, b)``, in either direction.

    The row and column each undergo the 1D move of the chosen variant; both
    must change the height of the same dual point, which then drops or
    rises by 2 while every other height is unchanged.
    """
    sites = _move_sites(L, a, b, j)
    if sites is None:
        return None
    row, col, hv, vv = sites
    new_row = _move_local(*(key[i] for i in row), hv)
    new_col = _move_local(*(key[i] for i in col), vv)
    if new_row is None or new_col is None:
        return None
    # both chains must move in the same direction (both peak->valley or both back)
    peak_row = key[row[1 if hv == 1 else 0]] > 0 and key[row[2 if hv == 1 else 1]] < 0
    peak_col = key[col[1 if vv == 1 else 0]] > 0 and key[col[2 if vv == 1 else 1]] < 0
    if peak_row != peak_col:
        return None
    out = list(key)
    for i, v in zip(row + col, new_row + new_col):
        out[i] = v
    return tuple(out)


def _color_moves(key, L: int, s: int):
    lat = lattice(L)
    chains = [lat.row_sites(b) for b in range(L - 1)] + [lat.col_sites(a) for a in range(L - 1)]
    for sites in chains:
        for i, j in zip(sites, sites[1:]):
            if key[i] > 0 and key[j] == -key[i]:
                for c in range(1, s + 1):
                    if c != key[i]:
                        out = list(key)
                        out[i], out[j] = c, -c
                        yield tuple(out)


def move_graph_connected(L: int, s: int) -> bool:
    """BFS over the basis with 2D Fredkin moves and adjacent-pair recolourings."""
    basis = enumerate_ground_basis(L, s)
    seen = {basis[0]}
    todo = deque([basis[0]])
    while todo:
        k = todo.popleft()
        nbrs = [fredkin_move_2d(k, L, a, b, j)
                for a in range(L - 1) for b in range(L - 1) for j in (1, 2, 3, 4)]
        nbrs.extend(_color_moves(k, L, s))
        for nb in nbrs:
            if nb is not None and nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return len(seen) == len(basis)


# ---------------------------------------------------------- hamiltonian

def ice_energy(key, L: int) -> Fraction:
    lat = lattice(L)
    e = Fraction(0)
    for x in range(L):
        for y in range(L):
            t = (_half(lat.spin(key, "h", x, y - 1)) - _half(lat.spin(key, "h", x, y))
                 - _half(lat.spin(key, "v", x - 1, y)) + _half(lat.spin(key, "v", x, y)))
            e += t * t
    return e


def boundary_energy(key, L: int) -> Fraction:
    """Diagonal boundary term; zero exactly on configurations with the fixed rows."""
    lat = lattice(L)

    def h(x, y):
        return _half(lat.spin(key, "h", x, y))

    def v(x, y):
        return _half(lat.spin(key, "v", x, y))

    e = Fraction(4 * L - 6)
    e += sum(h(L - 1, y) - h(0, y) for y in range(L - 1))
    e += sum((-1) ** (x + 1) * (h(x, 0) + h(x, L - 2)) for x in range(1, L - 1))
    e += sum(v(x, L - 1) - v(x, 0) for x in range(L - 1))
    e += sum((-1) ** (y + 1) * (v(0, y) + v(L - 2, y)) for y in range(1, L - 1))
    return e


def _projector(vec: dict) -> dict:
    return {k: [(k2, v2 * v) for k2, v2 in vec.items()] for k, v in vec.items()}


def _add_projector(op: dict, vec: dict) -> None:
    for k, cols in _projector(vec).items():
        op.setdefault(k, []).extend(cols)


def _up_patterns(variant: int, c1, c2, c3):
    """High and low local triples of a 1D Fredkin move with colours c1..c3."""
    if variant == 1:
        return (c1, c2, -c3), (c2, -c3, c1)
    return (c1, -c2, -c3), (-c3, c1, -c2)


def hamiltonian_terms(L: int, s: int, q: float) -> dict[str, list]:
    """Off-diagonal and projector terms, grouped by family.

    ``H_S`` and ``H_C`` are returned as ``(support, op)`` pairs.  Each ``H_S``
    entry is the sum over colourings of the projectors of one move at one
    dual point; these projectors have disjoint supports, so a vanishing
    residual for the sum implies it for every single projector.
    """
    lat = lattice(L)
    cols = range(1, s + 1)
    hs = []
    nrm = 1.0 / sqrt(q ** -2 + q ** 2)
    for a, b in lat.interior:
        for j in (1, 2, 3, 4):
            sites = _move_sites(L, a, b, j)
            if sites is None:
                continue
            row, col, hv, vv = sites
            op: dict = {}
            for cr in itertools.product(cols, repeat=3):
                hi_r, lo_r = _up_patterns(hv, *cr)
                for cc in itertools.product(cols, repeat=3):
                    hi_c, lo_c = _up_patterns(vv, *cc)
                    _add_projector(op, {hi_r + hi_c: nrm / q, lo_r + lo_c: -nrm * q})
            hs.append((list(row + col), op))
    hc = []
    chains = [lat.row_sites(b) for b in range(L - 1)] + [lat.col_sites(a) for a in range(L - 1)]
    for sites in chains:
        for i, j in zip(sites, sites[1:]):
            op = {(c1, -c2): [((c1, -c2), 1.0)] for c1 in cols for c2 in cols if c1 != c2}
            for c1 in cols:
                op[(c1, -c1)] = [((c2, -c2), (s - 1.0) if c1 == c2 else -1.0) for c2 in cols]
            hc.append(([i, j], op))
    return {"H_S": hs, "H_C": hc}


@dataclass
class AnnihilationReport:
    residuals: dict
    max_residual: float

    @property
    def ok(self) -> bool:
        return self.max_residual < 1e-12


def verify_annihilation(L: int, s: int, q: float, state: WeightedState | None = None) -> AnnihilationReport:
    """Residual norms of every Hamiltonian family on the ground state.

    ``H_0`` and ``H_boundary`` are diagonal; their residual is the norm of
    the diagonal applied to the state.
    """
    gs = state if state is not None else ground_state(L, s, q)
    res = {}
    res["H_0"] = sqrt(sum((float(ice_energy(k, L)) * a) ** 2 for k, a in gs.terms.items()))
    res["H_boundary"] = sqrt(sum((float(boundary_energy(k, L)) * a) ** 2 for k, a in gs.terms.items()))
    for fam, terms in hamiltonian_terms(L, s, q).items():
        res[fam] = max((norm(apply_local_operator(gs, sup, op)) for sup, op in terms), default=0.0)
    return AnnihilationReport(res, max(res.values()))


# -------------------------------------------------------------- network
#
# Each spin carries a tower of rank-6 tiles: k1 bottom, k6 top and four
# lateral faces k2 (+x,-y), k3 (-x,-y), k4 (-x,+y), k5 (+x,+y).  Around the
# dual point (a, b) the faces pair as
#     Sh[a,b].k2 - Sv[a,b].k4      Sh[a,b].k5 - Sv[a,b+1].k3
#     Sh[a+1,b].k3 - Sv[a,b].k5    Sh[a+1,b].k4 - Sv[a,b+1].k2
# A leg label is (dashed, solid); each component is (m, colour).

TILE_WEIGHTS = {
    "H1": 0, "H2": Fraction(1, 4), "H3": Fraction(1, 2), "H4": Fraction(1, 4), "H5": 0,
    "V1": 0, "V2": Fraction(1, 4), "V3": Fraction(1, 2), "V4": Fraction(1, 4), "V5": 0,
}
LEGS6 = ("k1", "k2", "k3", "k4", "k5", "k6")


def tile_entries(s: int):
    """Yield ``(tile name, colours, leg labels)`` for every non-zero entry.

    Colour 0 is reserved for the fixed wall arrows of the raised chains.  It
    may pass through a tile laterally but no tile starts or ends it, so a
    raised chain can never drop to height 0.
    """
    cs = range(1, s + 1)
    passing = range(0, s + 1)
    O = (Z, Z)
    for c1 in cs:
        d2, dm2 = ((2, c1), Z), ((-2, c1), Z)
        yield "H1", (c1,), (d2, O, O, O, O, d2)
        yield "H5", (c1,), (dm2, O, O, O, O, dm2)
        v2, vm2 = (Z, (2, c1)), (Z, (-2, c1))
        yield "V1", (c1,), (v2, O, O, O, O, v2)
        yield "V5", (c1,), (vm2, O, O, O, O, vm2)
        for c2 in passing:
            hp = ((1, c1), (1, c2))
            yield "H2", (c1, c2), (d2, hp, O, O, hp, O)
            yield "H4", (c1, c2), (dm2, O, hp, hp, O, O)
            vp = ((1, c2), (1, c1))
            yield "V2", (c1, c2), (v2, O, O, vp, vp, O)
            yield "V4", (c1, c2), (vm2, vp, vp, O, O, O)
    for c1 in passing:
        for c2 in passing:
            for c3 in passing:
                a, b = ((1, c1), (1, c2)), ((1, c1), (1, c3))
                yield "H3", (c1, c2, c3), (O, a, b, b, a, O)
                a, b = ((1, c2), (1, c1)), ((1, c3), (1, c1))
                yield "V3", (c1, c2, c3), (O, a, a, b, b, O)


def cube_alphabet(s: int) -> LegAlphabet:
    syms = {lab for _, _, labs in tile_entries(s) for lab in labs}
    syms.discard((Z, Z))
    return LegAlphabet([(Z, Z)] + sorted(syms))


def tile_tensors(s: int, weights: dict | None = None) -> dict[str, SparseTensor]:
    """The H(q) and V(q) tensors as sums of their tiles."""
    w = dict(TILE_WEIGHTS if weights is None else weights)
    al = cube_alphabet(s)
    legs = tuple((k, al) for k in LEGS6)
    items = {"H": [], "V": []}
    for name, _, labs in tile_entries(s):
        items[name[0]].append((labs, QMonomial.power(w[name])))
    return {k: SparseTensor.from_symbols(legs, v) for k, v in items.items()}


WALL = ((1, 0), (1, 0))


def _step_heights(phi, site) -> tuple[int, int]:
    """Heights before and after a spin along its chain."""
    kind, x, y = site
    if kind == "h":
        return phi[(x - 1, y)], phi[(x, y)]
    return phi[(x, y - 1)], phi[(x, y)]


@lru_cache(maxsize=None)
def tower_ranges(L: int) -> tuple[int, dict]:
    """Top level ``T`` and, per spin, the lowest level of its tower.

    ``T`` is one more than the largest lower step height of any spin over
    the uncoloured basis; the tower of a spin reaches down to the level of
    its lowest possible turning tile.
    """
    lat = lattice(L)
    hmax = {site: 0 for site in lat.sites}
    for phi in _surfaces(L):
        for site in lat.sites:
            hmax[site] = max(hmax[site], min(_step_heights(phi, site)))
    top = 1 + max(hmax.values())
    return top, {site: top - h for site, h in hmax.items()}


def network_top(L: int) -> int:
    return tower_ranges(L)[0]


def _bonds(L: int):
    """Lateral face pairings: ``(dual point, (spin, leg), (spin, leg))``."""
    for a in range(-1, L):
        for b in range(-1, L):
            cand = [(("h", a, b), "k2", ("v", a, b), "k4"),
                    (("h", a, b), "k5", ("v", a, b + 1), "k3"),
                    (("h", a + 1, b), "k3", ("v", a, b), "k5"),
                    (("h", a + 1, b), "k4", ("v", a, b + 1), "k2")]
            for s1, l1, s2, l2 in cand:
                yield (a, b), (s1, l1), (s2, l2)


def build_network(L: int, s: int, q: float | None = None, weights: dict | None = None) -> NetworkGraph:
    """Cube-tile network; node ``(site, level)`` with levels ``bottom..T``."""
    lat = lattice(L)
    top, bottom = tower_ranges(L)
    tens = tile_tensors(s, weights)
    al = cube_alphabet(s)
    net = NetworkGraph()
    existing = set()
    for site in lat.sites:
        t = tens["H" if site[0] == "h" else "V"]
        for lev in range(bottom[site], top + 1):
            net.add_node((site, lev), t, site)
            existing.add((site, lev))
        for lev in range(bottom[site], top):
            net.connect((site, lev), "k6", (site, lev + 1), "k1")
        net.add_node(("cap", site), delta_cap("k", al), site)
        net.connect((site, top), "k6", ("cap", site), "k")
        net.add_open((site, bottom[site]), "k1", "physical")
    used = set()
    for p, (s1, l1), (s2, l2) in _bonds(L):
        for lev in range(1, top + 1):
            n1, n2 = (s1, lev), (s2, lev)
            e1, e2 = n1 in existing, n2 in existing
            if e1 and e2:
                net.connect(n1, l1, n2, l2)
                used.add((n1, l1))
                used.add((n2, l2))
    # cap every remaining lateral face
    for site in lat.sites:
        for lev in range(bottom[site], top + 1):
            for leg in ("k2", "k3", "k4", "k5"):
                node = (site, lev)
                if (node, leg) in used:
                    continue
                p = _face_dual(site, leg)
                sym = None
                if lat.is_ring(*p) and lat.ring(*p) == 1 and lev == top:
                    sym = WALL
                net.add_node(("wall", site, lev, leg), delta_cap("k", al, sym), site)
                net.connect(node, leg, ("wall", site, lev, leg), "k")
    net.validate()
    return net.numeric(q) if q is not None else net


def _face_dual(site, leg) -> tuple[int, int]:
    """Dual point a lateral face of a spin looks onto."""
    kind, x, y = site
    if kind == "h":
        return (x, y) if leg in ("k2", "k5") else (x - 1, y)
    return (x, y) if leg in ("k4", "k5") else (x, y - 1)


def physical_symbol(site, v: int):
    m, c = (2 if v > 0 else -2), abs(v)
    return ((m, c), Z) if site[0] == "h" else (Z, (m, c))


def physical_assignment(net: NetworkGraph, key, L: int) -> dict:
    lat = lattice(L)
    out = {}
    for node, leg in net.physical_legs():
        site = node[0]
        out[(node, leg)] = physical_symbol(site, key[lat.index[site]])
    return out


def key_from_symbols(symbols, net: NetworkGraph, L: int) -> tuple[int, ...]:
    lat = lattice(L)
    key = [0] * len(lat)
    for (node, _), sym in zip(net.physical_legs(), symbols):
        site = node[0]
        (m, c) = sym[0] if site[0] == "h" else sym[1]
        key[lat.index[site]] = c if m > 0 else -c
    return tuple(key)


# ------------------------------------------------------------ bijection

@dataclass
class CubeTiling:
    """Per spin, the tiles of its tower from bottom to top.

    ``towers[site]`` is a list of ``(level, tile name, colours)``.
    """

    L: int
    top: int
    towers: dict = field(default_factory=dict)

    def labels(self, site, level) -> tuple:
        for lev, name, cols in self.towers[site]:
            if lev == level:
                return _tile_labels(name, cols)
        return (((0, 0), (0, 0)),) * 6


def _tile_labels(name: str, cols: tuple) -> tuple:
    table = _tile_table(max(max(cols), 1))
    try:
        return table[(name, cols)]
    except KeyError:
        raise KeyError(f"unknown tile {name}{cols}") from None


@lru_cache(maxsize=None)
def _tile_table(s: int) -> dict:
    return {(n, c): labs for n, c, labs in tile_entries(s)}


def _arc_colors(values, base: int) -> list[dict[int, int]]:
    """For each point of a chain walk, arc colour at every height below it.

    Heights below the base belong to the fixed raising arc, colour 0.
    """
    h = [base]
    for v in values:
        h.append(h[-1] + (1 if v > 0 else -1))
    open_at: dict[int, int] = {}
    out = []
    for k in range(len(h)):
        if k > 0:
            v = values[k - 1]
            if v > 0:
                open_at[h[k - 1]] = v
            else:
                open_at.pop(h[k], None)
        out.append({lev: (open_at[lev] if lev >= base else 0) for lev in range(h[k])})
    return out


def tiling_from_config(key, L: int) -> CubeTiling:
    """The unique cube tiling of a ground-basis configuration."""
    if not is_ground_basis(key, L):
        raise ValueError("not a ground-basis configuration")
    lat = lattice(L)
    top, bottom = tower_ranges(L)
    phi = height_field(key, L)
    # dashed colours at dual points of row b, solid colours of column a
    dashed, solid = {}, {}
    for b in range(-1, L):
        if 0 <= b <= L - 2:
            arcs = _arc_colors([key[i] for i in lat.row_sites(b)], lat.row_base(b))
            for a in range(-1, L):
                dashed[(a, b)] = arcs[a + 1]
        else:
            for a in range(-1, L):
                dashed[(a, b)] = {lev: 0 for lev in range(phi[(a, b)])}
    for a in range(-1, L):
        if 0 <= a <= L - 2:
            arcs = _arc_colors([key[i] for i in lat.col_sites(a)], lat.col_base(a))
            for b in range(-1, L):
                solid[(a, b)] = arcs[b + 1]
        else:
            for b in range(-1, L):
                solid[(a, b)] = {lev: 0 for lev in range(phi[(a, b)])}
    tiling = CubeTiling(L, top)
    for site in lat.sites:
        kind = site[0]
        v = key[lat.index[site]]
        lo, hi = _step_heights(phi, site)
        turn = min(lo, hi)
        plus = _face_dual(site, "k5")     # the +x side (H) or +y side (V)
        minus = _face_dual(site, "k3")
        tower = []
        for lev in range(bottom[site], top + 1):
            h = top - lev
            if kind == "h":
                if h > turn:
                    name, cols = ("H1" if v > 0 else "H5"), (abs(v),)
                elif h == turn and v > 0:
                    name, cols = "H2", (v, solid[plus][h])
                elif h == turn:
                    name, cols = "H4", (-v, solid[minus][h])
                else:
                    name, cols = "H3", (dashed[plus][h], solid[plus][h], solid[minus][h])
            else:
                if h > turn:
                    name, cols = ("V1" if v > 0 else "V5"), (abs(v),)
                elif h == turn and v > 0:
                    name, cols = "V2", (v, dashed[plus][h])
                elif h == turn:
                    name, cols = "V4", (-v, dashed[minus][h])
                else:
                    name, cols = "V3", (solid[plus][h], dashed[minus][h], dashed[plus][h])
            tower.append((lev, name, cols))
        tiling.towers[site] = tower
    _check_continuity(tiling)
    return tiling


def _check_continuity(tiling: CubeTiling) -> None:
    """Assert face matching on every bond, wall and vertical joint."""
    L, top = tiling.L, tiling.top
    lat = lattice(L)
    pos = {k: i for i, k in enumerate(LEGS6)}
    zero = (Z, Z)
    for site, tower in tiling.towers.items():
        levels = [lev for lev, _, _ in tower]
        for (lev, _, _), (lev2, _, _) in zip(tower, tower[1:]):
            if tiling.labels(site, lev)[pos["k6"]] != tiling.labels(site, lev2)[pos["k1"]]:
                raise ValueError(f"vertical mismatch in tower {site} at level {lev}")
        if tiling.labels(site, top)[pos["k6"]] != zero:
            raise ValueError(f"arrow leaves the top of tower {site}")
        for lev in levels:
            for leg in ("k2", "k3", "k4", "k5"):
                p = _face_dual(site, leg)
                if lat.is_ring(*p):
                    want = WALL if (lat.ring(*p) == 1 and lev == top) else zero
                    if tiling.labels(site, lev)[pos[leg]] != want:
                        raise ValueError(f"wall mismatch at {site} level {lev} {leg}")
    for p, (s1, l1), (s2, l2) in _bonds(L):
        if s1 not in tiling.towers or s2 not in tiling.towers:
            continue
        for lev in range(1, top + 1):
            a = tiling.labels(s1, lev)[pos[l1]]
            b = tiling.labels(s2, lev)[pos[l2]]
            if a != b:
                raise ValueError(f"face mismatch at dual {p} level {lev}: {a} vs {b}")


def config_from_tiling(tiling: CubeTiling) -> tuple[int, ...]:
    """Read every spin off the tiles of its tower."""
    lat = lattice(tiling.L)
    key = [0] * len(lat)
    for site, tower in tiling.towers.items():
        dirs = set()
        for _, name, cols in tower:
            if name[1] in "12":
                dirs.add(cols[0])
            elif name[1] in "45":
                dirs.add(-cols[0])
        if len(dirs) != 1:
            raise ValueError(f"tower {site} does not encode a single spin")
        key[lat.index[site]] = dirs.pop()
    return tuple(key)


def tiling_exponent(tiling: CubeTiling) -> Fraction:
    return sum((TILE_WEIGHTS[name] for tw in tiling.towers.values() for _, name, _ in tw), Fraction(0))


# ------------------------------------------------- local surjectivity

_VERTEX_EDGES = (("h", 0, -1), ("v", 0, 0), ("h", 0, 0), ("v", -1, 0))


def local_surjectivity_report() -> dict:
    """Try to assemble tiles around a single vertex for all 16 spin patterns.

    The four spins around the vertex at the origin are, counter-clockwise
    from below: ``Sh[0,-1]``, ``Sv[0,0]``, ``Sh[0,0]``, ``Sv[-1,0]``.  Going
    around the four surrounding dual points, each spin fixes the next
    height; every tower is then built from its own two heights and the
    four bonds are compared.  A path-dependent loop leaves a bond where the
    two towers disagree on the level at which arrows are present.
    """
    # dual points around the vertex, counter-clockwise from lower-left
    duals = [(-1, -1), (0, -1), (0, 0), (-1, 0)]
    # spin separating consecutive dual points, and the sign of the step
    seps = [(("h", 0, -1), +1), (("v", 0, 0), +1), (("h", 0, 0), -1), (("v", -1, 0), -1)]
    top = 4
    base = 2
    results = []
    for bits in itertools.product((1, -1), repeat=4):
        spins = dict(zip(_VERTEX_EDGES, bits))
        h = {duals[0]: base}
        for k in range(3):
            site, sign = seps[k]
            h[duals[k + 1]] = h[duals[k]] + sign * spins[site]
        # tower of each spin from the heights it saw
        heights_seen = {}
        for k in range(4):
            site, sign = seps[k]
            p, pn = duals[k], duals[(k + 1) % 4]
            hp = h[p]
            hn = hp + sign * spins[site]
            heights_seen[site] = {p: hp, pn: hn}
        error = None
        for p_dual in duals:
            owners = [site for site in heights_seen if p_dual in heights_seen[site]]
            a, b = owners
            for lev in range(1, top + 1):
                pa = (top - lev) < heights_seen[a][p_dual]
                pb = (top - lev) < heights_seen[b][p_dual]
                if pa != pb:
                    error = {"dual": p_dual, "level": lev, "towers": (a, b)}
                    break
            if error:
                break
        ok = error is None
        results.append({"pattern": bits, "tileable": ok, "ice": sum(_ice_term(bits)) == 0,
                        "discontinuity": error})
    return {"patterns": results, "tileable_count": sum(r["tileable"] for r in results)}


def _ice_term(bits):
    below, right, above, left = (Fraction(b, 2) for b in bits)
    return [below - above - left + right]


# ------------------------------------------------------ gauge identity

def _own_weight(label, family: str) -> Fraction:
    comp = label[0] if family == "H" else label[1]
    m = comp[0]
    return {2: Fraction(1, 2), 1: Fraction(1, 4), 0: Fraction(0), -2: Fraction(-1, 2)}[m]


_DIRECTION = {
    # own-family flow: +1 outgoing lateral, -1 incoming lateral
    "H": {"k2": 1, "k5": 1, "k3": -1, "k4": -1},
    "V": {"k4": 1, "k5": 1, "k2": -1, "k3": -1},
}


def gauge_identity_check(q: float, alpha, weights: dict | None = None, s: int = 2) -> bool:
    """Pull the diagonal gauge operator through every H and V tile.

    The operator acts on a leg as ``q**(alpha * w)`` with ``w = 1/2, 1/4,
    0, -1/2`` on the own-family component ``+2c, +c, 0, -2c``.  Two
    identities are checked on every tile entry:

    * transfer: the operator applied to ``k1`` equals its action on ``k6``
      times the outgoing laterals over the incoming ones (U(1) charge
      conservation of the own-family arrows);
    * weight: the tile exponent equals half the total lateral charge, so
      that the weight is the square root of the gauge factor carried by the
      lateral arrows.

    Both are compared as exact rational exponents and again numerically.
    """
    alpha = Fraction(alpha)
    w = dict(TILE_WEIGHTS if weights is None else weights)
    pos = {k: i for i, k in enumerate(LEGS6)}
    for name, _, labs in tile_entries(s):
        fam = name[0]
        d = _DIRECTION[fam]
        lat_out = sum(_own_weight(labs[pos[k]], fam) for k, sgn in d.items() if sgn > 0)
        lat_in = sum(_own_weight(labs[pos[k]], fam) for k, sgn in d.items() if sgn < 0)
        lhs = alpha * _own_weight(labs[0], fam)
        rhs = alpha * (_own_weight(labs[5], fam) + lat_out - lat_in)
        if lhs != rhs:
            return False
        if abs(q ** float(lhs) - q ** float(rhs)) > 1e-12 * max(1.0, q ** float(lhs)):
            return False
        half = (lat_out + lat_in) / 2
        if Fraction(w[name]) != half:
            return False
        if abs(q ** float(w[name]) - sqrt(q ** float(lat_out + lat_in))) > 1e-12:
            return False
    return True


# --------------------------------------------------------------- io

def to_json(key, L: int, s: int) -> str:
    lat = lattice(L)
    sh = [[0.5 if key[lat.index[("h", x, y)]] > 0 else -0.5 for y in range(L - 1)] for x in range(L)]
    sv = [[0.5 if key[lat.index[("v", x, y)]] > 0 else -0.5 for y in range(L)] for x in range(L - 1)]
    ch = [[abs(key[lat.index[("h", x, y)]]) for y in range(L - 1)] for x in range(L)]
    cv = [[abs(key[lat.index[("v", x, y)]]) for y in range(L)] for x in range(L - 1)]
    return json.dumps({"L": L, "s": s, "Sh": sh, "Sv": sv, "colors_h": ch, "colors_v": cv})


def from_json(text: str) -> tuple[tuple[int, ...], int, int]:
    d = json.loads(text)
    L, s = int(d["L"]), int(d["s"])
    lat = lattice(L)
    key = [0] * len(lat)
    for (kind, x, y), k in lat.index.items():
        val = d["Sh"][x][y] if kind == "h" else d["Sv"][x][y]
        col = d["colors_h"][x][y] if kind == "h" else d["colors_v"][x][y]
        if val not in (0.5, -0.5) or not 1 <= col <= s:
            raise ValueError(f"bad spin at {kind}[{x}][{y}]")
        key[k] = col if val > 0 else -col
    return tuple(key), L, s
