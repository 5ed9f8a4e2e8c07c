"""Coloured deformed Fredkin chain.

A chain of ``N`` spins is a tuple of non-zero integers: ``+c`` is an up
spin of colour ``c`` and ``-c`` a down spin of colour ``c``.  Read as a
walk, an up spin is a ``(1, 1)`` step and a down spin a ``(1, -1)`` step;
the ground state weights every colour-matched Dyck walk ``w`` by
``q**A(w)`` where ``A`` is the area under the walk.

The holographic network places a top-aligned tower of rank-4 tiles on
every site (legs ``k1`` bottom, ``k2`` left, ``k3`` top, ``k4`` right).
An up spin rises through ``A1`` tiles, turns right on an ``A2`` tile and
its arrow runs along ``A3`` tiles until the matching down spin turns it
down on an ``A4`` tile.  Each tile weighs the area of the unit cell it
covers, so a walk's tiles multiply to exactly ``q**A(w)``.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import comb, sqrt

import numpy as np
import scipy.sparse as sp

from .statevec import WeightedState, apply_local_operator, norm, normalize
from .tensor_core import (
    LegAlphabet,
    NetworkGraph,
    QMonomial,
    SparseTensor,
    delta_cap,
)

__all__ = [
    "WalkProfile",
    "parse_chain",
    "format_chain",
    "height_profile",
    "is_ground_basis",
    "enumerate_ground_basis",
    "ground_amplitudes",
    "ground_state",
    "fredkin_move",
    "color_moves",
    "move_graph_connected",
    "hamiltonian_terms",
    "build_hamiltonian",
    "build_network",
    "tower_heights",
    "physical_assignment",
    "AnnihilationReport",
    "verify_annihilation",
    "DEFAULT_DIM_CAP",
]

DEFAULT_DIM_CAP = 2 ** 20


@dataclass(frozen=True)
class WalkProfile:
    heights: tuple[int, ...]
    area: Fraction

    @property
    def is_dyck(self) -> bool:
        return min(self.heights) >= 0 and self.heights[-1] == 0


def parse_chain(text: str) -> tuple[int, ...]:
    """Parse ``"U1 U2 D2 D1"`` into ``(1, 2, -2, -1)``."""
    out = []
    for tok in text.split():
        d, c = tok[0].upper(), tok[1:] or "1"
        if d not in "UD" or not c.isdigit() or int(c) < 1:
            raise ValueError(f"bad spin token {tok!r}")
        out.append(int(c) if d == "U" else -int(c))
    return tuple(out)


def format_chain(chain) -> str:
    return " ".join(f"U{v}" if v > 0 else f"D{-v}" for v in chain)


def height_profile(chain) -> WalkProfile:
    """Heights at the ``N + 1`` lattice points and the trapezoid area."""
    h = [0]
    for v in chain:
        if v == 0:
            raise ValueError("spin value 0 is not a spin")
        h.append(h[-1] + (1 if v > 0 else -1))
    area = sum(Fraction(a + b, 2) for a, b in zip(h, h[1:]))
    return WalkProfile(tuple(h), area)


def matching(chain) -> dict[int, int] | None:
    """Pairs each down step with its nearest unmatched up step; None if not Dyck."""
    stack, pairs = [], {}
    for i, v in enumerate(chain):
        if v > 0:
            stack.append(i)
        else:
            if not stack:
                return None
            j = stack.pop()
            pairs[j], pairs[i] = i, j
    return None if stack else pairs


def is_ground_basis(chain, s: int | None = None) -> bool:
    """Dyck walk whose matched up/down steps carry equal colours."""
    if len(chain) % 2 or any(v == 0 for v in chain):
        return False
    if s is not None and any(abs(v) > s for v in chain):
        return False
    pairs = matching(chain)
    if pairs is None:
        return False
    return all(chain[i] == -chain[j] for i, j in pairs.items() if i < j)


def _dyck_words(n: int):
    """Dyck words of length ``n`` over +1/-1, lexicographic with -1 < +1."""
    def rec(prefix, height, remaining):
        if remaining == 0:
            yield tuple(prefix)
            return
        if height > 0:
            prefix.append(-1)
            yield from rec(prefix, height - 1, remaining - 1)
            prefix.pop()
        if height < remaining - 1:
            prefix.append(1)
            yield from rec(prefix, height + 1, remaining - 1)
            prefix.pop()
    yield from rec([], 0, n)


def enumerate_ground_basis(N: int, s: int) -> list[tuple[int, ...]]:
    """All colour-matched Dyck chains, sorted."""
    if N % 2 or N < 0 or s < 1:
        raise ValueError("N must be even and s >= 1")
    out = []
    for word in _dyck_words(N):
        ups = [i for i, v in enumerate(word) if v > 0]
        pairs = matching(word)
        for cols in itertools.product(range(1, s + 1), repeat=len(ups)):
            ch = list(word)
            for i, c in zip(ups, cols):
                ch[i] = c
                ch[pairs[i]] = -c
            out.append(tuple(ch))
    out.sort()
    return out


def ground_amplitudes(N: int, s: int) -> dict[tuple[int, ...], QMonomial]:
    """Unnormalised exact amplitudes ``q**A(w)``."""
    return {ch: QMonomial.power(height_profile(ch).area) for ch in enumerate_ground_basis(N, s)}


def ground_state(N: int, s: int, q: float) -> WeightedState:
    amps = ground_amplitudes(N, s)
    return normalize(WeightedState({k: v.evaluate(q) for k, v in amps.items()}))


# ---------------------------------------------------------------- moves

def _move_local(a, b, c, variant):
    """Local three-site Fredkin move in either direction, or None."""
    if variant == 1:
        if a > 0 and b > 0 and c < 0:        # u1 u2 d3 -> u2 d3 u1
            return (b, c, a)
        if a > 0 and b < 0 and c > 0:        # inverse
            return (c, a, b)
    elif variant == 2:
        if a > 0 and b < 0 and c < 0:        # u1 d2 d3 -> d3 u1 d2
            return (c, a, b)
        if a < 0 and b > 0 and c < 0:        # inverse
            return (b, c, a)
    else:
        raise ValueError("variant must be 1 or 2")
    return None


def fredkin_move(chain, i: int, variant: int):
    """Apply the Fredkin move ``variant`` on sites ``(i-1, i, i+1)``."""
    if not 1 <= i <= len(chain) - 2:
        return None
    new = _move_local(chain[i - 1], chain[i], chain[i + 1], variant)
    if new is None:
        return None
    out = list(chain)
    out[i - 1:i + 2] = new
    return tuple(out)


def color_moves(chain, s: int):
    """Recolourings of adjacent matched pairs ``u^c d^c -> u^c' d^c'``."""
    for i in range(len(chain) - 1):
        a, b = chain[i], chain[i + 1]
        if a > 0 and b == -a:
            for c in range(1, s + 1):
                if c != a:
                    out = list(chain)
                    out[i], out[i + 1] = c, -c
                    yield tuple(out)


def move_graph_connected(N: int, s: int) -> bool:
    """BFS over the ground basis using Fredkin moves and pair recolourings."""
    basis = enumerate_ground_basis(N, s)
    if not basis:
        return True
    seen = {basis[0]}
    todo = deque([basis[0]])
    while todo:
        ch = todo.popleft()
        nbrs = [fredkin_move(ch, i, v) for i in range(1, N - 1) for v in (1, 2)]
        nbrs.extend(color_moves(ch, s))
        for nb in nbrs:
            if nb is not None and nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return len(seen) == len(basis)


# ---------------------------------------------------------- hamiltonian

def _projector_op(vec: dict) -> dict:
    """Sparse ``|v><v|`` as a local operator dict."""
    return {k: [(k2, v2 * v) for k2, v2 in vec.items()] for k, v in vec.items()}


def hamiltonian_terms(N: int, s: int, q: float) -> list[tuple[list[int], dict]]:
    """All projector terms of the parent Hamiltonian as ``(support, op)`` pairs."""
    cols = range(1, s + 1)
    terms = []
    for c in cols:
        terms.append(([0], {(-c,): [((-c,), 1.0)]}))
        terms.append(([N - 1], {(c,): [((c,), 1.0)]}))
    for i in range(N - 1):
        # unmatched colours on an adjacent up/down pair
        op = {(c1, -c2): [((c1, -c2), 1.0)] for c1 in cols for c2 in cols if c1 != c2}
        # (1/2) sum_{c1,c2} (|c1 c1> - |c2 c2>)(...)  =  s (1 - |u><u|)
        mix = {(c1, -c1): [((c2, -c2), (s - 1.0) if c1 == c2 else -1.0) for c2 in cols]
               for c1 in cols}
        op.update(mix)
        terms.append(([i, i + 1], op))
    norm_ = 1.0 / sqrt(q ** -2 + q ** 2)
    for i in range(1, N - 1):
        for c1, c2, c3 in itertools.product(cols, repeat=3):
            f1 = {(c1, c2, -c3): norm_ / q, (c2, -c3, c1): -norm_ * q}
            f2 = {(c1, -c2, -c3): norm_ / q, (-c3, c1, -c2): -norm_ * q}
            terms.append(([i - 1, i, i + 1], _projector_op(f1)))
            terms.append(([i - 1, i, i + 1], _projector_op(f2)))
    return terms


def _local_states(s: int) -> list[int]:
    return list(range(1, s + 1)) + [-c for c in range(1, s + 1)]


def chain_index(chain, s: int) -> int:
    """Position of a chain in the tensor-product basis of :func:`build_hamiltonian`."""
    loc = {v: k for k, v in enumerate(_local_states(s))}
    idx = 0
    for v in chain:
        idx = idx * 2 * s + loc[v]
    return idx


def build_hamiltonian(N: int, s: int, q: float, dim_cap: int = DEFAULT_DIM_CAP) -> sp.csr_matrix:
    """Sparse parent Hamiltonian on the full ``(2s)**N`` space.

    Local basis order on a site is ``up 1..s`` then ``down 1..s``.
    """
    d = 2 * s
    if d ** N > dim_cap:
        raise ValueError(f"dimension {d ** N} exceeds cap {dim_cap}")
    states = _local_states(s)
    loc = {v: k for k, v in enumerate(states)}
    H = sp.csr_matrix((d ** N, d ** N))
    grouped: dict[tuple, sp.lil_matrix] = {}
    for support, op in hamiltonian_terms(N, s, q):
        k = len(support)
        key = tuple(support)
        m = grouped.get(key)
        if m is None:
            m = grouped[key] = sp.lil_matrix((d ** k, d ** k))
        for inp, outs in op.items():
            j = 0
            for v in inp:
                j = j * d + loc[v]
            for out, c in outs:
                i = 0
                for v in out:
                    i = i * d + loc[v]
                m[i, j] += c
    for support, m in grouped.items():
        lo, k = support[0], len(support)
        left = sp.identity(d ** lo, format="csr")
        right = sp.identity(d ** (N - lo - k), format="csr")
        H = H + sp.kron(sp.kron(left, m.tocsr()), right, format="csr")
    return H.tocsr()


@dataclass
class AnnihilationReport:
    residuals: dict
    max_residual: float

    @property
    def ok(self) -> bool:
        return self.max_residual < 1e-12


def verify_annihilation(N: int, s: int, q: float) -> AnnihilationReport:
    """Apply every Hamiltonian term to the ground state and record residual norms."""
    gs = ground_state(N, s, q)
    res = {"boundary": 0.0, "color": 0.0, "bulk": 0.0}
    for support, op in hamiltonian_terms(N, s, q):
        fam = "boundary" if len(support) == 1 else "color" if len(support) == 2 else "bulk"
        r = norm(apply_local_operator(gs, support, op))
        res[fam] = max(res[fam], r)
    return AnnihilationReport(res, max(res.values()))


# -------------------------------------------------------------- network

def tower_heights(N: int) -> list[int]:
    return [min(i + 1, N - i) for i in range(N)]


def arrow_alphabet(s: int) -> LegAlphabet:
    syms = [((0, 0),)]
    for c in range(1, s + 1):
        syms += [((1, c),), ((-1, c),)]
    return LegAlphabet(syms)


def tile_tensor(s: int) -> SparseTensor:
    """The rank-4 tile tensor ``A(q) = sum of the five tiles``; legs k1..k4."""
    al = arrow_alphabet(s)
    z = ((0, 0),)
    items = []
    half, one = QMonomial.power(Fraction(1, 2)), QMonomial.power(1)
    for c in range(1, s + 1):
        up, dn = ((1, c),), ((-1, c),)
        items += [
            ((up, z, up, z), QMonomial.power(0)),    # A1
            ((up, z, z, up), half),                  # A2
            ((z, up, z, up), one),                   # A3
            ((dn, up, z, z), half),                  # A4
            ((dn, z, dn, z), QMonomial.power(0)),    # A5
        ]
    legs = tuple((k, al) for k in ("k1", "k2", "k3", "k4"))
    return SparseTensor.from_symbols(legs, items)


def build_network(N: int, s: int, q: float | None = None) -> NetworkGraph:
    """Inverse step pyramid of tiles with zero caps on every non-physical leg.

    Node ``("A", i, l)`` is the tile of tower ``i`` at depth ``l`` below the
    top row.  With ``q`` given the entries are evaluated numerically.
    """
    if N % 2 or N < 2:
        raise ValueError("N must be even and >= 2")
    al = arrow_alphabet(s)
    tile = tile_tensor(s)
    net = NetworkGraph()
    heights = tower_heights(N)
    for i, m in enumerate(heights):
        for l in range(m):
            net.add_node(("A", i, l), tile, (i, l))
    for i, m in enumerate(heights):
        net.add_node(("top", i), delta_cap("k", al), (i, -1))
        net.connect(("A", i, 0), "k3", ("top", i), "k")
        for l in range(m - 1):
            net.connect(("A", i, l), "k1", ("A", i, l + 1), "k3")
        net.add_open(("A", i, m - 1), "k1", "physical")
        for l in range(m):
            has_right = i + 1 < N and l < heights[i + 1]
            if has_right:
                net.connect(("A", i, l), "k4", ("A", i + 1, l), "k2")
            else:
                net.add_node(("wr", i, l), delta_cap("k", al), (i, l))
                net.connect(("A", i, l), "k4", ("wr", i, l), "k")
            if not (i > 0 and l < heights[i - 1]):
                net.add_node(("wl", i, l), delta_cap("k", al), (i, l))
                net.connect(("A", i, l), "k2", ("wl", i, l), "k")
    net.validate()
    return net.numeric(q) if q is not None else net


def physical_assignment(net: NetworkGraph, chain) -> dict:
    """Map a chain to symbols on the physical legs of :func:`build_network`."""
    phys = net.physical_legs()
    if len(phys) != len(chain):
        raise ValueError("chain length does not match the network")
    out = {}
    for (node, leg), v in zip(phys, chain):
        out[(node, leg)] = ((1 if v > 0 else -1, abs(v)),)
    return out


def chain_from_symbols(symbols) -> tuple[int, ...]:
    return tuple(m * c for ((m, c),) in symbols)


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def full_spectrum(N: int, s: int, q: float) -> np.ndarray:
    """All eigenvalues of the dense Hamiltonian (small systems only)."""
    return np.linalg.eigvalsh(build_hamiltonian(N, s, q).toarray())
