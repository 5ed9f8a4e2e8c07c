import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from holotn import fredkin1d as fk
from holotn.tensor_core import contract_network

R, B = 1, 2


def brute_basis(N, s):
    """Every colour/sign pattern filtered by a direct stack matcher."""
    out = []
    for chain in itertools.product([c for c in range(1, s + 1)] + [-c for c in range(1, s + 1)], repeat=N):
        stack, ok = [], True
        for v in chain:
            if v > 0:
                stack.append(v)
            elif not stack or stack.pop() != -v:
                ok = False
                break
        if ok and not stack:
            out.append(chain)
    return sorted(out)


def test_height_profile_examples():
    p = fk.height_profile((1, 1, -1, -1))
    assert p.heights == (0, 1, 2, 1, 0) and p.area == 4
    p = fk.height_profile((1, -1, 1, -1))
    assert p.heights == (0, 1, 0, 1, 0) and p.area == 2
    assert fk.height_profile((1, -1)).area == 1


def test_parse_format_round_trip():
    text = "U1 U2 D2 D1"
    assert fk.parse_chain(text) == (1, 2, -2, -1)
    assert fk.format_chain(fk.parse_chain(text)) == text
    with pytest.raises(ValueError):
        fk.parse_chain("X1")


def test_is_ground_basis_colour_rule():
    assert fk.is_ground_basis((R, B, -B, -R))
    assert not fk.is_ground_basis((R, B, -R, -B))
    assert not fk.is_ground_basis((-R, R))


@pytest.mark.parametrize("N, s", [(2, 1), (2, 3), (4, 1), (4, 2), (6, 2), (8, 1)])
def test_enumeration_matches_brute_force(N, s):
    basis = fk.enumerate_ground_basis(N, s)
    assert basis == brute_basis(N, s)
    assert len(basis) == fk.catalan(N // 2) * s ** (N // 2)


def test_enumeration_counts():
    assert len(fk.enumerate_ground_basis(4, 1)) == 2
    assert len(fk.enumerate_ground_basis(4, 2)) == 8
    assert len(fk.enumerate_ground_basis(2, 3)) == 3


def test_ground_state_small_cases():
    gs = fk.ground_state(2, 3, 2.5)
    assert sorted(gs.terms.values()) == pytest.approx([1 / math.sqrt(3)] * 3)
    gs = fk.ground_state(4, 1, 2.0)
    assert gs.terms[(1, 1, -1, -1)] / gs.terms[(1, -1, 1, -1)] == pytest.approx(4.0)
    gs = fk.ground_state(4, 1, 1.0)
    assert gs.terms[(1, 1, -1, -1)] == pytest.approx(gs.terms[(1, -1, 1, -1)])


def test_fredkin_move_examples():
    assert fk.fredkin_move((R, B, -B, -R), 1, 1) == (B, -B, R, -R)
    assert fk.fredkin_move((-1, -1, -1, -1), 1, 1) is None
    moved = fk.fredkin_move((R, B, -B, -R), 1, 1)
    assert fk.fredkin_move(moved, 1, 1) == (R, B, -B, -R)


@pytest.mark.parametrize("N, s", [(6, 2), (8, 1)])
def test_moves_preserve_basis_and_change_area_by_two(N, s):
    for ch in fk.enumerate_ground_basis(N, s):
        a = fk.height_profile(ch).area
        for i in range(1, N - 1):
            for v in (1, 2):
                new = fk.fredkin_move(ch, i, v)
                if new is None:
                    continue
                assert fk.is_ground_basis(new)
                assert abs(fk.height_profile(new).area - a) == 2


@pytest.mark.parametrize("N, s", [(2, 1), (4, 2), (6, 2), (8, 1), (8, 2)])
def test_move_graph_connected(N, s):
    assert fk.move_graph_connected(N, s)


def test_hamiltonian_n2_kernel():
    ev, vecs = np.linalg.eigh(fk.build_hamiltonian(2, 1, 1.0).toarray())
    zero = np.flatnonzero(np.abs(ev) < 1e-10)
    assert len(zero) == 1
    v = vecs[:, zero[0]]
    assert abs(v[fk.chain_index((1, -1), 1)]) == pytest.approx(1.0)


def test_hamiltonian_n4_gap():
    ev = fk.full_spectrum(4, 1, 1.0)
    assert abs(ev[0]) < 1e-10 and ev[1] > 1e-6


def test_hamiltonian_n4_s2_q2_ground_vector():
    H = fk.build_hamiltonian(4, 2, 2.0).toarray()
    assert np.allclose(H, H.T)
    ev, vecs = np.linalg.eigh(H)
    assert abs(ev[0]) < 1e-10 and ev[1] > 1e-6
    v = vecs[:, 0]
    gs = fk.ground_state(4, 2, 2.0)
    w = np.zeros_like(v)
    for k, a in gs.terms.items():
        w[fk.chain_index(k, 2)] = a
    v = v * np.sign(v @ w)
    assert np.max(np.abs(v - w)) < 1e-10


def test_hamiltonian_cap():
    with pytest.raises(ValueError):
        fk.build_hamiltonian(12, 3, 1.0)


def test_hamiltonian_psd():
    ev = fk.full_spectrum(4, 2, 0.5)
    assert ev.min() > -1e-10


@pytest.mark.parametrize("N, s, q", [(6, 2, 2.0), (8, 1, 1.0), (6, 1, 0.5)])
def test_annihilation(N, s, q):
    rep = fk.verify_annihilation(N, s, q)
    assert rep.ok, rep.residuals


def test_tower_heights():
    assert fk.tower_heights(4) == [1, 2, 2, 1]
    assert fk.tower_heights(2) == [1, 1]


@pytest.mark.parametrize("N", [4, 6, 8])
@pytest.mark.parametrize("s", [1, 2])
def test_network_equals_enumeration(N, s):
    amps = fk.ground_amplitudes(N, s)
    t = contract_network(fk.build_network(N, s))
    got = {fk.chain_from_symbols(sym): v for sym, v in t.symbol_items()}
    assert set(got) == set(amps)
    for k, v in got.items():
        assert v.coeff == 1
        assert v.exponent == amps[k].exponent


def test_network_n2_uniform():
    t = contract_network(fk.build_network(2, 2))
    vals = {v for _, v in t.symbol_items()}
    assert len(t) == 2 and len(vals) == 1


def test_network_rejects_odd():
    with pytest.raises(ValueError):
        fk.build_network(5, 1)


@given(st.lists(st.sampled_from([1, -1, 2, -2]), min_size=2, max_size=8).filter(lambda c: len(c) % 2 == 0))
def test_is_ground_basis_agrees_with_brute_force(chain):
    chain = tuple(chain)
    assert fk.is_ground_basis(chain) == (chain in set(brute_basis(len(chain), 2)))


@given(st.sampled_from(fk.enumerate_ground_basis(8, 2)))
def test_area_is_integer_trapezoid(chain):
    p = fk.height_profile(chain)
    assert p.is_dyck
    assert p.area == sum(Fraction(a + b, 2) for a, b in zip(p.heights, p.heights[1:]))
    assert p.area.denominator == 1
