import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holotn import sixvertex as sv
from holotn.tensor_core import contract_network


def brute_force_count(L):
    """Uncoloured ground configurations from all 2^(2L(L-1)) sign patterns.

    Row chains only see Sh and column chains only see Sv, so both halves
    are scanned exhaustively and the ice rule is checked on every pair.
    Outside the lattice the fixed spins alternate, starting up.  A raised
    chain must stay at or above its base, the same test as for base 0.
    """
    n = L * (L - 1)
    bits = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(np.int8) * 2 - 1

    def chains_ok(arr):
        ok = np.ones(len(arr), bool)
        for c in range(L - 1):
            walk = np.cumsum(arr[:, c * L:(c + 1) * L], axis=1)
            ok &= (walk.min(axis=1) >= 0) & (walk[:, -1] == 0)
        return ok

    # Sh[x, y] at bit x*(L-1)+y ; regroup so that row y is contiguous
    sh = bits[:, [x * (L - 1) + y for y in range(L - 1) for x in range(L)]]
    sv_ = bits[:, [x * L + y for x in range(L - 1) for y in range(L)]]
    hs = bits[chains_ok(sh)]
    vs = bits[chains_ok(sv_)]

    def spin_h(h, x, y):
        if y in (-1, L - 1):
            return np.full(len(h), 1 if x % 2 == 0 else -1)
        return h[:, x * (L - 1) + y]

    def spin_v(v, x, y):
        if x in (-1, L - 1):
            return np.full(len(v), 1 if y % 2 == 0 else -1)
        return v[:, x * L + y]

    count = 0
    for h in hs:
        hh = np.repeat(h[None, :], len(vs), axis=0)
        ok = np.ones(len(vs), bool)
        for x in range(L):
            for y in range(L):
                t = spin_h(hh, x, y - 1) - spin_h(hh, x, y) - spin_v(vs, x - 1, y) + spin_v(vs, x, y)
                ok &= t == 0
        count += int(ok.sum())
    return count


@pytest.mark.parametrize("L", [2, 4])
def test_enumeration_matches_brute_force(L):
    assert len(sv.enumerate_ground_basis(L, 1)) == brute_force_count(L)


def test_enumeration_counts():
    assert len(sv.enumerate_ground_basis(2, 1)) == 1
    assert len(sv.enumerate_ground_basis(4, 1)) == 2
    # every chain of length L carries L/2 matched pairs: 2(L-1) chains
    assert len(sv.enumerate_ground_basis(4, 2)) == 2 * 2 ** (2 * 3 * 2)


def test_is_ground_basis_on_enumeration():
    basis = sv.enumerate_ground_basis(4, 2)
    assert all(sv.is_ground_basis(k, 4, 2) for k in basis[::97])
    k = list(basis[0])
    k[0] = -k[0]
    assert not sv.is_ground_basis(tuple(k), 4)


def test_ice_rule_examples():
    key = sv.enumerate_ground_basis(4, 1)[0]
    assert sv.ice_rule_ok(key, 4)
    assert not sv.ice_rule_ok(tuple([1] * len(key)), 4)
    bad = list(key)
    bad[0] = -bad[0]
    assert not sv.ice_rule_ok(tuple(bad), 4)


def test_height_field_inconsistent_raises():
    key = tuple([1] * len(sv.lattice(4)))
    with pytest.raises(sv.IceRuleViolation):
        sv.height_field(key, 4)


def test_height_steps_are_twice_the_spin():
    L = 4
    lat = sv.lattice(L)
    for key in sv.enumerate_ground_basis(L, 1):
        phi = sv.height_field(key, L)
        for (kind, x, y), v in zip(lat.sites, key):
            before = phi[(x - 1, y)] if kind == "h" else phi[(x, y - 1)]
            assert phi[(x, y)] - before == (1 if v > 0 else -1)
        assert all(h >= 0 for h in phi.values())


def test_volume_extremes_l4():
    vols = sorted(sv.volume(k, 4) for k in sv.enumerate_ground_basis(4, 1))
    assert vols == [12, 14]


def test_volume_l2_single_height():
    (key,) = sv.enumerate_ground_basis(2, 1)
    phi = sv.height_field(key, 2)
    assert sv.volume(key, 2) == phi[(0, 0)] == 2


@pytest.mark.parametrize("L", [2, 4, 6])
def test_volume_operator_form(L):
    # the linear spin form matches every volume difference; its constant is
    # L(L-1)/2 rather than L/2, so the offset is L(L-2)/2
    offs = {sv.volume(k, L) - sv.volume_operator_form(k, L) for k in sv.enumerate_ground_basis(L, 1)}
    assert offs == {Fraction(L * (L - 2), 2)}


def test_moves_change_volume_by_two():
    L = 4
    seen = 0
    for key in sv.enumerate_ground_basis(L, 2)[::37]:
        v = sv.volume(key, L)
        for a, b, j in itertools.product(range(L - 1), range(L - 1), (1, 2, 3, 4)):
            new = sv.fredkin_move_2d(key, L, a, b, j)
            if new is None:
                continue
            seen += 1
            assert sv.ice_rule_ok(new, L)
            assert sv.is_ground_basis(new, L, 2)
            assert abs(sv.volume(new, L) - v) == 2
    assert seen > 0


@pytest.mark.parametrize("L, s", [(2, 2), (4, 1), (4, 2)])
def test_move_graph_connected(L, s):
    assert sv.move_graph_connected(L, s)


@pytest.mark.parametrize("q", [0.5, 2.0])
def test_annihilation_s1(q):
    rep = sv.verify_annihilation(4, 1, q)
    assert rep.ok, rep.residuals


def test_boundary_energy_zero_on_basis():
    for key in sv.enumerate_ground_basis(4, 2)[::53]:
        assert sv.boundary_energy(key, 4) == 0
        assert sv.ice_energy(key, 4) == 0


def test_network_tower_pattern_l4():
    top, bottom = sv.tower_ranges(4)
    heights = sorted({top - b + 1 for b in bottom.values()})
    assert top == 2 and heights == [1, 2]


def test_network_l2_single_amplitude():
    t = contract_network(sv.build_network(2, 1))
    assert len(t) == 1


def test_network_equals_enumeration_l4_s1():
    net = sv.build_network(4, 1)
    amps = sv.ground_amplitudes(4, 1)
    got = {sv.key_from_symbols(sym, net, 4): v for sym, v in contract_network(net).symbol_items()}
    assert set(got) == set(amps)
    offs = {got[k].exponent - amps[k].exponent for k in amps}
    assert len(offs) == 1 and all(v.coeff == 1 for v in got.values())


def test_bijection_round_trip_l4_s1():
    offsets = set()
    for key in sv.enumerate_ground_basis(4, 1):
        t = sv.tiling_from_config(key, 4)
        assert sv.config_from_tiling(t) == key
        offsets.add(sv.tiling_exponent(t) - sv.volume(key, 4))
    assert len(offsets) == 1


def test_local_surjectivity():
    rep = sv.local_surjectivity_report()
    assert rep["tileable_count"] == 6
    for p in rep["patterns"]:
        assert p["tileable"] == p["ice"]
        if not p["tileable"]:
            assert p["discontinuity"] is not None
    by = {p["pattern"]: p for p in rep["patterns"]}
    # three in, one out
    assert not by[(1, 1, 1, -1)]["tileable"]
    # all in / all out
    assert not by[(1, 1, -1, -1)]["tileable"] and not by[(-1, -1, 1, 1)]["tileable"]


@pytest.mark.parametrize("alpha", [Fraction(1, 2), 1, 3])
def test_gauge_identity(alpha):
    assert sv.gauge_identity_check(2.0, alpha)


def test_gauge_identity_trivial_alpha():
    assert sv.gauge_identity_check(2.0, 0)


def test_gauge_negative_control():
    w = dict(sv.TILE_WEIGHTS)
    w["H3"] = 1
    assert not sv.gauge_identity_check(2.0, 1, weights=w)


def test_json_round_trip():
    key = sv.enumerate_ground_basis(4, 2)[123]
    text = sv.to_json(key, 4, 2)
    data = json.loads(text)
    assert set(data) == {"L", "s", "Sh", "Sv", "colors_h", "colors_v"}
    assert sv.from_json(text) == (key, 4, 2)


def test_json_bad_spin():
    data = json.loads(sv.to_json(sv.enumerate_ground_basis(4, 1)[0], 4, 1))
    data["Sh"][0][0] = 0.3
    with pytest.raises(ValueError):
        sv.from_json(json.dumps(data))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 8191))
def test_chain_restrictions_are_dyck(i):
    from holotn.fredkin1d import is_ground_basis as chain_ok

    L = 4
    lat = sv.lattice(L)
    key = sv.enumerate_ground_basis(L, 2)[i]
    for b in range(L - 1):
        vals = tuple(key[j] for j in lat.row_sites(b))
        if lat.row_base(b) == 0:
            assert chain_ok(vals)
        else:
            # raised walk: prepend and append the virtual raising pair
            assert chain_ok((9,) + vals + (-9,))
