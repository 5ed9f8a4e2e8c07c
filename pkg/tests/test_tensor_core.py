from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from holotn import fredkin1d
from holotn.tensor_core import (
    ONE,
    ZERO,
    AlphabetMismatchError,
    LegAlphabet,
    MixedExponentError,
    NetworkGraph,
    QMonomial,
    SparseTensor,
    contract_network,
    contract_pair,
    delta_cap,
    evaluate_amplitude,
    plan_contraction,
)
from holotn.tensor_core import _execute, _prepare

Z = ((0, 0),)
AL = LegAlphabet([Z, ((1, 1),), ((-1, 1),)])


def test_monomial_exponents_are_twelfths():
    m = QMonomial.power(Fraction(-1, 12))
    assert m.exp12 == -1
    assert m.exponent == Fraction(-1, 12)
    with pytest.raises(ValueError):
        QMonomial.power(Fraction(1, 5))


def test_monomial_add_same_exponent_exact():
    a = QMonomial.power(Fraction(1, 4), 2)
    b = QMonomial.power(Fraction(1, 4), Fraction(1, 3))
    assert a + b == QMonomial(Fraction(7, 3), 3)


def test_monomial_mixed_sum_rejected():
    with pytest.raises(MixedExponentError):
        QMonomial.power(1) + QMonomial.power(2)


@given(st.integers(-48, 48), st.integers(-48, 48))
def test_monomial_product_adds_exponents(a, b):
    assert (QMonomial(1, a) * QMonomial(1, b)).exp12 == a + b


@given(st.integers(-24, 24), st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_monomial_evaluate(e, q):
    assert QMonomial(3, e).evaluate(q) == pytest.approx(3 * q ** (e / 12), rel=1e-14)


def test_alphabet_zero_first():
    with pytest.raises(ValueError):
        LegAlphabet([((1, 1),), Z])
    al = LegAlphabet([Z, ((0, 1),), ((0, 2),)])
    assert al.index(((0, 1),)) != al.index(Z)


def test_sparse_tensor_drops_zero_entries():
    t = SparseTensor((("a", AL),), {(0,): ONE, (1,): ZERO})
    assert len(t) == 1
    with pytest.raises(ValueError):
        SparseTensor((("a", AL),), {(3,): ONE})


def test_contract_identity_case():
    t = SparseTensor((("k", AL),), {(0,): ONE})
    out = contract_pair(t, delta_cap("k", AL), [("k", "k")])
    assert out.rank == 0 and out.scalar() == ONE


def test_contract_turn_tile_with_zero_cap_vanishes():
    tile = fredkin1d.tile_tensor(1)
    a2 = SparseTensor(tile.legs, {k: v for k, v in tile.entries.items() if v.exp12 == 6 and k[0] == 1})
    assert len(a2) == 1
    out = contract_pair(a2, delta_cap("k", tile.legs[3][1]), [("k4", "k")])
    assert len(out) == 0


def test_contract_exponents_add():
    a = SparseTensor((("x", AL),), {(1,): QMonomial(1, 3)})
    b = SparseTensor((("y", AL),), {(1,): QMonomial(1, 6)})
    assert contract_pair(a, b, [("x", "y")]).scalar() == QMonomial(1, 9)


def test_contract_alphabet_mismatch():
    other = LegAlphabet([Z, ((1, 2),)])
    a = SparseTensor((("x", AL),), {(0,): ONE})
    b = SparseTensor((("y", other),), {(0,): ONE})
    with pytest.raises(AlphabetMismatchError):
        contract_pair(a, b, [("x", "y")])


def test_result_leg_order():
    a = SparseTensor((("p", AL), ("x", AL)), {(1, 0): ONE})
    b = SparseTensor((("y", AL), ("r", AL)), {(0, 2): ONE})
    out = contract_pair(a, b, [("x", "y")])
    assert [n for n, _ in out.legs] == ["p", "r"]
    assert out.entries == {(1, 2): ONE}


def test_outer_product_with_scalar_one_is_identity():
    a = SparseTensor((("p", AL),), {(1,): QMonomial(2, 5), (2,): ONE})
    one = SparseTensor((), {(): ONE})
    assert contract_pair(a, one, []).entries == a.entries


def test_single_node_plan_empty():
    net = NetworkGraph()
    net.add_node("a", SparseTensor((("p", AL),), {(1,): ONE}))
    net.add_open("a", "p")
    assert plan_contraction(net) == []


def test_pyramid_plan_is_a_tree():
    net = fredkin1d.build_network(4, 1)
    assert len(plan_contraction(net)) == len(net.nodes) - 1


def test_plan_deterministic():
    net = fredkin1d.build_network(6, 2)
    assert plan_contraction(net) == plan_contraction(fredkin1d.build_network(6, 2))


def test_contraction_associative():
    net = fredkin1d.build_network(4, 1)
    greedy = contract_network(net)
    n = len(net.nodes)
    seq = [(0, 1)] + [(n + k, k + 2) for k in range(n - 2)]
    work, names = _prepare(net)
    other = _execute(work, names, seq, None)
    assert greedy.entries == other.entries


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
def test_numeric_contraction_matches_symbolic(q):
    net = fredkin1d.build_network(6, 1)
    sym = contract_network(net)
    num = contract_network(net.numeric(q))
    assert set(sym.entries) == set(num.entries)
    for k, v in sym.entries.items():
        assert num.entries[k] == pytest.approx(v.evaluate(q), rel=1e-12)


def test_evaluate_amplitude_ratio_and_zero():
    net = fredkin1d.build_network(4, 1)
    uudd = evaluate_amplitude(net, fredkin1d.physical_assignment(net, (1, 1, -1, -1)))
    udud = evaluate_amplitude(net, fredkin1d.physical_assignment(net, (1, -1, 1, -1)))
    assert (uudd / udud).exponent == 2
    duud = evaluate_amplitude(net, fredkin1d.physical_assignment(net, (-1, 1, 1, -1)))
    assert duud == ZERO


def test_evaluate_amplitude_bad_symbol():
    net = fredkin1d.build_network(4, 1)
    with pytest.raises(KeyError):
        evaluate_amplitude(net, fredkin1d.physical_assignment(net, (3, 1, -1, -3)))


def test_delta_cap_alone():
    net = NetworkGraph()
    net.add_node("c", delta_cap("k", AL))
    net.add_open("c", "k", "boundary")
    cap = contract_network(net)
    assert contract_pair(cap, delta_cap("k", AL), [(("c", "k"), "k")]).scalar() == ONE


def test_validate_catches_dangling_leg():
    net = NetworkGraph()
    net.add_node("a", SparseTensor((("p", AL), ("x", AL)), {(0, 0): ONE}))
    net.add_open("a", "p")
    with pytest.raises(ValueError):
        net.validate()
