"""Exact sparse tensors with monomial amplitudes ``c * q**(p/12)``.

Every tile of the holographic networks has a single monomial weight, and
every physical configuration is reached by exactly one tiling, so a fully
contracted amplitude is again a monomial.  Entries are therefore stored as
:class:`QMonomial` and sums of unequal exponents are rejected.

Legs carry finite alphabets of arrow labels.  A label is a tuple of
per-family components; a component is a pair ``(m, c)`` with ``m`` in
``{-2, -1, 0, 1, 2}`` and ``c`` a colour, where ``(0, c)`` with ``c > 0`` is
the coloured degenerate zero and ``(0, 0)`` the plain zero.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable, NamedTuple, Sequence

__all__ = [
    "AlphabetMismatchError",
    "MixedExponentError",
    "QMonomial",
    "ZERO",
    "ONE",
    "LegAlphabet",
    "SparseTensor",
    "NetworkGraph",
    "delta_cap",
    "contract_pair",
    "plan_contraction",
    "contract_network",
    "evaluate_amplitude",
]


class AlphabetMismatchError(ValueError):
    """Two legs paired for contraction have different alphabets."""


class MixedExponentError(ArithmeticError):
    """A sum of monomials with different powers of q was requested."""


class QMonomial(NamedTuple):
    """Exact monomial ``coeff * q**(exp12 / 12)``."""

    coeff: int | Fraction
    exp12: int

    @classmethod
    def power(cls, exponent: int | Fraction | str, coeff: int | Fraction = 1) -> "QMonomial":
        """Build ``coeff * q**exponent``; the exponent must be a multiple of 1/12."""
        e = Fraction(exponent) * 12
        if e.denominator != 1:
            raise ValueError(f"exponent {exponent} is not a multiple of 1/12")
        return cls(coeff, int(e))

    @property
    def exponent(self) -> Fraction:
        return Fraction(self.exp12, 12)

    def is_zero(self) -> bool:
        return self.coeff == 0

    def __add__(self, other: "QMonomial") -> "QMonomial":  # type: ignore[override]
        if not isinstance(other, QMonomial):
            return NotImplemented
        if self.coeff == 0:
            return other
        if other.coeff == 0:
            return self
        if self.exp12 != other.exp12:
            raise MixedExponentError(
                f"cannot add q^({self.exp12}/12) and q^({other.exp12}/12) exactly"
            )
        return QMonomial(self.coeff + other.coeff, self.exp12)

    def __mul__(self, other: "QMonomial") -> "QMonomial":  # type: ignore[override]
        if not isinstance(other, QMonomial):
            return NotImplemented
        return QMonomial(self.coeff * other.coeff, self.exp12 + other.exp12)

    def __truediv__(self, other: "QMonomial") -> "QMonomial":
        if other.coeff == 0:
            raise ZeroDivisionError("division by the zero monomial")
        return QMonomial(Fraction(self.coeff) / Fraction(other.coeff), self.exp12 - other.exp12)

    def evaluate(self, q: float) -> float:
        """Numeric value at a concrete ``q > 0``."""
        if self.coeff == 0:
            return 0.0
        return float(self.coeff) * float(q) ** (self.exp12 / 12.0)

    def __repr__(self) -> str:
        return f"{self.coeff}*q^({self.exponent})"


ZERO = QMonomial(0, 0)
ONE = QMonomial(1, 0)


class LegAlphabet:
    """Ordered, duplicate free set of arrow labels; index 0 is the zero label."""

    __slots__ = ("symbols", "_index")

    def __init__(self, symbols: Iterable[Hashable]):
        symbols = tuple(symbols)
        if not symbols:
            raise ValueError("empty alphabet")
        index = {}
        for k, sym in enumerate(symbols):
            if sym in index:
                raise ValueError(f"duplicate symbol {sym!r}")
            index[sym] = k
        if not _is_zero_label(symbols[0]):
            raise ValueError("symbol 0 must be the zero label")
        self.symbols = symbols
        self._index = index

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, sym: Hashable) -> bool:
        return sym in self._index

    def index(self, sym: Hashable) -> int:
        try:
            return self._index[sym]
        except KeyError:
            raise KeyError(f"symbol {sym!r} not in alphabet") from None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LegAlphabet) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)

    def __repr__(self) -> str:
        return f"LegAlphabet({len(self.symbols)} symbols)"


def _is_zero_label(sym: Hashable) -> bool:
    if sym == 0:
        return True
    if isinstance(sym, tuple):
        return all(_is_zero_component(c) for c in sym)
    return False


def _is_zero_component(comp: Any) -> bool:
    if comp == 0 or comp == (0, 0):
        return True
    if isinstance(comp, tuple):
        return all(_is_zero_component(c) for c in comp)
    return False


@dataclass
class SparseTensor:
    """Sparse tensor: ``entries`` maps tuples of symbol indices to values.

    Values are usually :class:`QMonomial`; plain floats are accepted too,
    which is how numeric contraction at a fixed ``q`` is done.
    """

    legs: tuple[tuple[Hashable, LegAlphabet], ...]
    entries: dict[tuple[int, ...], Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.legs = tuple(self.legs)
        names = [name for name, _ in self.legs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate leg names {names}")
        n = len(self.legs)
        sizes = [len(a) for _, a in self.legs]
        clean = {}
        for key, val in self.entries.items():
            if len(key) != n:
                raise ValueError(f"entry {key} has wrong rank (expected {n})")
            for k, size in zip(key, sizes):
                if not 0 <= k < size:
                    raise ValueError(f"entry {key} out of alphabet bounds")
            if _is_zero_value(val):
                continue
            clean[tuple(key)] = val
        self.entries = clean

    @classmethod
    def from_symbols(cls, legs, items: Iterable[tuple[Sequence[Hashable], Any]]) -> "SparseTensor":
        """Build from ``(symbol tuple, value)`` pairs; repeated keys are summed."""
        legs = tuple(legs)
        alphas = [a for _, a in legs]
        entries: dict[tuple[int, ...], Any] = {}
        for syms, val in items:
            key = tuple(a.index(s) for a, s in zip(alphas, syms))
            entries[key] = entries[key] + val if key in entries else val
        return cls(legs, entries)

    @property
    def rank(self) -> int:
        return len(self.legs)

    @property
    def leg_names(self) -> tuple:
        return tuple(name for name, _ in self.legs)

    def leg_position(self, name: Hashable) -> int:
        for k, (n, _) in enumerate(self.legs):
            if n == name:
                return k
        raise KeyError(f"no leg named {name!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def symbol_items(self):
        """Yield ``(symbol tuple, value)`` in sorted key order."""
        alphas = [a for _, a in self.legs]
        for key in sorted(self.entries):
            yield tuple(a.symbols[k] for a, k in zip(alphas, key)), self.entries[key]

    def renamed(self, mapping) -> "SparseTensor":
        legs = tuple((mapping(n), a) for n, a in self.legs)
        t = SparseTensor.__new__(SparseTensor)
        t.legs, t.entries = legs, self.entries
        return t

    def fix(self, assignment: dict) -> "SparseTensor":
        """Slice: fix the legs named in ``assignment`` to the given symbols."""
        pos = []
        for name, sym in assignment.items():
            k = self.leg_position(name)
            pos.append((k, self.legs[k][1].index(sym)))
        fixed = {k for k, _ in pos}
        keep = [k for k in range(self.rank) if k not in fixed]
        out = {}
        for key, val in self.entries.items():
            if all(key[k] == v for k, v in pos):
                out[tuple(key[k] for k in keep)] = val
        t = SparseTensor.__new__(SparseTensor)
        t.legs = tuple(self.legs[k] for k in keep)
        t.entries = out
        return t

    def transpose(self, names: Sequence[Hashable]) -> "SparseTensor":
        perm = [self.leg_position(n) for n in names]
        if sorted(perm) != list(range(self.rank)):
            raise ValueError("transpose needs a permutation of all legs")
        t = SparseTensor.__new__(SparseTensor)
        t.legs = tuple(self.legs[k] for k in perm)
        t.entries = {tuple(key[k] for k in perm): v for key, v in self.entries.items()}
        return t

    def numeric(self, q: float) -> "SparseTensor":
        """Evaluate every monomial entry at ``q``."""
        t = SparseTensor.__new__(SparseTensor)
        t.legs = self.legs
        t.entries = {k: (v.evaluate(q) if isinstance(v, QMonomial) else float(v))
                     for k, v in self.entries.items()}
        return t

    def scalar(self):
        """Value of a rank-0 tensor (``ZERO`` when empty)."""
        if self.rank != 0:
            raise ValueError("not a scalar")
        return self.entries.get((), ZERO)


def _is_zero_value(val: Any) -> bool:
    if isinstance(val, QMonomial):
        return val.coeff == 0
    return val == 0


def delta_cap(name: Hashable, alphabet: LegAlphabet, symbol: Hashable = None,
              weight: QMonomial = ONE) -> SparseTensor:
    """One-leg ancilla ``weight * delta_{k, symbol}`` (zero label by default)."""
    idx = 0 if symbol is None else alphabet.index(symbol)
    return SparseTensor(((name, alphabet),), {(idx,): weight})


def contract_pair(a: SparseTensor, b: SparseTensor,
                  pairs: Sequence[tuple[Hashable, Hashable]]) -> SparseTensor:
    """Contract ``a`` and ``b`` over the named leg pairs ``(leg of a, leg of b)``.

    The result keeps the unpaired legs of ``a`` followed by those of ``b``.
    With no pairs this is the outer product.
    """
    pa, pb = [], []
    for la, lb in pairs:
        ia, ib = a.leg_position(la), b.leg_position(lb)
        if a.legs[ia][1] != b.legs[ib][1]:
            raise AlphabetMismatchError(f"legs {la!r} and {lb!r} have different alphabets")
        pa.append(ia)
        pb.append(ib)
    keep_a = [k for k in range(a.rank) if k not in pa]
    keep_b = [k for k in range(b.rank) if k not in pb]
    legs = tuple(a.legs[k] for k in keep_a) + tuple(b.legs[k] for k in keep_b)

    # bucket b by its contracted indices
    buckets: dict[tuple, list] = defaultdict(list)
    for key, val in b.entries.items():
        buckets[tuple(key[k] for k in pb)].append((tuple(key[k] for k in keep_b), val))

    out: dict[tuple, Any] = {}
    for key, va in a.entries.items():
        hits = buckets.get(tuple(key[k] for k in pa))
        if not hits:
            continue
        rest = tuple(key[k] for k in keep_a)
        for rb, vb in hits:
            nk = rest + rb
            v = va * vb
            old = out.get(nk)
            out[nk] = v if old is None else old + v
    t = SparseTensor.__new__(SparseTensor)
    t.legs = legs
    t.entries = {k: v for k, v in out.items() if not _is_zero_value(v)}
    return t


@dataclass
class NetworkGraph:
    """Placed tensors, internal leg pairings and open legs.

    ``nodes`` is a list of ``(node_id, tensor, tag)``; legs are addressed as
    ``(node_id, leg_name)``.  ``open_legs`` lists ``(node_id, leg_name, role)``
    with role ``"physical"`` or ``"boundary"``.
    """

    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    open_legs: list = field(default_factory=list)

    def add_node(self, node_id: Hashable, tensor: SparseTensor, tag: Any = None) -> None:
        self.nodes.append((node_id, tensor, tag))

    def connect(self, node_a, leg_a, node_b, leg_b) -> None:
        self.edges.append(((node_a, leg_a), (node_b, leg_b)))

    def add_open(self, node_id, leg, role: str = "physical") -> None:
        if role not in ("physical", "boundary"):
            raise ValueError(f"bad role {role!r}")
        self.open_legs.append((node_id, leg, role))

    def node_map(self) -> dict:
        return {nid: t for nid, t, _ in self.nodes}

    def physical_legs(self) -> list:
        return [(n, l) for n, l, r in self.open_legs if r == "physical"]

    def validate(self) -> None:
        """Check that every leg is used exactly once with matching alphabets."""
        tensors = self.node_map()
        if len(tensors) != len(self.nodes):
            raise ValueError("duplicate node ids")
        seen = set()

        def use(node, leg):
            if node not in tensors:
                raise ValueError(f"unknown node {node!r}")
            tensors[node].leg_position(leg)
            if (node, leg) in seen:
                raise ValueError(f"leg {(node, leg)!r} used twice")
            seen.add((node, leg))

        for (na, la), (nb, lb) in self.edges:
            use(na, la)
            use(nb, lb)
            aa = tensors[na].legs[tensors[na].leg_position(la)][1]
            ab = tensors[nb].legs[tensors[nb].leg_position(lb)][1]
            if aa != ab:
                raise AlphabetMismatchError(f"edge {(na, la)}-{(nb, lb)} alphabets differ")
        for n, l, _ in self.open_legs:
            use(n, l)
        total = sum(t.rank for t in tensors.values())
        if total != len(seen):
            raise ValueError("some tensor legs are neither paired nor open")

    def numeric(self, q: float) -> "NetworkGraph":
        """Copy of the network with every entry evaluated at ``q``."""
        return NetworkGraph([(n, t.numeric(q), g) for n, t, g in self.nodes],
                            list(self.edges), list(self.open_legs))


class _Work:
    """Mutable contraction state shared by the planner and the executor."""

    def __init__(self, net: NetworkGraph, tensors: dict):
        self.order = {nid: k for k, (nid, _, _) in enumerate(net.nodes)}
        # current tensors keyed by integer ids, legs renamed to (node, leg)
        self.cur: dict[int, SparseTensor] = {}
        self.owner: dict[tuple, int] = {}
        for nid, t in tensors.items():
            i = self.order[nid]
            self.cur[i] = t.renamed(lambda l, nid=nid: (nid, l))
            for name in self.cur[i].leg_names:
                self.owner[name] = i
        self.partner: dict[tuple, tuple] = {}
        for a, b in net.edges:
            self.partner[a] = b
            self.partner[b] = a
        self.next_id = len(net.nodes)
        self.peak = max((len(t) for t in self.cur.values()), default=0)

    def pairs_between(self, i: int, j: int) -> list:
        out = []
        for name in self.cur[i].leg_names:
            other = self.partner.get(name)
            if other is not None and self.owner.get(other) == j:
                out.append((name, other))
        return out

    def neighbours(self, i: int) -> set:
        nb = set()
        for name in self.cur[i].leg_names:
            other = self.partner.get(name)
            if other is not None:
                nb.add(self.owner[other])
        nb.discard(i)
        return nb

    def join_size(self, i: int, j: int) -> int:
        """Exact number of products formed when contracting ``i`` with ``j``."""
        pairs = self.pairs_between(i, j)
        a, b = self.cur[i], self.cur[j]
        pa = [a.leg_position(x) for x, _ in pairs]
        pb = [b.leg_position(y) for _, y in pairs]
        counts: dict[tuple, int] = defaultdict(int)
        for key in b.entries:
            counts[tuple(key[k] for k in pb)] += 1
        return sum(counts.get(tuple(key[k] for k in pa), 0) for key in a.entries)

    def merge(self, i: int, j: int) -> int:
        t = contract_pair(self.cur[i], self.cur[j], self.pairs_between(i, j))
        del self.cur[i], self.cur[j]
        k = self.next_id
        self.next_id += 1
        self.cur[k] = t
        for name in t.leg_names:
            self.owner[name] = k
        self.peak = max(self.peak, len(t))
        return k


def _greedy(work: _Work) -> list[tuple[int, int]]:
    plan = []
    cost: dict[tuple[int, int], int] = {}
    for i in sorted(work.cur):
        for j in work.neighbours(i):
            if i < j:
                cost[(i, j)] = work.join_size(i, j)
    while len(work.cur) > 1:
        if cost:
            (i, j) = min(cost, key=lambda p: (cost[p], p))
        else:
            i, j = sorted(work.cur)[:2]
        for p in [p for p in cost if i in p or j in p]:
            del cost[p]
        k = work.merge(i, j)
        plan.append((i, j))
        if len(work.cur[k]) == 0:
            # the whole network vanishes; finish with cheap outer products
            cost.clear()
            continue
        for n in work.neighbours(k):
            cost[(n, k)] = work.join_size(n, k)
    return plan


def _prepare(net: NetworkGraph, assignment: dict | None = None) -> tuple[_Work, list]:
    tensors = net.node_map()
    if assignment is not None:
        wanted = set(net.physical_legs())
        if set(assignment) != wanted:
            raise ValueError("assignment must cover exactly the physical legs")
        per_node: dict = defaultdict(dict)
        for (n, l), sym in assignment.items():
            per_node[n][l] = sym
        for n, fixes in per_node.items():
            tensors[n] = tensors[n].fix(fixes)
        open_names = [(n, l) for n, l, r in net.open_legs if r != "physical"]
    else:
        open_names = [(n, l) for n, l, _ in net.open_legs]
    return _Work(net, tensors), open_names


def plan_contraction(net: NetworkGraph) -> list[tuple[int, int]]:
    """Greedy pairwise contraction order.

    Node ids in the plan are integers: original nodes are numbered by their
    position in ``net.nodes`` and each merge creates the next unused id.  At
    each step the connected pair with the fewest products is contracted
    (ties to the smallest ids); disconnected pieces are joined by outer
    products at the end.
    """
    work, _ = _prepare(net)
    return _greedy(work)


def contract_network(net: NetworkGraph, plan: list | None = None,
                     stats: dict | None = None) -> SparseTensor:
    """Contract the whole network; result legs follow ``net.open_legs``."""
    work, open_names = _prepare(net)
    return _execute(work, open_names, plan, stats)


def _execute(work: _Work, open_names: list, plan, stats) -> SparseTensor:
    if not work.cur:
        return SparseTensor((), {(): ONE})
    if plan is None:
        plan = _greedy(work)
    else:
        for i, j in plan:
            work.merge(i, j)
    (result,) = work.cur.values()
    if stats is not None:
        stats["peak_entries"] = work.peak
        stats["plan"] = plan
    return result.transpose(open_names)


def evaluate_amplitude(net: NetworkGraph, assignment: dict):
    """Amplitude for one physical configuration.

    ``assignment`` maps ``(node, leg)`` of every physical open leg to an
    alphabet symbol.  Returns ``ZERO`` when no tiling matches.
    """
    work, open_names = _prepare(net, assignment)
    if open_names:
        raise ValueError("uncapped boundary legs remain open")
    t = _execute(work, [], None, None)
    return t.entries.get((), ZERO)
