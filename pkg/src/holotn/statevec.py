"""Sparse superpositions over configuration keys.

A basis key is a tuple of small integers (one per site) produced by a model
module; :func:`label_bytes` turns it into the canonical byte label.  The
amplitudes are floats here; exact monomial amplitudes live in the model
modules and are evaluated before a :class:`WeightedState` is formed.
"""
from __future__ import annotations

import math
import struct
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable

import numpy as np

__all__ = [
    "WeightedState",
    "SchmidtSpectrum",
    "label_bytes",
    "normalize",
    "inner",
    "norm",
    "schmidt_spectrum",
    "apply_local_operator",
    "apply_terms",
]


def label_bytes(key: tuple[int, ...]) -> bytes:
    """Canonical byte label of a configuration key (signed 16-bit per site)."""
    return struct.pack(f">{len(key)}h", *key)


@dataclass
class WeightedState:
    """Map from configuration key to a real amplitude."""

    terms: dict = field(default_factory=dict)
    normalized: bool = False

    def __post_init__(self) -> None:
        self.terms = {k: float(v) for k, v in self.terms.items() if v != 0}

    def __len__(self) -> int:
        return len(self.terms)

    def keys(self):
        return sorted(self.terms)

    def amplitude(self, key) -> float:
        return self.terms.get(key, 0.0)

    def to_labels(self) -> dict[bytes, float]:
        return {label_bytes(k): v for k, v in self.terms.items()}

    def vector(self, keys: list) -> np.ndarray:
        return np.array([self.terms.get(k, 0.0) for k in keys])


def norm(state: WeightedState) -> float:
    return math.sqrt(math.fsum(v * v for v in state.terms.values()))


def inner(a: WeightedState, b: WeightedState) -> float:
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    return math.fsum(v * big.terms.get(k, 0.0) for k, v in small.terms.items())


def normalize(state: WeightedState) -> WeightedState:
    """Rescale to unit 2-norm."""
    n = norm(state)
    if n == 0.0:
        raise ValueError("cannot normalize the zero state")
    return WeightedState({k: v / n for k, v in state.terms.items()}, normalized=True)


@dataclass
class SchmidtSpectrum:
    """Squared Schmidt coefficients, sorted descending.

    ``entries`` holds ``(left_key, p)``; the left key is the left basis label
    carrying the largest weight in the corresponding Schmidt vector and only
    serves to make the order of degenerate values deterministic.
    """

    entries: list

    @property
    def values(self) -> list[float]:
        return [p for _, p in self.entries]

    @property
    def entropy(self) -> float:
        return -math.fsum(p * math.log(p) for p in self.values if p > 0)


def schmidt_spectrum(state: WeightedState, splitter: Callable[[tuple], tuple],
                     cutoff: float = 1e-15) -> SchmidtSpectrum:
    """Schmidt spectrum across the cut described by ``splitter``.

    ``splitter`` maps a key to ``(left, right)``.  The spectrum comes from the
    eigenvalues of the smaller Gram matrix of the grouped amplitude matrix.
    """
    pairs: dict[tuple, float] = {}
    for key, amp in state.terms.items():
        lr = splitter(key)
        if lr in pairs and pairs[lr] != amp:
            raise ValueError(f"splitter is not injective at {lr!r}")
        pairs[lr] = amp
    lefts = sorted({l for l, _ in pairs})
    rights = sorted({r for _, r in pairs})
    li = {l: k for k, l in enumerate(lefts)}
    ri = {r: k for k, r in enumerate(rights)}
    m = np.zeros((len(lefts), len(rights)))
    for (l, r), amp in pairs.items():
        m[li[l], ri[r]] = amp
    total = float(np.sum(m * m))
    if total == 0.0:
        raise ValueError("zero state")
    gram = m @ m.T
    w, v = np.linalg.eigh(gram / total)
    out = []
    for k in range(len(w)):
        p = float(w[k])
        if p <= cutoff:
            continue
        col = np.abs(v[:, k])
        lead = int(np.flatnonzero(col >= col.max() - 1e-12)[0])
        out.append((lefts[lead], p))
    s = math.fsum(p for _, p in out)
    out = [(l, p / s) for l, p in out]
    # near-equal values are ordered by left key
    out.sort(key=lambda e: (-round(e[1], 12), e[0]))
    return SchmidtSpectrum(out)


def apply_local_operator(state: WeightedState, support: Iterable[int], op: dict) -> WeightedState:
    """Apply a local operator acting on the sites in ``support``.

    ``op`` maps a local input tuple to a list of ``(local output tuple, coeff)``
    pairs, i.e. the columns of a sparse matrix over local configurations.
    Local inputs missing from ``op`` are annihilated.
    """
    support = list(support)
    out: dict = defaultdict(float)
    for key, amp in state.terms.items():
        if support and max(support) >= len(key):
            raise IndexError(f"support {support} outside a configuration of {len(key)} sites")
        local = tuple(key[i] for i in support)
        cols = op.get(local)
        if not cols:
            continue
        for new_local, c in cols:
            new = list(key)
            for i, v in zip(support, new_local):
                new[i] = v
            out[tuple(new)] += c * amp
    return WeightedState(dict(out))


def apply_terms(state: WeightedState, terms: Iterable[tuple[list, dict]]) -> float:
    """Largest residual norm of ``h |state>`` over the given local terms."""
    worst = 0.0
    for support, op in terms:
        worst = max(worst, norm(apply_local_operator(state, support, op)))
    return worst
