"""Height profiles and boundary colour correlations from enumerated states.

A state enters as exact probabilities ``{key: Fraction}`` (see
:func:`probabilities`) or as a :class:`~holotn.statevec.WeightedState`.  A
walk adapter maps a key to the heights ``h_0, h_1, ..., h_n`` along one
chain, starting at the boundary.

Two boundary events are used:

* return: the walk is back at the boundary height after ``r`` steps.  Its
  probability has the closed form ``N(r) N(L-r) / N(L)`` at ``q = 1``.
* pairing: the boundary up step is matched by step ``r`` (first return).  This
  is the colour two-point function ``<c_0 c_{r-1}>`` for a symmetric colour
  operator, and it sums to 1 over ``r``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .statevec import WeightedState

__all__ = [
    "Profile",
    "ScalingFit",
    "n_dyck",
    "color_corr_formula",
    "probabilities",
    "fredkin_walk",
    "sixvertex_walk",
    "color_corr_enum",
    "pair_corr_enum",
    "colour_correlator",
    "spin_profile",
    "fit_scaling",
    "scaling_report",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("model", "L-or-N", "s", "q", "r", "phi_mean", "S_r", "G_c",
               "fit_model", "fit_param", "residual")


def n_dyck(r: int) -> int:
    """Number of Dyck paths of length ``r``, ``2/(r+2) binom(r, r/2)``."""
    if r < 0 or r % 2:
        raise ValueError("r must be even and non-negative")
    return math.comb(r, r // 2) * 2 // (r + 2)


def color_corr_formula(L: int, r: int) -> Fraction:
    """``N(r) N(L-r) / N(L)``; ``r = L`` gives 1."""
    if L % 2 or r % 2 or not 0 < r <= L:
        raise ValueError("need even L and r with 0 < r <= L")
    return Fraction(n_dyck(r) * n_dyck(L - r), n_dyck(L))


def probabilities(amplitudes: dict, q) -> dict:
    """Exact ``|psi|^2`` from monomial amplitudes at a rational ``q``."""
    q = Fraction(q)
    w = {}
    for key, m in amplitudes.items():
        e2 = 2 * m.exponent
        if e2.denominator != 1:
            raise ValueError("squared amplitude is not a rational power of q")
        w[key] = Fraction(m.coeff) ** 2 * q ** int(e2)
    total = sum(w.values())
    return {k: v / total for k, v in w.items()}


def _as_probs(state) -> dict:
    if isinstance(state, WeightedState):
        total = math.fsum(a * a for a in state.terms.values())
        return {k: a * a / total for k, a in state.terms.items()}
    return state


def fredkin_walk(key) -> list[int]:
    h = [0]
    for v in key:
        h.append(h[-1] + (1 if v > 0 else -1))
    return h


def sixvertex_walk(L: int, b: int = 0) -> Callable:
    """Heights along horizontal chain ``b`` of the 6-vertex model."""
    from .sixvertex import height_field

    def walk(key):
        phi = height_field(key, L)
        return [phi[(a, b)] for a in range(-1, L)]

    return walk


def color_corr_enum(state, r: int, walk: Callable = fredkin_walk):
    """Probability that the walk is back at its boundary height after ``r`` steps."""
    probs = _as_probs(state)
    total = 0
    for key, p in probs.items():
        h = walk(key)
        if h[r] == h[0]:
            total += p
    return total


def pair_corr_enum(state, r: int, walk: Callable = fredkin_walk):
    """Probability that the boundary step is matched by step ``r`` (first return)."""
    probs = _as_probs(state)
    total = 0
    for key, p in probs.items():
        h = walk(key)
        first = next((i for i in range(1, len(h)) if h[i] == h[0]), None)
        if first == r:
            total += p
    return total


def colour_correlator(state, j: int, plus: int = 1):
    """``<c_0 c_j>`` for a 1D key with ``c = +1`` on colour ``plus`` and -1 otherwise."""
    probs = _as_probs(state)
    total = 0
    for key, p in probs.items():
        a = 1 if abs(key[0]) == plus else -1
        b = 1 if abs(key[j]) == plus else -1
        total += p * a * b
    return total


@dataclass
class Profile:
    r: list
    phi: list
    S: list


def spin_profile(state, walk: Callable = fredkin_walk) -> Profile:
    """``<phi_r>`` along the walk and its forward difference ``<S_r>``."""
    probs = _as_probs(state)
    acc = None
    for key, p in probs.items():
        h = walk(key)
        if acc is None:
            acc = [0] * len(h)
        for i, x in enumerate(h):
            acc[i] += p * x
    phi = [float(x) for x in acc]
    S = [b - a for a, b in zip(phi, phi[1:])]
    return Profile(list(range(len(phi))), phi, S)


@dataclass
class ScalingFit:
    model: str
    param: float
    intercept: float
    residual: float


def fit_scaling(r, y, window: tuple[int, int], model: str) -> ScalingFit:
    """Least squares over ``window[0] <= r <= window[1]``.

    ``power``: log y against log r (param is the exponent); ``exponential``:
    log y against r (param is the rate); ``log``: y against log r.  The
    residual is the root mean square in the fitted coordinate, so power and
    exponential residuals are both in ``log y``.
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    m = (r >= window[0]) & (r <= window[1])
    r, y = r[m], y[m]
    if len(r) < 2:
        raise ValueError("window holds fewer than two points")
    if model == "power":
        xs, ys = np.log(r), np.log(np.abs(y))
    elif model == "exponential":
        xs, ys = r, np.log(np.abs(y))
    elif model == "log":
        xs, ys = np.log(r), y
    else:
        raise ValueError(f"unknown fit model {model!r}")
    a = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(a, ys, rcond=None)
    res = float(np.sqrt(np.mean((a @ coef - ys) ** 2)))
    return ScalingFit(model, float(coef[0]), float(coef[1]), res)


def _sweep_rows(model: str, size: int, s: int, q: float, probs: dict, walk) -> list[list]:
    prof = spin_profile(probs, walk)
    n = len(prof.phi) - 1
    rows = []
    gc = {}
    for r in range(2, n + 1, 2):
        gc[r] = float(pair_corr_enum(probs, r, walk))
    for r in prof.r:
        S = prof.S[r] if r < len(prof.S) else ""
        rows.append([model, size, s, q, r, prof.phi[r], S, gc.get(r, ""), "", "", ""])
    window = (1, n // 2)
    for name, xs, ys in (("phi", prof.r, prof.phi), ("G_c", list(gc), list(gc.values()))):
        pts = [(x, y) for x, y in zip(xs, ys) if y > 0 and window[0] <= x <= window[1]]
        if len(pts) < 2:
            continue
        for fm in ("power", "exponential"):
            f = fit_scaling([x for x, _ in pts], [y for _, y in pts], window, fm)
            rows.append([model, size, s, q, "", "", "", "", f"{name}:{fm}", f.param, f.residual])
    return rows


def scaling_report(model: str, sizes, qs, s: int = 1) -> str:
    """CSV text with profiles, pairing correlations and fits per (size, q)."""
    out = io.StringIO()
    if model != "fredkin1d":
        out.write("# finite-size, qualitative\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for size in sizes:
        for q in qs:
            qf = Fraction(q).limit_denominator(1000)
            if model == "fredkin1d":
                from .fredkin1d import ground_amplitudes
                amps = ground_amplitudes(size, s)
                walk = fredkin_walk
            elif model == "sixvertex":
                from .sixvertex import ground_amplitudes
                amps = ground_amplitudes(size, s)
                walk = sixvertex_walk(size, (size - 2) // 2)
            else:
                raise ValueError(f"no correlation sweep for model {model!r}")
            probs = probabilities(amps, qf)
            for row in _sweep_rows(model, size, s, float(q), probs, walk):
                w.writerow(["" if v == "" else (repr(v) if isinstance(v, float) else v) for v in row])
    return out.getvalue()
