"""Command-line front end.

Every command is deterministic: the same flags give byte-identical files.
Exit codes are 0 on success, 1 when a verification fails and 2 on bad input.
"""
from __future__ import annotations

import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import click

from . import correlations, fredkin1d, lozengemod as lz, render, sixvertex as sv
from .tensor_core import contract_network

MODELS = ("fredkin1d", "sixvertex", "lozenge")
MAX_N = 16
MAX_L = 4
MAX_COLOURS = 3
MAX_FACES = 48
MAX_STATES = 2 ** 20
BUILTIN_DOMAINS = {"small": lz.small_domain, "hexagon": lz.single_hexagon}


class BadInput(click.UsageError):
    """Raised for parameters outside the desk-scale caps."""


@dataclass
class RunSpec:
    model: str
    s: int
    qs: tuple
    n: int | None = None
    l: int | None = None
    domain: lz.TriDomain | None = None
    domain_name: str = ""
    out: Path = Path(".")
    fmt: str = "csv"

    @property
    def tag(self) -> str:
        size = {"fredkin1d": f"N{self.n}", "sixvertex": f"L{self.l}", "lozenge": self.domain_name}
        return f"{self.model}_{size[self.model]}_s{self.s}"


def _parse_q(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise BadInput(f"--q {text!r} is not a number") from None
    if q <= 0:
        raise BadInput("--q must be positive")
    return q


def _load_domain(text: str) -> tuple[lz.TriDomain, str]:
    if text in BUILTIN_DOMAINS:
        return BUILTIN_DOMAINS[text](), text
    path = Path(text)
    try:
        dom = lz.domain_from_json(path.read_text())
    except OSError as exc:
        raise BadInput(f"cannot read domain file: {exc}") from None
    except (lz.DomainError, ValueError, TypeError) as exc:
        raise BadInput(f"bad domain file: {exc}") from None
    return dom, path.stem


def make_spec(model, n, l, domain, colors, qs, out, fmt, default_qs=("1",)) -> RunSpec:
    """Validate flags against the desk-scale caps."""
    if not 1 <= colors <= MAX_COLOURS:
        raise BadInput(f"--colors must be in 1..{MAX_COLOURS}")
    spec = RunSpec(model, colors, tuple(_parse_q(q) for q in (qs or default_qs)),
                   out=Path(out), fmt=fmt)
    if model == "fredkin1d":
        spec.n = 4 if n is None else n
        if spec.n < 2 or spec.n % 2 or spec.n > MAX_N:
            raise BadInput(f"--n must be even and in 2..{MAX_N}")
        if (2 * colors) ** spec.n > MAX_STATES:
            raise BadInput("Hilbert space exceeds the dimension cap")
    elif model == "sixvertex":
        spec.l = 4 if l is None else l
        if spec.l % 2 or not 2 <= spec.l <= MAX_L:
            raise BadInput(f"--l must be even and in 2..{MAX_L}")
    else:
        spec.domain, spec.domain_name = _load_domain(domain or "small")
        if not spec.domain.faces:
            raise BadInput("empty domain")
        if len(spec.domain) > MAX_FACES:
            raise BadInput(f"domain has more than {MAX_FACES} faces")
    return spec


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


# ------------------------------------------------------------ model glue

def amplitudes(spec: RunSpec) -> dict:
    if spec.model == "fredkin1d":
        return fredkin1d.ground_amplitudes(spec.n, spec.s)
    if spec.model == "sixvertex":
        return sv.ground_amplitudes(spec.l, spec.s)
    return lz.ground_amplitudes(spec.domain, spec.s)


def contracted_amplitudes(spec: RunSpec) -> dict:
    """Symbolic contraction of the network, keyed like :func:`amplitudes`."""
    if spec.model == "fredkin1d":
        net = fredkin1d.build_network(spec.n, spec.s)
        decode = fredkin1d.chain_from_symbols
    elif spec.model == "sixvertex":
        net = sv.build_network(spec.l, spec.s)
        decode = lambda sym: sv.key_from_symbols(sym, net, spec.l)  # noqa: E731
    else:
        net = lz.build_network(spec.domain, spec.s)
        decode = lambda sym: lz.key_from_symbols(sym, net, spec.domain)  # noqa: E731
    out = {}
    for sym, val in contract_network(net).symbol_items():
        if not val.is_zero():
            out[decode(sym)] = val
    return out


def compare(enum: dict, tn: dict) -> dict:
    """Common offset, exact agreement of ratios and off-basis support."""
    off_basis = sorted(set(tn) - set(enum))
    missing = sorted(set(enum) - set(tn))
    shared = sorted(set(enum) & set(tn))
    offsets = {tn[k].exponent - enum[k].exponent for k in shared}
    coeffs = {Fraction(tn[k].coeff) / Fraction(enum[k].coeff) for k in shared}
    exact = not off_basis and not missing and len(offsets) == 1 and len(coeffs) == 1
    return {
        "exact": exact,
        "off_basis": off_basis,
        "missing": missing,
        "offset": offsets.pop() if len(offsets) == 1 else None,
        "coeff": coeffs.pop() if len(coeffs) == 1 else None,
    }


def _ratio_deviation(enum: dict, tn: dict, q: Fraction) -> float:
    keys = sorted(set(enum) & set(tn))
    if not keys:
        return float("inf")
    ref = keys[0]
    worst = 0.0
    for k in keys:
        a = tn[k].evaluate(float(q)) / tn[ref].evaluate(float(q))
        b = enum[k].evaluate(float(q)) / enum[ref].evaluate(float(q))
        worst = max(worst, abs(a / b - 1.0))
    return worst


def _fmt_key(key) -> str:
    return " ".join(str(v) for v in key)


def _emit(rows: list[list], header: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ------------------------------------------------------------- commands

def cmd_enumerate(spec: RunSpec) -> list[Path]:
    amps = amplitudes(spec)
    header = ["key", "coeff", "exponent"] + [f"amp_q={q}" for q in spec.qs]
    rows = []
    for key in sorted(amps):
        m = amps[key]
        rows.append([_fmt_key(key), str(m.coeff), str(m.exponent)]
                    + [repr(m.evaluate(float(q))) for q in spec.qs])
    path = spec.out / f"enumerate_{spec.tag}.{spec.fmt}"
    write_atomic(path, _emit(rows, header, spec.fmt))
    return [path]


def cmd_contract(spec: RunSpec) -> tuple[list[Path], bool]:
    enum = amplitudes(spec)
    tn = contracted_amplitudes(spec)
    cmp_ = compare(enum, tn)
    header = ["key", "enum_exponent", "tn_exponent", "tn_coeff", "in_basis"]
    rows = []
    for key in sorted(set(enum) | set(tn)):
        e, t = enum.get(key), tn.get(key)
        rows.append([_fmt_key(key), "" if e is None else str(e.exponent),
                     "" if t is None else str(t.exponent), "" if t is None else str(t.coeff),
                     int(e is not None)])
    path = spec.out / f"contract_{spec.tag}.{spec.fmt}"
    write_atomic(path, _emit(rows, header, spec.fmt))
    lines = [f"# {spec.tag}: {len(enum)} basis states, {len(tn)} contracted entries",
             f"exact={cmp_['exact']} offset={cmp_['offset']} coeff={cmp_['coeff']} "
             f"off_basis={len(cmp_['off_basis'])} missing={len(cmp_['missing'])}"]
    for q in spec.qs:
        lines.append(f"q={q} max_ratio_deviation={_ratio_deviation(enum, tn, q)!r}")
    summary = spec.out / f"contract_{spec.tag}_summary.txt"
    write_atomic(summary, "\n".join(lines) + "\n")
    return [path, summary], cmp_["exact"]


def _checks(spec: RunSpec):
    """Yield ``(name, passed)`` for the verification matrix of one model."""
    enum_tn = compare(amplitudes(spec), contracted_amplitudes(spec))
    yield "network = enumeration", enum_tn["exact"]
    if spec.model == "fredkin1d":
        for q in spec.qs:
            yield f"annihilation q={q}", fredkin1d.verify_annihilation(spec.n, spec.s, float(q)).ok
        yield "move graph connected", fredkin1d.move_graph_connected(spec.n, spec.s)
        if (2 * spec.s) ** spec.n <= 4096:
            for q in spec.qs:
                ev = fredkin1d.full_spectrum(spec.n, spec.s, float(q))
                yield f"unique zero mode q={q}", int((abs(ev) < 1e-9).sum()) == 1
        return
    if spec.model == "sixvertex":
        L, s = spec.l, spec.s
        for q in spec.qs:
            yield f"annihilation q={q}", sv.verify_annihilation(L, s, float(q)).ok
        keys = sv.enumerate_ground_basis(L, s)
        yield "bijection round trip", all(sv.config_from_tiling(sv.tiling_from_config(k, L)) == k for k in keys)
        yield "gauge identity", all(sv.gauge_identity_check(float(q), a)
                                    for q in (Fraction(1, 2), 2) for a in (Fraction(1, 2), 1, 3))
        yield "gauge negative control", not sv.gauge_identity_check(2.0, 1, weights={**sv.TILE_WEIGHTS, "H3": 1})
        yield "tileable vertex patterns", sv.local_surjectivity_report()["tileable_count"] == 6
        yield "move graph connected", sv.move_graph_connected(L, s)
        return
    dom, s = spec.domain, spec.s
    for q in spec.qs:
        yield f"annihilation q={q}", lz.verify_annihilation(dom, s, float(q)).ok
    keys = lz.enumerate_ground_basis(dom, s)
    yield "bijection round trip", all(
        lz.config_from_tiling(dom, lz.tiling_from_config(dom, k, s), s) == k for k in keys)
    if lz.strong_boundary_ok(dom):
        try:
            centres = lz.hexagon_peel(dom)
            faces = sorted(f for c in centres for f in lz.hexagon_faces(c))
            yield "hexagon peel", faces == sorted(dom.faces)
        except lz.PeelError:
            yield "hexagon peel", False
    yield "move graph connected", lz.move_graph_connected(dom, s)


def cmd_verify(spec: RunSpec, echo=click.echo) -> bool:
    ok = True
    for name, passed in _checks(spec):
        echo(f"{'PASS' if passed else 'FAIL'}  {spec.tag}  {name}")
        ok &= bool(passed)
    return ok


def cmd_correlate(spec: RunSpec, sizes) -> list[Path]:
    if spec.model == "lozenge":
        raise BadInput("correlation sweeps cover fredkin1d and sixvertex")
    text = correlations.scaling_report(spec.model, sizes, [float(q) for q in spec.qs], spec.s)
    path = spec.out / f"correlate_{spec.model}_s{spec.s}.csv"
    write_atomic(path, text)
    return [path]


def _max_volume_key(spec: RunSpec):
    amps = amplitudes(spec)
    return max(sorted(amps), key=lambda k: amps[k].exponent)


def cmd_render(spec: RunSpec, view: str, config: str | None) -> list[Path]:
    if spec.model == "fredkin1d":
        if view == "network":
            text = render.svg_fredkin_network(spec.n)
        else:
            chain = fredkin1d.parse_chain(config) if config else _max_volume_key(spec)
            text = render.svg_walk(chain)
    elif spec.model == "sixvertex":
        if config:
            key, L, _ = sv.from_json(Path(config).read_text())
        else:
            key, L = _max_volume_key(spec), spec.l
        text = render.svg_sixvertex(key, L)
    else:
        key = tuple(json.loads(Path(config).read_text())["key"]) if config else _max_volume_key(spec)
        if view == "levels":
            text = render.svg_prism_levels(spec.domain, key, spec.s)
        else:
            text = render.svg_lozenge(spec.domain, key)
    path = spec.out / f"render_{spec.tag}_{view}.svg"
    write_atomic(path, text)
    return [path]


# ------------------------------------------------------------------ click

def _common(f):
    opts = [
        click.option("--model", type=click.Choice(MODELS), default="fredkin1d", show_default=True),
        click.option("--n", type=int, help="chain length (fredkin1d)"),
        click.option("--l", "l", type=int, help="lattice size (sixvertex)"),
        click.option("--domain", help="domain JSON file, or 'small' / 'hexagon'"),
        click.option("--colors", type=int, default=1, show_default=True),
        click.option("--q", "qs", multiple=True, help="deformation parameter; repeatable"),
        click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


@click.group()
def main():
    """Exact holographic tensor networks for coloured Fredkin models."""


@main.command("enumerate")
@_common
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
def enumerate_cmd(model, n, l, domain, colors, qs, out, fmt):
    """Write the ground-state basis with exact and numeric amplitudes."""
    spec = make_spec(model, n, l, domain, colors, qs, out, fmt)
    for p in cmd_enumerate(spec):
        click.echo(str(p))


@main.command("contract")
@_common
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
def contract_cmd(model, n, l, domain, colors, qs, out, fmt):
    """Contract the network and compare it with enumeration."""
    spec = make_spec(model, n, l, domain, colors, qs, out, fmt)
    t0 = time.perf_counter()
    paths, ok = cmd_contract(spec)
    for p in paths:
        click.echo(str(p))
    click.echo(f"{'PASS' if ok else 'FAIL'} in {time.perf_counter() - t0:.1f} s", err=True)
    sys.exit(0 if ok else 1)


@main.command("verify")
@_common
def verify_cmd(model, n, l, domain, colors, qs, out):
    """Run the verification matrix; exit 1 on any failure."""
    spec = make_spec(model, n, l, domain, colors, qs, out, "csv", default_qs=("1/2", "2"))
    sys.exit(0 if cmd_verify(spec) else 1)


@main.command("correlate")
@_common
@click.option("--size", "sizes", type=int, multiple=True, help="sizes to sweep; repeatable")
def correlate_cmd(model, n, l, domain, colors, qs, out, sizes):
    """Profiles, pairing correlations and scaling fits as CSV."""
    spec = make_spec(model, n, l, domain, colors, qs, out, "csv", default_qs=("1/2", "1", "2"))
    sizes = sizes or ((spec.n,) if model == "fredkin1d" else (spec.l,))
    cap = MAX_N if model == "fredkin1d" else MAX_L
    if any(z % 2 or not 2 <= z <= cap for z in sizes):
        raise BadInput(f"--size out of range (cap {cap})")
    for p in cmd_correlate(spec, sizes):
        click.echo(str(p))


@main.command("render")
@_common
@click.option("--view", type=click.Choice(["config", "network", "levels"]), default="config",
              show_default=True)
@click.option("--config", help="chain text (fredkin1d) or JSON config file; default max volume")
def render_cmd(model, n, l, domain, colors, qs, out, view, config):
    """Deterministic SVG of a configuration, the 1D network or prism levels."""
    spec = make_spec(model, n, l, domain, colors, qs, out, "svg")
    if view == "network" and model != "fredkin1d":
        raise BadInput("--view network is for fredkin1d")
    if view == "levels" and model != "lozenge":
        raise BadInput("--view levels is for lozenge")
    try:
        paths = cmd_render(spec, view, config)
    except (OSError, ValueError, KeyError) as exc:
        raise BadInput(f"bad config: {exc}") from None
    for p in paths:
        click.echo(str(p))


if __name__ == "__main__":
    main()
