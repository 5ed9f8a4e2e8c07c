import csv
import json

import pytest
from click.testing import CliRunner

from holotn import cli
from holotn import fredkin1d as fk
from holotn import lozengemod as lz
from holotn.tensor_core import QMonomial


def run(*args):
    return CliRunner().invoke(cli.main, [str(a) for a in args])


def test_enumerate_csv(tmp_path):
    res = run("enumerate", "--n", 4, "--colors", 2, "--q", 2, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    with open(tmp_path / "enumerate_fredkin1d_N4_s2.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    # amplitude q^area with areas 2 and 4
    assert {r["exponent"] for r in rows} == {"2", "4"}


def test_enumerate_json_lozenge(tmp_path):
    res = run("enumerate", "--model", "lozenge", "--domain", "small", "--format", "json", "--out", tmp_path)
    assert res.exit_code == 0, res.output
    (path,) = tmp_path.glob("enumerate_*.json")
    assert len(json.loads(path.read_text())) == 2


def test_domain_file_input(tmp_path):
    dom = tmp_path / "dom.json"
    dom.write_text(lz.domain_to_json(lz.single_hexagon()))
    res = run("enumerate", "--model", "lozenge", "--domain", dom, "--colors", 2, "--out", tmp_path)
    assert res.exit_code == 0, res.output


def test_outputs_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("contract", "--model", "sixvertex", "--l", 4, "--q", "1/2", "--out", out).exit_code == 0
        assert run("render", "--model", "lozenge", "--domain", "small", "--view", "levels", "--out", out).exit_code == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_no_temp_files_left(tmp_path):
    assert run("enumerate", "--n", 6, "--out", tmp_path).exit_code == 0
    assert [p.name for p in tmp_path.iterdir()] == ["enumerate_fredkin1d_N6_s1.csv"]


def test_write_atomic_keeps_old_file_on_failure(tmp_path, monkeypatch):
    path = tmp_path / "x.txt"
    cli.write_atomic(path, "old\n")

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(cli.os, "replace", boom)
    with pytest.raises(OSError):
        cli.write_atomic(path, "new\n")
    assert path.read_text() == "old\n"
    assert [p.name for p in tmp_path.iterdir()] == ["x.txt"]


def test_contract_exit_zero_and_summary(tmp_path):
    res = run("contract", "--n", 6, "--colors", 2, "--q", 2, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    summary = (tmp_path / "contract_fredkin1d_N6_s2_summary.txt").read_text()
    assert "exact=True offset=0" in summary


def test_contract_exit_one_on_mismatch(tmp_path, monkeypatch):
    real = cli.contracted_amplitudes

    def skewed(spec):
        out = real(spec)
        k = sorted(out)[0]
        out[k] = out[k] * QMonomial(1, 12)
        return out

    monkeypatch.setattr(cli, "contracted_amplitudes", skewed)
    res = run("contract", "--n", 4, "--out", tmp_path)
    assert res.exit_code == 1
    assert "exact=False" in (tmp_path / "contract_fredkin1d_N4_s1_summary.txt").read_text()


def test_verify_passes(tmp_path):
    res = run("verify", "--model", "lozenge", "--domain", "small", "--out", tmp_path)
    assert res.exit_code == 0, res.output
    lines = res.output.strip().splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_verify_fails_with_exit_one(monkeypatch):
    monkeypatch.setattr(fk, "move_graph_connected", lambda n, s: False)
    res = run("verify", "--n", 4)
    assert res.exit_code == 1
    assert any(line.startswith("FAIL") for line in res.output.splitlines())


def test_correlate(tmp_path):
    res = run("correlate", "--size", 6, "--size", 8, "--q", 1, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    text = (tmp_path / "correlate_fredkin1d_s1.csv").read_text()
    assert text.splitlines()[0].startswith("model,L-or-N")


def test_render_chain_config(tmp_path):
    res = run("render", "--n", 4, "--config", "U1 U1 D1 D1", "--out", tmp_path)
    assert res.exit_code == 0, res.output
    (path,) = tmp_path.glob("*.svg")
    assert path.read_text().startswith("<svg")


@pytest.mark.parametrize("args", [
    ("enumerate", "--n", 5),
    ("enumerate", "--n", 40),
    ("enumerate", "--model", "sixvertex", "--l", 3),
    ("enumerate", "--colors", 0, "--n", 4),
    ("enumerate", "--n", 4, "--q", "-1"),
    ("enumerate", "--n", 4, "--q", "abc"),
    ("enumerate", "--model", "lozenge", "--domain", "/nonexistent/dom.json"),
    ("enumerate", "--model", "nope"),
    ("correlate", "--model", "lozenge", "--domain", "small", "--size", 1),
    ("render", "--model", "sixvertex", "--l", 4, "--view", "network"),
    ("render", "--n", 4, "--config", "X1 D1"),
])
def test_bad_input_exits_two(args, tmp_path):
    res = run(*args, "--out", tmp_path)
    assert res.exit_code == 2, res.output
