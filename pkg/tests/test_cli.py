from __future__ import annotations

import hashlib
import json
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from conftest import DATA

from gammalg import __version__
from gammalg.cli import RunConfig, dumps, run, write_atomic

SCHEMA = json.loads(resources.files("gammalg").joinpath("schema/report.schema.json").read_text())


def spec(name: str) -> str:
    return str(DATA / f"{name}.json")


def report_of(argv):
    code, report = run(argv)
    if report is not None:
        jsonschema.validate(report, SCHEMA)
        assert report["exit_code"] == code
    return code, report


# -- reports ------------------------------------------------------------------


def test_info_examples():
    code, r = report_of(["info", spec("golden_mean")])
    assert code == 0
    res = r["result"]
    assert res["automaton"]["states"] == 2
    assert res["word_counts"]["5"] == 13
    assert res["periodic_counts"]["2"] == 3
    assert res["aperiodic"] is True and res["sft_irreducible"] is None
    _, r = report_of(["info", spec("full2")])
    assert r["result"]["automaton"]["states"] == 1
    assert [r["result"]["word_counts"][str(n)] for n in range(9)] == [2**n for n in range(9)]
    _, r = report_of(["info", spec("forbidden10")])
    assert r["result"]["aperiodic"] is False
    _, r = report_of(["info", spec("golden_mean_matrix")])
    assert r["result"]["sft_irreducible"] is True


def test_report_metadata():
    _, r = report_of(["info", spec("full2")])
    assert r["version"] == __version__
    assert r["spec_sha256"] == hashlib.sha256(Path(spec("full2")).read_bytes()).hexdigest()
    assert r["config"]["seed"] == 0xC0FFEE
    assert r["warnings"] == []


@pytest.mark.parametrize(
    "name, algebra, code",
    [
        ("full2", "OS", 0),
        ("golden_mean", "OS", 0),
        ("golden_mean", "AF", 0),
        ("forbidden10", "OS", 10),
        ("forbidden10", "AF", 10),
        ("two_full", "OS", 10),
        ("even", "OS", 10),
        ("even", "AF", 10),
        ("finite", "OS", 12),
        ("finite", "AF", 12),
    ],
)
def test_check_simple_exit_codes(name, algebra, code):
    got, r = report_of(["check-simple", spec(name), "--algebra", algebra])
    assert got == code
    if code == 10:
        assert r["result"]["witness_verified"] is True
    if code == 12:
        assert r["result"]["status"] == "not_applicable"


def test_unknown_exit_code():
    code, r = report_of(["check-simple", spec("golden_mean"), "--class-cap", "2"])
    assert code == 11
    assert r["result"]["caps"]["sampled"] is True


def test_algebra_examples():
    _, r = report_of(["algebra", spec("full2"), "--expr", "t_0 * adjoint(t_0)"])
    assert r["result"]["element"] == {"sum": [{"coef": [1.0, 0.0], "term": {"u": "0", "v": "0", "tail": {"atoms": [[0]]}}}]}
    _, r = report_of(["algebra", spec("full2"), "--expr", "adjoint(v) * v - one", "--op", "supnorm"])
    assert r["result"]["scalar"] <= 1e-12
    _, r = report_of(["algebra", spec("golden_mean"), "--expr", "t_1", "--op", "Q"])
    assert r["result"]["element"] == {"sum": []} and r["result"]["zero_within_tolerance"]


@pytest.mark.parametrize(
    "op, check",
    [
        ("adjoint", lambda res: res["element"]["sum"][0]["term"]["v"] == "0"),
        ("P", lambda res: res["terms"] == 0),
        ("gauge:-1", lambda res: res["element"]["sum"][0]["coef"] == [-1.0, 0.0]),
        ("eval:0,0;1;,0", lambda res: res["scalar"] == [1.0, 0.0]),
        ("eval:,0;0;,0", lambda res: res["scalar"] == [0.0, 0.0]),
    ],
)
def test_algebra_ops(op, check):
    code, r = report_of(["algebra", spec("full2"), "--expr", "t_0", "--op", op])
    assert code == 0 and check(r["result"])


def test_algebra_mul_and_files(tmp_path):
    f = tmp_path / "e.json"
    f.write_text(json.dumps({"sum": [{"gen": "t_0"}]}))
    _, r = report_of(["algebra", spec("full2"), "--expr", str(f), "--expr", "adjoint(t_0)", "--op", "mul"])
    assert r["result"]["element"]["sum"][0]["term"] == {"u": "0", "v": "0", "tail": {"atoms": [[0]]}}
    _, r = report_of(["algebra", spec("full2"), "--expr", "one", "--op", "phi_hat"])
    assert r["result"]["terms"] == 4 and not r["result"]["exact"]


def test_fiber_and_norm_examples():
    _, r = report_of(["fiber", spec("full2"), "--point", ",0", "--level", "2", "--expr", "one"])
    assert len(r["result"]["points"]) == 4
    assert [[c[0] for c in row] for row in r["result"]["matrix"]] == [[float(i == j) for j in range(4)] for i in range(4)]
    _, r = report_of(["norm", spec("full2"), "--expr", "vv*", "--level", "1"])
    res = r["result"]
    assert res["lower"] == pytest.approx(1.0, abs=1e-12)
    assert res["upper"] == 2 * res["sup_norm"]
    assert res["lower"] <= res["upper"] * (1 + 1e-12)
    _, r = report_of(["norm", spec("full2"), "--expr", "t_0"])
    assert r["result"]["lower"] >= 0.999 and r["result"]["upper"] is None


@pytest.mark.parametrize(
    "argv, code",
    [
        (["info", "does/not/exist.json"], 2),
        (["algebra", "full2", "--expr", "t_2"], 4),
        (["algebra", "full2"], 4),
        (["algebra", "full2", "--expr", "t_0", "--op", "frobnicate"], 4),
        (["algebra", "full2", "--expr", "t_0", "--expr", "t_1"], 4),
        (["fiber", "full2", "--expr", "one"], 4),
        (["algebra", "full2", "--expr", "phi_hat(t_0)"], 5),
        (["fiber", "full2", "--point", ",0", "--expr", "t_00 adjoint(t_01)"], 5),
        (["algebra", "full2", "--expr", "t_0", "--op", "gauge:2"], 5),
        (["algebra", "full2", "--expr", "t_0", "--op", "eval:,0;0;,1"], 5),
        (["info", "full2", "--tolerance", "0"], 2),
    ],
)
def test_error_exit_codes(argv, code, capsys):
    argv = [spec(a) if a in ("full2",) else a for a in argv]
    got, report = run(argv)
    assert got == code
    assert report is None
    assert "gammalg:" in capsys.readouterr().err


def test_bad_and_empty_specs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["info", str(bad)])[0] == 2
    bad.write_text(json.dumps({"alphabet": ["0"], "type": "nope"}))
    assert run(["info", str(bad)])[0] == 2
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"alphabet": ["0", "1"], "type": "sft_forbidden", "forbidden": ["0", "1"]}))
    assert run(["info", str(empty)])[0] == 3


# -- reproducibility ----------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["info", "golden_mean"],
        ["check-simple", "even"],
        ["check-simple", "golden_mean", "--class-cap", "2"],
        ["norm", "golden_mean", "--expr", "vv*", "--level", "2"],
        ["algebra", "even", "--expr", "2 v - Q(t_1) + m"],
    ],
)
def test_reports_are_byte_identical(argv, tmp_path):
    argv = [spec(a) if i == 1 else a for i, a in enumerate(argv)]
    outs = []
    for n in range(2):
        out = tmp_path / f"r{n}.json"
        run(argv + ["--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["result"] is not None


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("GAMMALG_SEED", "0x10")
    _, r = report_of(["norm", spec("golden_mean"), "--expr", "one"])
    assert r["config"]["seed"] == 16
    monkeypatch.setenv("GAMMALG_SEED", "banana")
    with pytest.raises(SystemExit):
        run(["info", spec("full2")])


def test_out_is_written_atomically(tmp_path, capsys):
    out = tmp_path / "report.json"
    out.write_text("old")
    code, r = run(["info", spec("full2"), "--out", str(out), "--json"])
    assert json.loads(out.read_text()) == json.loads(capsys.readouterr().out)
    assert [p.name for p in tmp_path.iterdir()] == ["report.json"]
    # a failing serialization leaves the old file in place
    with pytest.raises(TypeError):
        write_atomic(str(out), dumps({"x": object()}))
    assert json.loads(out.read_text())["command"] == "info"
    assert [p.name for p in tmp_path.iterdir()] == ["report.json"]


def test_dumps_format():
    text = dumps({"b": 0.1, "a": [1, 2.5, 1e-20], "c": {"z": None, "y": True}, "d": 1 + 2j})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert "0.10000000000000001" in text
    assert json.loads(text)["d"] == [1.0, 2.0]


def test_run_config_validation():
    RunConfig()
    with pytest.raises(ValueError):
        RunConfig(tolerance=1e-13)
    with pytest.raises(ValueError):
        RunConfig(class_cap=0)


def test_human_summary(capsys):
    run(["check-simple", spec("forbidden10")])
    out = capsys.readouterr().out
    assert out.startswith("O_S: not_simple")
    assert "verified=True" in out


def test_entry_points():
    for cmd in (["gammalg"], [sys.executable, "-m", "gammalg"]):
        proc = subprocess.run(cmd + ["check-simple", spec("full2"), "--json"], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert json.loads(proc.stdout)["result"]["status"] == "simple"
