import importlib.util
import json
import os
import subprocess
import sys

import pytest

from krongap import cli
from krongap.nn import TruncationError


def run(*argv):
    return cli.main(list(argv))


def test_gaps_1d_figure(capsys):
    assert run("gaps-1d", "--alpha", "0;2,(1)", "--n", "6", "--base", "0", "--depth", "40") == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "3 distinct gaps"


def test_gaps_1d_json(capsys):
    assert run("gaps-1d", "--alpha", "1/4", "--n", "4", "--format", "json") == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["distinct"] == 1 and obj["gaps"] == {"1/4": 4}


def test_construct_simple(capsys):
    assert run("construct", "simple", "--alpha1", "0;1,(2)", "--depth", "30") == 0
    obj = json.loads(capsys.readouterr().out)
    assert [e["q"] for e in obj["ledger"]][:4] == [3, 7, 17, 41]
    assert obj["streams"][1].startswith("0;3,(2")


def test_construct_general_and_analyze(tmp_path, capsys):
    tup = tmp_path / "t.json"
    assert run("construct", "3d", "--alpha1", "0;1,(2)", "--schedule", '{"k":[2,4,6,8]}', "--out", str(tup)) == 0
    obj = json.loads(tup.read_text())
    assert [e["q"] for e in obj["ledger"]] == [3, 31, 1894, 7202913]
    csv_out = tmp_path / "s.csv"
    assert run("analyze", "--tuple", str(tup), "--nmax", "80", "--out", str(csv_out)) == 0
    lines = csv_out.read_text().splitlines()
    assert lines[0] == "N,g_L1,g_L2,g_Linf,h1,window"
    g1 = [int(r.split(",")[0]) for r in lines[1:] if r.endswith("g1")]
    assert set(range(6, 8)) <= set(g1) and set(range(62, 70)) <= set(g1)
    for r in lines[1:]:
        if r.endswith("g1"):
            assert r.split(",")[1:4] == ["1", "1", "1"]


def test_analyze_graph_export(tmp_path, capsys):
    g = tmp_path / "g.txt"
    assert run("analyze", "--alpha", "1/4", "--nmax", "4", "--graph-n", "4", "--graph-out", str(g), "--metrics", "2") == 0
    assert g.read_text() == "1 4 1/16\n2 3 1/16\n3 4 1/16\n4 3 1/16\n"


def test_verify_theorem1_exit_codes(capsys):
    assert run("verify", "theorem1", "--alpha1", "0;1,(2)", "--nmax", "2000", "--metrics", "1,2,inf") == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True
    assert run("verify", "theorem1", "--alpha1", "0;1,(2)", "--nmax", "100", "--convention", "stated") == 1
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is False
    assert report["reports"][0]["counterexample"]["N"] == 6


def test_verify_all(tmp_path, capsys):
    out, meta = tmp_path / "r.json", tmp_path / "m.json"
    assert run("verify", "all", "--nmax", "200", "--out", str(out), "--meta", str(meta)) == 0
    names = [r["name"] for r in json.loads(out.read_text())["reports"]]
    assert {"three-gap", "lemma-part1", "lemma-part2", "theorem1", "asmallest", "upper-bounds"} <= set(names)
    assert "backend" in json.loads(meta.read_text())
    assert "runtime" not in out.read_text()


def test_outputs_are_byte_identical(tmp_path):
    paths = []
    for i in range(2):
        p = tmp_path / f"v{i}.json"
        assert run("verify", "all", "--nmax", "150", "--out", str(p), "--meta", str(tmp_path / f"m{i}.json")) == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]


def test_parallel_jobs_match_serial(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("verify", "all", "--nmax", "150", "--out", str(a)) == 0
    assert run("verify", "all", "--nmax", "150", "--out", str(b), "--jobs", "3") == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "argv, fragment",
    [
        (["gaps-1d", "--alpha", "0;1,,2", "--n", "4"], "0;1,,2"),
        (["gaps-1d", "--alpha", "5/4", "--n", "4"], "(0, 1)"),
        (["construct", "general", "--alpha1", "0;1,(2)", "--schedule", '{"k":[2,4],\n "free": }'], "line 2"),
        (["construct", "general", "--alpha1", "0;1,(2)", "--schedule", '{"k":[2,5,8]}'], "a_7"),
        (["construct", "extended", "--alpha1", "0;1,(2)", "--schedule", '{"k":[2,4],"b":[2]}'], "a/(2b)"),
        (["construct", "general", "--alpha1", "0;1,(2)"], "--schedule"),
        (["analyze", "--nmax", "10"], "--alpha"),
    ],
)
def test_usage_errors(argv, fragment, capsys):
    assert run(*argv) == 2
    assert fragment in capsys.readouterr().err


def test_truncation_failure_exit_code(monkeypatch, capsys):
    def boom(*a, **k):
        raise TruncationError("results still change; try --depth 40 or larger")

    monkeypatch.setattr(cli.V, "sweep", boom)
    assert run("analyze", "--alpha", "0;1,(2)", "--nmax", "10") == 3
    assert "--depth 40" in capsys.readouterr().err


def test_console_script_and_numpy_fallback(tmp_path):
    """The installed entry point gives the same bytes with and without numba."""
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, KRONGAP_NO_NUMBA=flag)
        p = tmp_path / f"sweep{flag}.csv"
        subprocess.run(
            [sys.executable, "-m", "krongap.cli", "analyze", "--alpha", "0;1,(2)", "--alpha", "0;3,(2)", "--nmax", "300", "--out", str(p)],
            check=True,
            env=env,
        )
        backend = subprocess.run(
            [sys.executable, "-c", "from krongap import _accel; print(_accel.BACKEND)"],
            env=env, capture_output=True, text=True, check=True,
        ).stdout.strip()
        assert backend == ("numba" if flag == "0" and importlib.util.find_spec("numba") else "numpy")
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
