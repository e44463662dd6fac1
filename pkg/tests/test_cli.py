from __future__ import annotations

import json
import subprocess
import sys

import pytest

from sdnb.cli import build_parser, config_from_args, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--p", "3", "--d", "1", "--n", "1", "--samples", "5")
    assert code == 0
    doc = json.loads(out)
    assert doc["params"]["p"] == 3 and doc["params"]["n"] == [1]
    assert all(c["pass"] for c in doc["checks"])


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--p", "4", "--n", "1"],
        ["verify", "--p", "3", "--n", "0"],
        ["verify", "--p", "3", "--d", "2", "--n", "1"],
        ["verify", "--p", "3", "--n", "5"],
        ["verify", "--p", "7", "--d", "5", "--n", "1,0,0,0,0"],
        ["verify", "--p", "3", "--n", "1", "--precision", "3"],
        ["bogus"],
    ],
)
def test_config_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_verify_requires_n(capsys):
    code, _, err = run(capsys, "verify", "--p", "3")
    assert code == 2 and "--n" in err


@pytest.mark.parametrize("p,d,classes", [(3, 1, 1), (5, 1, 1), (3, 2, 4)])
def test_sweep_class_counts(capsys, p, d, classes):
    code, out, _ = run(capsys, "sweep", "--p", str(p), "--d", str(d), "--samples", "3")
    doc = json.loads(out)
    assert code == 0
    assert doc["classes"] == classes and len(doc["reports"]) == classes
    assert doc["pass"]


def test_dwork_dump(capsys):
    code, out, _ = run(capsys, "dwork", "--p", "5", "--terms", "50")
    doc = json.loads(out)
    assert code == 0
    assert doc["terms"] == 50 and doc["all_integral"]
    assert doc["coefficients"][0][0] == 0


def test_fgl_dump(capsys):
    code, out, _ = run(capsys, "fgl", "--p", "3", "--d", "2")
    doc = json.loads(out)
    assert code == 0
    assert doc["closed_form_match"] is True
    assert doc["filtration"]["orders"] == [9] * 9 + [1]
    assert doc["different"]["M/K"] == 4
    assert doc["different"]["tame"] == 7
    assert all(doc["axioms"].values())


def test_fgl_low_degree(capsys):
    code, out, _ = run(capsys, "fgl", "--p", "5", "--degree", "3")
    doc = json.loads(out)
    assert code == 0 and doc["closed_form_match"] is None


def test_galois_dump(capsys):
    code, out, _ = run(capsys, "galois", "--p", "5")
    doc = json.loads(out)
    assert code == 0
    assert (doc["order"], doc["delta_size"], doc["G_size"]) == (20, 4, 5)


def test_text_format(capsys):
    code, out, _ = run(capsys, "galois", "--p", "3", "--format", "text")
    assert code == 0
    assert "order = 6" in out.splitlines()


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "dwork", "--p", "3", "--terms", "5", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["terms"] == 5


def test_precision_env(monkeypatch):
    monkeypatch.setenv("SDNB_PRECISION", "30")
    args = build_parser().parse_args(["dwork", "--p", "3"])
    assert config_from_args(args).precision == 30
    args = build_parser().parse_args(["dwork", "--p", "3", "--precision", "12"])
    assert config_from_args(args).precision == 12


def test_precision_env_invalid(monkeypatch, capsys):
    monkeypatch.setenv("SDNB_PRECISION", "many")
    code, _, _ = run(capsys, "dwork", "--p", "3")
    assert code == 2


def test_deterministic_reports(capsys):
    argv = ["verify", "--p", "3", "--n", "1", "--samples", "4", "--seed", "7"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    strip = lambda doc: [{k: v for k, v in c.items() if k != "ms"} for c in json.loads(doc)["checks"]]
    assert strip(a) == strip(b)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sdnb.cli", "galois", "--p", "3"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["order"] == 6
