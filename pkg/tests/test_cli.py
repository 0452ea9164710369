import json
import os
import subprocess
import sys

import pytest

from deformquant.cli import EXIT_GATE, EXIT_OK, EXIT_USAGE, main

TINY = """
n = 1
N = 32
k = 1, 2
trials = 2
mollifier_N = 64
mollifier_L = 50.26548245743669
"""


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY)
    return path


def run(cfg, out, *extra):
    return main(["--config", str(cfg), "--out", str(out), *extra])


def test_identities_json_report(cfg, tmp_path, capsys):
    out = tmp_path / "r"
    assert run(cfg, out, "--suite", "identities") == EXIT_OK
    rows = json.loads((out / "identities.json").read_text())
    assert rows and all(r["passed"] for r in rows)
    assert all(r["identity"] for r in rows)
    assert {"plancherel", "weyl", "undeformed", "left_inverse"} <= {r["check"] for r in rows}
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "pass" and summary["suites"]["identities"]["failed"] == 0
    assert "PASS identities/plancherel" in capsys.readouterr().out


def test_csv_emit_and_conjecture_verdicts(cfg, tmp_path):
    out = tmp_path / "r"
    assert run(cfg, out, "--suite", "conjecture", "--emit", "csv") == EXIT_OK
    header = (out / "conjecture.csv").read_text().splitlines()[0]
    assert header == "suite,check,identity,params,value,gate,passed"
    verdicts = json.loads((out / "conjecture_verdicts.json").read_text())
    kinds = {v["kind"] for v in verdicts}
    assert kinds <= {"IsLeftMult", "NotInCommutant"}
    assert all(v["kind"] == v["expected"] for v in verdicts)


def test_mollifier_tables(cfg, tmp_path):
    out = tmp_path / "r"
    run(cfg, out, "--suite", "mollifier")
    names = sorted(p.name for p in out.iterdir())
    assert "approx_identity_k1_theta0.csv" in names
    assert any(n.startswith("symbol_identity") for n in names)
    first = (out / "approx_identity_k1_theta0.csv").read_text().splitlines()[0]
    assert first == "m,residual,N"


def test_outputs_are_deterministic(cfg, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(cfg, a, "--suite", "conjecture", "--seed", "3")
    run(cfg, b, "--suite", "conjecture", "--seed", "3")
    for name in os.listdir(a):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_gate_failure_exit_code(tmp_path):
    path = tmp_path / "strict.cfg"
    path.write_text(TINY + "floor = 100\n")
    assert run(path, tmp_path / "r", "--suite", "conjecture") == EXIT_GATE
    assert json.loads((tmp_path / "r" / "summary.json").read_text())["status"] == "fail"


def test_usage_errors(tmp_path, capsys):
    assert main(["--suite", "nonsense"]) == EXIT_USAGE
    assert main(["--seed", "x"]) == EXIT_USAGE
    assert main(["--config", str(tmp_path / "missing.cfg")]) == EXIT_USAGE
    bad = tmp_path / "bad.cfg"
    bad.write_text("n = 2\nJ = 0 1; 1 0\n")
    out = tmp_path / "never"
    assert main(["--config", str(bad), "--out", str(out)]) == EXIT_USAGE
    assert not out.exists()
    assert "usage error" in capsys.readouterr().err


def test_module_entry_point(cfg, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "deformquant", "--config", str(cfg), "--out", str(tmp_path / "m"),
         "--suite", "identities"],
        capture_output=True, text=True, env={**os.environ, "DEFORMQUANT_THREADS": "1"},
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "m" / "summary.json").exists()
