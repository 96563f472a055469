import json
import subprocess
import sys

import pytest

from trajfb import cli
from trajfb.mdp import Mdp

CONFIG = {
    "env": {"kind": "Chain", "S": 3, "H": 3},
    "agents": ["UniformRandom", "TsKnown", {"kind": "RsUcbviTs", "C": 1.0}, "OfulKnown"],
    "K": 20,
    "seeds": [0, 1],
}


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_run_summarize(tmp_path):
    cfg = _write(tmp_path, "cfg.json", CONFIG)
    out, summ = tmp_path / "out.csv", tmp_path / "summary.json"
    assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 0
    assert cli.main(["summarize", "--in", str(out), "--out", str(summ)]) == 0
    summary = json.loads(summ.read_text())
    assert set(summary) == {"UniformRandom", "TsKnown", "RsUcbviTs", "OfulKnown"}
    assert summary["TsKnown"]["seeds"] == 2 and summary["TsKnown"]["episodes"] == 20


def test_run_is_byte_identical(tmp_path):
    cfg = _write(tmp_path, "cfg.json", CONFIG)
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert cli.main(["run", "--config", cfg, "--out", str(a)]) == 0
    assert cli.main(["run", "--config", cfg, "--out", str(b)]) == 0
    assert cli.main(["run", "--config", cfg, "--out", str(c), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_config_error_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "cfg.json", {**CONFIG, "K": 0})
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2
    assert "K must be" in capsys.readouterr().err
    assert cli.main(["run", "--config", str(tmp_path / "missing.json"), "--out", "x"]) == 2
    assert cli.main(["summarize", "--in", str(tmp_path / "missing.csv")]) == 2


def test_enumeration_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "cfg.json", {**CONFIG, "env": {"kind": "Chain", "S": 4, "H": 6}, "agents": ["OfulKnown"]})
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 3
    assert "OfulKnown" in capsys.readouterr().err


def test_gen_env(tmp_path):
    spec = _write(tmp_path, "spec.json", {"kind": "RandomDense", "S": 3, "A": 2, "H": 4, "seed": 9})
    out = tmp_path / "mdp.json"
    assert cli.main(["gen-env", "--spec", spec, "--out", str(out)]) == 0
    mdp = Mdp.from_json(out.read_text())
    assert (mdp.S, mdp.A, mdp.H) == (3, 2, 4)
    bad = _write(tmp_path, "bad.json", {"kind": "Chain", "S": 1, "H": 2})
    assert cli.main(["gen-env", "--spec", bad, "--out", str(out)]) == 2


def test_check_oracles(tmp_path):
    out = tmp_path / "report.json"
    assert cli.main(["check", "--suite", "oracles", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert all(v["pass"] for v in report.values())
    assert set(report["occupancy_equivalence"]) == {"pass", "lhs", "rhs", "details"}


def test_check_failure_exit_code(monkeypatch):
    import trajfb.checks

    monkeypatch.setattr(trajfb.checks, "run_suite", lambda name: {"x": {"pass": False, "lhs": 1.0, "rhs": 0.0,
                                                                      "details": {}}})
    assert cli.main(["check", "--suite", "oracles"]) == 4


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "trajfb.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("run", "summarize", "check", "gen-env"):
        assert sub in res.stdout


def test_unknown_suite_rejected():
    with pytest.raises(SystemExit) as exc:
        cli.main(["check", "--suite", "nope"])
    assert exc.value.code == 2
