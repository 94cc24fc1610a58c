import csv
import io
import math
import subprocess
import sys

import pytest

from quasilab.cli import main

SMALL = ["--n-grid", "8,16,32", "--budget", "100"]


def _csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_verify_passes(capsys):
    assert main(["verify", "--budget", "200"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "invariants passed" in out


def test_verify_zero_tolerance_fails(capsys):
    assert main(["verify", "--budget", "200", "--tol", "all=0"]) == 1
    assert "FAIL" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["verify", "--p", "-1"],
    ["verify", "--tol", "bogus=1"],
    ["verify", "--tol", "abs"],
    ["report", "nosuch"] + SMALL,
    ["report", "ribe", "--n-grid", "8,x"],
    ["report", "ribe", "--n-grid", "8,16"],
    ["lemma-w", "--grid-step", "0"],
    ["derivation", "--n-grid", "1,4"],
    ["frobnicate"],
    ["verify", "--budget", "0"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_report_columns_and_stability(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["report", "ribe", "--out", str(a)] + SMALL) == 0
    assert main(["report", "ribe", "--out", str(b)] + SMALL) == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()
    rows = _csv(a.read_text())
    assert list(rows[0]) == ["n", "norm_est", "q_lb", "q_ub", "dist_lb", "classification", "notes", "seed"]
    assert [int(r["n"]) for r in rows] == [8, 16, 32]
    assert float(rows[0]["dist_lb"]) == pytest.approx(0.5, rel=1e-9)
    assert "classification:" in capsys.readouterr().out


def test_report_stdout_keeps_csv_clean(capsys):
    assert main(["report", "linear"] + SMALL) == 0
    cap = capsys.readouterr()
    assert cap.out.startswith("n,norm_est")
    assert "classification:" in cap.err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample config\nseed = 5\nbudget = 50\nn-grid = 8,16,32\n")
    assert main(["report", "kp", "--config", str(cfg)]) == 0
    rows = _csv(capsys.readouterr().out)
    assert {r["seed"] for r in rows} == {"5"}
    assert main(["report", "kp", "--config", str(cfg), "--seed", "6"]) == 0
    assert {r["seed"] for r in _csv(capsys.readouterr().out)} == {"6"}


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert main(["verify", "--config", str(bad)]) == 2
    bad.write_text("no equals sign\n")
    assert main(["verify", "--config", str(bad)]) == 2
    assert main(["verify", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_lemma_w(capsys):
    assert main(["lemma-w", "--grid-step", "0.01"]) == 0
    row = _csv(capsys.readouterr().out)[0]
    assert float(row["max_ratio"]) == pytest.approx(math.log(2), abs=1e-9)
    assert row["exceed_count"] == "0"


def test_lemma_w_degenerate_grid(capsys):
    assert main(["lemma-w", "--lo", "0", "--hi", "0"]) == 1


def test_derivation(capsys):
    assert main(["derivation", "--n-grid", "16,256", "--budget", "50", "--m", "4"]) == 0
    rows = _csv(capsys.readouterr().out)
    assert list(rows[0]) == ["n", "defect_measured", "defect_closed_form", "variant_defect",
                             "idempotent_decay", "seed"]
    for r in rows:
        n = int(r["n"])
        assert float(r["defect_measured"]) == pytest.approx(2 * math.log(2) / math.log(n), rel=1e-9)
        assert float(r["idempotent_decay"]) == pytest.approx(math.log(4) / math.log(n), rel=1e-9)
        assert float(r["variant_defect"]) <= 1e-12


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "quasilab", "lemma-w", "--grid-step", "0.1"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.startswith("grid_step,")
