import logging
import subprocess
import sys

import pytest

from pressure_match import cli
from pressure_match.analytics import rank_loss
from pressure_match.model import ModelParams
from pressure_match.report import parse_table_csv
from pressure_match.validation import Check, ValidationReport


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in ("ALPHA", "ENGINE", "FORMAT", "PRECISION", "CONFIG", "SEED", "TRIALS", "OUTPUT", "WORKERS"):
        monkeypatch.delenv(cli.ENV_PREFIX + key, raising=False)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_table_markdown(capsys):
    code, out, _ = run(capsys, "table")
    assert code == 0
    assert "| U.S. | 0.5 | 0.3 | 10 | 0.3232 | 0.1024 | 0.7740 | 2.5588 | 0.4829 | 0.0485 | 0.0704 |" in out
    assert "| Japan (L=4) |" in out


def test_table_csv_with_oracle(capsys):
    code, out, _ = run(capsys, "table", "--format", "csv", "--engine", "oracle", "--precision", "full")
    assert code == 0
    rows = parse_table_csv(out)
    assert [r["engine"] for r in rows] == ["oracle"] * 3
    assert rows[1]["RL"] == pytest.approx(0.2053, abs=2e-3)


def test_table_infeasible_alpha(capsys, caplog):
    with caplog.at_level(logging.WARNING, logger="pressure_match"):
        code, out, _ = run(capsys, "table", "--alpha", "0.4", "--format", "csv")
    assert code == 0
    assert out.count("infeasible") == 3
    assert "exceeds a/2" in caplog.text


def test_table_from_file_and_empty_file(tmp_path, capsys, caplog):
    path = tmp_path / "obs.csv"
    path.write_text("market,P1,P2,L\nMine,0.6,0.4,5\n")
    code, out, _ = run(capsys, "table", str(path))
    assert code == 0 and "| Mine |" in out
    empty = tmp_path / "empty.csv"
    empty.write_text("market,P1,P2,L\n")
    with caplog.at_level(logging.WARNING, logger="pressure_match"):
        code, out, _ = run(capsys, "table", str(empty))
    assert code == 0
    assert len(out.strip().splitlines()) == 2
    assert "no observations" in caplog.text


def test_bad_input_exits_2(tmp_path, capsys):
    path = tmp_path / "obs.csv"
    path.write_text("market,P1,P2,L\nFlat,0.4,0.5,3\n")
    code, _, err = run(capsys, "table", str(path))
    assert code == 2
    assert "obs.csv:2:" in err and "no first-rank premium" in err
    assert run(capsys, "table", str(tmp_path / "missing.csv"))[0] == 2
    assert run(capsys, "table", "--engine", "abacus")[0] == 2
    assert run(capsys, "table", "--precision", "many")[0] == 2
    assert run(capsys, "simulate", "--a", "0.5")[0] == 2
    assert run(capsys, "sweep", "e", "--start", "0", "--stop", "1")[0] == 2


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["sweep", "bogus", "--start", "0", "--stop", "1"])
    assert info.value.code == 2


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "e", "--start", "0", "--stop", "1", "--steps", "5", "--a", "0.3232", "--L", "10")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "e,a,L,P1,P2,P1_minus_P2,RL,Q_lower,QL"
    assert len(lines) == 6
    assert lines[3].startswith("0.5,")


def test_sweep_with_market(capsys):
    code, out, _ = run(capsys, "sweep", "alpha", "--start", "0.1", "--stop", "0.3", "--steps", "3", "--market", "U.S.")
    assert code == 0
    assert out.strip().splitlines()[-1].split(",")[2:] == ["False", "infeasible", "infeasible"]


def test_rates_with_calibration(tmp_path, capsys):
    path = tmp_path / "counts.csv"
    path.write_text("market,applicants,rank,matched,unmatched_at_length\nJP,100,1,70,10\nJP,100,2,10,0\n")
    code, out, _ = run(capsys, "rates", str(path), "--calibrate", "--L", "3", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "market,rank,rate,formula,L,a,e"
    assert lines[2].startswith("JP,2,0.5000,exact,3,0.5783,0.2707")
    assert run(capsys, "rates", str(path), "--calibrate")[0] == 2


def test_simulate_compare(capsys):
    code, out, _ = run(
        capsys, "simulate", "--market", "Japan (L=3)", "--trials", "50000", "--format", "csv", "--precision", "full"
    )
    assert code == 0 and out.startswith("statistic,mean,std_error,n,low_confidence\n")
    code, out, _ = run(capsys, "simulate", "--a", "0.5", "--e", "0.4", "--L", "3", "--trials", "50000", "--compare", "--format", "csv", "--precision", "full")
    rows = {line.split(",")[0]: line.split(",") for line in out.strip().splitlines()[1:]}
    assert float(rows["RL"][5]) == pytest.approx(rank_loss(ModelParams(3, 0.5, 0.4)), abs=1e-12)
    assert abs(float(rows["RL"][6])) < 4


def test_validate_exit_codes(capsys, monkeypatch):
    code, out, _ = run(capsys, "validate", "--max-L", "4", "--grid-density", "3", "--trials", "20000")
    assert code == 0 and "PASSED" in out
    failing = ValidationReport([Check("analytic-vs-oracle", "RL", 1.0, 1e-12)])
    monkeypatch.setattr(cli, "run_validation", lambda **kw: failing)
    code, out, _ = run(capsys, "validate")
    assert code == 1 and "FAIL" in out
    assert run(capsys, "validate", "--max-L", "40")[0] == 2


def test_precedence(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "pm.cfg"
    cfg.write_text("alpha = 0.4\nprecision = 2\n")
    _, out, _ = run(capsys, "table", "--config", str(cfg), "--format", "csv")
    assert "infeasible" in out and ",0.77," in out
    monkeypatch.setenv("PRESSURE_MATCH_ALPHA", "0.1")
    _, out, _ = run(capsys, "table", "--config", str(cfg), "--format", "csv")
    assert "infeasible" not in out and ",0.1," in out
    _, out, _ = run(capsys, "table", "--config", str(cfg), "--format", "csv", "--alpha", "0.4")
    assert "infeasible" in out
    monkeypatch.setenv("PRESSURE_MATCH_CONFIG", str(cfg))
    monkeypatch.delenv("PRESSURE_MATCH_ALPHA")
    _, out, _ = run(capsys, "table", "--format", "csv")
    assert "infeasible" in out


def test_malformed_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this line has no separator\n")
    assert run(capsys, "table", "--config", str(cfg))[0] == 2


def test_output_file(tmp_path, capsys):
    target = tmp_path / "table.md"
    code, out, _ = run(capsys, "table", "--output", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("| market |")


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "pressure_match", "sweep", "alpha", "--start", "0.1", "--stop", "0.2", "--steps", "2", "--a", "0.5"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "alpha,a,feasible,epsilon,PRL_alpha"
