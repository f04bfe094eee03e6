import csv
import io
import subprocess
import sys

import pytest

import twrelay.experiments as experiments
from twrelay.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sweep_to_stdout(capsys):
    code, out, _ = run(["snr_sweep", "--trials", "1", "--methods", "dft", "--sweep", "1,10"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["sweep"] for r in rows] == ["1", "10"]
    assert {r["method"] for r in rows} == {"dft"}


def test_sweep_to_file_is_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        code, out, _ = run(["antenna_sweep", "--trials", "2", "--sweep", "2,3",
                            "--methods", "potdc,dft", "--seed", "7", "--out", str(p)], capsys)
        assert code == 0 and out == ""
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert len(paths[0].read_text().splitlines()) == 1 + 2 * 2 * 2


def test_config_file_overrides(tmp_path, capsys):
    cfg = tmp_path / "sys.cfg"
    cfg.write_text("# custom relay\nm_r = 2\np_tr = 2.0\n")
    _, base, _ = run(["snr_sweep", "--trials", "1", "--sweep", "1", "--methods", "dft"], capsys)
    code, custom, _ = run(["snr_sweep", "--trials", "1", "--sweep", "1", "--methods", "dft",
                           "--config", str(cfg)], capsys)
    assert code == 0 and custom != base


def test_segments_flag(capsys):
    code, out, _ = run(["snr_sweep", "--trials", "1", "--sweep", "1", "--segments", "4",
                        "--methods", "potdc,upper_bound"], capsys)
    assert code == 0
    ub = [r for r in csv.DictReader(io.StringIO(out)) if r["method"] == "upper_bound"][0]
    assert ub["iters"] == "4"


def test_solve(capsys):
    code, out, _ = run(["solve", "--seed", "3"], capsys)
    assert code == 0
    for key in ("relay matrix G", "sum_rate", "log_objective", "iterations", "upper_bound",
                "bound_gap", "rank_gap", "relay_power"):
        assert key in out
    power = float(out.split("relay_power")[1].split()[0])
    assert power == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("method", ["rages2d", "rages1d"])
def test_solve_rages(method, capsys):
    code, out, _ = run(["solve", "--method", method], capsys)
    assert code == 0 and f"method          {method}" in out


@pytest.mark.parametrize("argv", [["snr_sweep", "--methods", "magic"],
                                  ["snr_sweep", "--sweep", "a,b"],
                                  ["antenna_sweep", "--sweep", "2.5"],
                                  ["fig7"], []])
def test_bad_arguments_exit_with_usage_error(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_invalid_values_exit_two(tmp_path, capsys):
    code, _, _ = run(["snr_sweep", "--trials", "0"], capsys)
    assert code == 2
    code, _, _ = run(["solve", "--config", str(tmp_path / "missing.cfg")], capsys)
    assert code == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("m_r = 2.5\n")
    code, _, _ = run(["solve", "--config", str(bad)], capsys)
    assert code == 2


def test_exit_one_when_a_method_always_fails(monkeypatch, capsys):
    def broken(pm, **kwargs):
        raise ArithmeticError("boom")

    monkeypatch.setattr(experiments, "run_potdc", broken)
    code, out, _ = run(["snr_sweep", "--trials", "1", "--sweep", "1", "--methods", "potdc,dft"], capsys)
    assert code == 1
    assert "ArithmeticError" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "twrelay", "snr_sweep", "--trials", "1",
                           "--sweep", "1", "--methods", "dft"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("experiment,sweep,trial,method,")
