import argparse
import csv
import io
import subprocess
import sys

import pytest

from noma_underlay import cli
from noma_underlay.montecarlo import point_seed


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_grid():
    assert cli.parse_grid("0:40:10") == [0.0, 10.0, 20.0, 30.0, 40.0]
    assert cli.parse_grid("20") == [20.0]
    assert cli.parse_grid("0:1:0.1")[-1] == 1.0
    for bad in ("10:0:5", "0:10:0", "a:b:c", "1:2"):
        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_grid(bad)


def test_sweep_csv_layout(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(["sweep", "--scenario", "IntICSI,PowIntOneBit", "--metric", "outage,sumrate",
                      "--i-db", "0:10:10", "--trials", "2000", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == cli.SWEEP_HEADER
    assert len(rows) == 1 + 2 * 2 * 2
    first = dict(zip(rows[0], rows[1]))
    assert first["seed"] == str(point_seed(1, 0, 0, 0, 0, 0))
    assert first["p_peak_db"] == ""
    assert all(r[rows[0].index("analytic_value")] for r in rows[1:])
    assert b"\r\n" not in out.read_bytes()


def test_sweep_without_simulation(capsys):
    code, out, _ = run(["sweep", "--i-db", "20", "--trials", "0"], capsys)
    assert code == 0
    row = dict(zip(cli.SWEEP_HEADER, out.splitlines()[1].split(",")))
    assert row["mc_mean"] == "" and row["trials"] == "0"


def test_sweep_quadrature_rows_are_labeled(capsys):
    code, out, _ = run(["sweep", "--scenario", "PowIntICSI", "--nn", "2", "--nf", "2", "--metric", "sumrate",
                        "--i-db", "20", "--trials", "0"], capsys)
    assert code == 0 and ",quadrature," in out


def test_config_file_and_override(capsys, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# test\nscenario = IntSCSI\ni-db = 5\ntrials = 0\nrate = 0.5\n")
    code, out, _ = run(["sweep", "--config", str(conf), "--rate", "1"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 2 and ",IntSCSI," in lines[1]
    bad = tmp_path / "bad.conf"
    bad.write_text("colour = blue\n")
    with pytest.raises(SystemExit):
        cli.main(["sweep", "--config", str(bad)])


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--an", "0.6"],
        ["sweep", "--metric", "capacity"],
        ["sweep", "--delta", "1.5", "--scenario", "IntSCSI"],
        ["sweep", "--nn", "1,2", "--nf", "1,2,3"],
        ["sweep", "--rate", "-1"],
    ],
)
def test_bad_config_is_rejected(argv, capsys):
    code, _, err = run(argv + ["--trials", "0"], capsys)
    assert code == 2 and "error" in err


def test_unknown_scenario_is_a_usage_error():
    with pytest.raises(SystemExit):
        cli.main(["sweep", "--scenario", "Bogus"])


def test_infeasible_split_warns(capsys):
    code, _, err = run(["sweep", "--an", "0.45", "--rate", "1.5", "--i-db", "20", "--trials", "0"], capsys)
    assert code == 0 and "warning" in err


def test_debug_linear(capsys):
    _, _, err = run(["sweep", "--i-db", "0:20:20", "--trials", "0", "--debug-linear"], capsys)
    assert "I=0.0 dB -> 1.0 linear" in err
    assert "I=20.0 dB -> 100.0 linear" in err


def test_validate_passes_and_catches_injection(capsys):
    base = ["validate", "--scenario", "IntSCSI", "--metric", "outage", "--i-db", "10", "--trials", "200000"]
    code, _, err = run(base, capsys)
    assert code == 0, err
    code, _, err = run(base + ["--inject-omega-f-scale", "1.05"], capsys)
    assert code == 1
    assert "FAIL" in err


def test_optimize_an(capsys):
    code, out, _ = run(["optimize-an", "--scenario", "IntSCSI,PowIntICSI", "--i-db", "20"], capsys)
    assert code == 0
    assert "closed form (outage objective)" in out
    assert out.count("a_n* =") == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "noma_underlay", "sweep", "--i-db", "20", "--trials", "0"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("i_db,scenario")
