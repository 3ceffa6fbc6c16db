import csv
import io
import json
import pathlib
import subprocess
import sys

import pytest

from harmonic_chain import cli, scenarios
from harmonic_chain.errors import NumericalError

GOLDEN = pathlib.Path(__file__).parent / "golden" / "covariance_table_K8_nu0.csv"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_covariance_table_matches_golden(capsys):
    code, out, err = run(capsys, "covariance-table", "--n-max", "8")
    assert code == 0
    got = {(int(r["m"]), int(r["n"])): float(r["value"])
           for r in csv.DictReader(io.StringIO(out)) if r["method"] == "time_domain"}
    with open(GOLDEN) as fh:
        gold = {(int(r["m"]), int(r["n"])): float(r["value"]) for r in csv.DictReader(fh)}
    assert got.keys() == gold.keys()
    for key, v in gold.items():
        assert got[key] == pytest.approx(v, abs=1e-7), key
    assert "[PASS] nearest_neighbour_is_half" in err


def test_fixed_point_reports_both_patterns(capsys):
    code, out, _ = run(capsys, "scenario", "fixed-point", "--format", "json")
    assert code == 0
    rows = dict(json.loads(out)["tables"]["fixed_point"]["rows"])
    assert rows == {"odd-sites": 0.0, "even-sites": 1.0}


def test_failing_check_exits_one(capsys):
    code, _, err = run(capsys, "scenario", "basin-decay")
    assert code == 1
    assert "[FAIL]" in err


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["scenario", "no-such-thing"])
    assert exc.value.code == 2
    code, _, err = run(capsys, "scenario", "periodic", "--set", "bogus=1")
    assert code == 2 and "bogus" in err
    code, _, err = run(capsys, "scenario", "periodic", "--set", "z=abc")
    assert code == 2 and "z" in err
    code, _, err = run(capsys, "simulate", "--n", "4", "--dt", "2", "--t-final", "1")
    assert code == 2 and "dt" in err


def test_numerical_error_exits_three(capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise NumericalError("not positive semidefinite")
    monkeypatch.setattr(scenarios, "run_scenario", boom)
    code, _, err = run(capsys, "scenario", "periodic")
    assert code == 3 and "semidefinite" in err


def test_config_file_and_override(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text("[periodic]\nz = 0.25\nsites = 4\n")
    code, out, _ = run(capsys, "scenario", "periodic", "--config", str(ini),
                       "--set", "sites=5", "--format", "json")
    assert code == 0
    cfg = json.loads(out)["config"]
    assert cfg == {"z": 0.25, "sites": 5}


def test_out_file_and_determinism(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run(capsys, "simulate", "--n", "8", "--t-final", "1", "--dt", "0.25",
                   "--trajectories", "40", "--seed", "3", "--out", str(p))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_sample_rows(capsys):
    code, out, _ = run(capsys, "sample", "--n", "3", "--count", "4", "--seed", "2")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["draw", "a1", "a2", "a3"] and len(rows) == 5


def test_describe_every_scenario(capsys):
    for name in scenarios.DEFAULTS:
        code, out, _ = run(capsys, "scenario", name, "--describe")
        assert code == 0 and out.strip()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "harmonic_chain", "scenario", "fixed-point"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("scenario,table,key1,key2,value")
