"""End-to-end tests of the command-line interface (in-process)."""
import json
import os

import numpy as np

from resetting_lab.cli import main


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "simulate" in capsys.readouterr().out


def test_missing_subcommand_is_usage_error():
    assert main([]) == 2


def test_invalid_params_exit_code():
    assert main(["verify", "--suite", "identities", "--r", "-1"]) == 2
    assert main(["verify", "--suite", "nonsense"]) == 2


def test_simulate_writes_csv(tmp_path):
    out = tmp_path / "paths"
    ev = tmp_path / "events"
    ev.mkdir()
    rc = main(["simulate", "--kind", "ReflectedResetting", "--r", "2",
               "--T", "0.5", "--dt", "1e-3", "--paths", "2",
               "--seed", "3", "--out", str(out), "--events-out", str(ev)])
    assert rc == 0
    files = sorted(os.listdir(out))
    assert files == ["path_0000.csv", "path_0001.csv"]
    header, first = (out / files[0]).read_text().splitlines()[:2]
    assert header.split(",")[:2] == ["t", "x"]
    assert float(first.split(",")[0]) == 0.0
    evd = json.loads((ev / "events_0000.json").read_text())
    assert "reset_times" in evd


def test_reverse_writes_csv_and_events(tmp_path):
    out = tmp_path / "rev"
    rc = main(["reverse", "--r", "1", "--T", "0.5", "--dt", "1e-3",
               "--paths", "1", "--seed", "5", "--out", str(out)])
    assert rc == 0
    names = sorted(os.listdir(out))
    assert "xtilde_0000.csv" in names and "xtilde_events_0000.json" in names
    evd = json.loads((out / "xtilde_events_0000.json").read_text())
    assert "boundary_jumps" in evd


def test_pde_writes_table(tmp_path):
    out = tmp_path / "u.csv"
    rc = main(["pde", "--problem", "neumann", "--r", "1", "--T", "0.2",
               "--nx", "41", "--nt", "20", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,x,u"
    assert len(lines) == 1 + 21 * 41


def test_trace_writes_samples(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    rc = main(["trace", "--which", "oracle", "--r", "1", "--t", "0.5",
               "--paths", "500", "--seed", "1", "--out", str(out)])
    assert rc == 0
    vals = np.loadtxt(out, skiprows=1)
    assert vals.size == 500


def test_verify_identities_suite(tmp_path, capsys):
    out = tmp_path / "reports.jsonl"
    rc = main(["verify", "--suite", "identities", "--format", "json",
               "--out", str(out)])
    assert rc == 0
    lines = [json.loads(line) for line in out.read_text().splitlines()]
    summary = lines[-1]
    assert summary["summary"] is True and summary["failed"] == 0
    reports = lines[:-1]
    assert reports and all(rep["passed"] for rep in reports)
    names = {rep["name"] for rep in reports}
    assert "exponent_composition_identity" in names


def test_verify_table_output(capsys):
    rc = main(["verify", "--suite", "identities"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "[FAIL]" not in out
