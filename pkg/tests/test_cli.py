import json
import subprocess
import sys
from pathlib import Path

import pytest

from mobigrid.cli import EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK, EXIT_RESOURCE, main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, "--json", *argv)
    return code, json.loads(out) if out else None, err


def test_route_identity(capsys):
    code, doc, _ = run_json(capsys, "route", "ieee14-demo", "--from", 2, "--to", 2)
    assert code == EXIT_OK
    assert doc["route"]["cost"] == 0 and doc["route"]["edges"] == []


def test_route_diamond(capsys):
    code, out, _ = run(capsys, "route", DATA / "diamond.transport", "--from", 1, "--to", 4)
    assert code == EXIT_OK
    assert "cost  5" in out and "1 -> 3 -> 4" in out
    code, doc, _ = run_json(capsys, "route", DATA / "diamond.transport", "--from", 1, "--to", 4,
                            "--method", "dijkstra")
    assert doc["route"]["edges"] == [[1, 3], [3, 4]]


def test_route_cut_off(capsys):
    code, out, _ = run(capsys, "route", DATA / "diamond.transport", "--from", 1, "--to", 4,
                       "--close", "2-4", "--close", "3-4")
    assert code == EXIT_INFEASIBLE
    assert "no route" in out


def test_route_input_errors(capsys):
    assert run(capsys, "route", DATA / "diamond.transport", "--from", 1, "--to", 9)[0] == EXIT_INPUT
    assert run(capsys, "route", DATA / "diamond.transport", "--from", 1, "--to", 4,
               "--close", "4-1")[0] == EXIT_INPUT
    assert run(capsys, "route", "missing.scenario", "--from", 1, "--to", 2)[0] == EXIT_INPUT


def test_dispatch_reports_reduction(capsys):
    code, out, _ = run(capsys, "dispatch", "ieee14-demo")
    assert code == EXIT_OK
    assert "cost reduction" in out
    code, doc, _ = run_json(capsys, "dispatch", "ieee14-demo")
    assert doc["reduction_percent"] > 0
    assert len(doc["vehicles"]) == 3


def test_dispatch_baseline_has_no_vehicles(capsys):
    code, out, _ = run(capsys, "dispatch", "--baseline", "ieee14-demo")
    assert code == EXIT_OK
    assert "fleet" not in out
    code, doc, _ = run_json(capsys, "dispatch", "ieee14-demo", "--baseline")
    assert doc["vehicles"] == [] and doc["kind"] == "baseline"


def test_dispatch_infeasible(capsys):
    code, out, err = run(capsys, "dispatch", DATA / "overload.scenario")
    assert code == EXIT_INFEASIBLE
    assert "infeasible" in err and "grid" in err


def test_dispatch_with_config_and_closures(capsys):
    code, doc, _ = run_json(capsys, "dispatch", DATA / "onevehicle.scenario",
                            "--config", DATA / "loose.config")
    assert code == EXIT_OK
    assert doc["objective"] == pytest.approx(250)
    code, doc, _ = run_json(capsys, "dispatch", DATA / "onevehicle.scenario", "--close", "1-2")
    assert code == EXIT_OK


def test_verify(capsys):
    code, doc, _ = run_json(capsys, "verify", DATA / "empty.scenario")
    assert code == EXIT_OK and doc["relative_gap"] == 0.0
    code, doc, _ = run_json(capsys, "verify", DATA / "onevehicle.scenario")
    assert code == EXIT_OK and doc["enumerated_lps"] == 3 and doc["passed"]
    code, out, _ = run(capsys, "verify", DATA / "onevehicle.scenario")
    assert "3 LPs" in out and "PASS" in out


def test_verify_cap(capsys):
    code, _, err = run(capsys, "verify", "ieee14-demo", "--cap", 100)
    assert code == EXIT_RESOURCE
    assert "cap" in err


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", DATA / "onevehicle.scenario", DATA / "empty.scenario",
                       "--repeats", 3)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[1].split() == ["Case", "Min", "Median", "Max"]
    assert [ln.split()[0] for ln in lines[2:]] == ["onevehicle", "empty"]
    code, doc, _ = run_json(capsys, "bench", DATA / "onevehicle.scenario", "--repeats", 5)
    row = doc["rows"][0]
    assert len(row["times"]) == 5
    assert row["min"] <= row["median"] <= row["max"]


def test_bench_missing_case(capsys):
    assert run(capsys, "bench", "nowhere.scenario")[0] == EXIT_INPUT
    assert run(capsys, "bench", DATA / "empty.scenario", "--repeats", 0)[0] == EXIT_INPUT


def test_dispatch_is_deterministic(capsys):
    docs = []
    for _ in range(2):
        _, doc, _ = run_json(capsys, "dispatch", "ieee14-demo")
        doc["stats"].pop("wall_time")
        docs.append(doc)
    assert docs[0] == docs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mobigrid", "route", str(DATA / "diamond.transport"),
                           "--from", "1", "--to", "4", "--json"],
                          capture_output=True, text=True, env={"MOBIGRID_LOG": "debug", "PATH": ""})
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["route"]["cost"] == 5
    assert "DEBUG" in proc.stderr
