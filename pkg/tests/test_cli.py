import json

import pytest

from cognitiveqos.algorithms.simulation import RunOutcome
from cognitiveqos.helpers.oracle import OracleCase
from cognitiveqos.helpers.scenario_io import dump_scenario
from main import EXIT_ERROR, EXIT_INFEASIBLE, EXIT_OK, main


@pytest.fixture
def scenario_file(make_scenario, tmp_path):
    def write(thresholds):
        path = tmp_path / "scenario.json"
        dump_scenario(make_scenario([[1.0, 0.1], [0.1, 1.0]], thresholds),
                      path)
        return path
    return write


def test_solve_writes_a_result(scenario_file, tmp_path, capsys):
    out = tmp_path / "results"
    code = main(["solve", "--scenario", str(scenario_file([5.0, 5.0])),
                 "--out", str(out), "--seed", "4"])
    assert code == EXIT_OK
    data = json.loads((out / "result_cdma-eq_seed4.json").read_text(
        encoding="utf-8"))
    assert data["feasible"] is True
    assert data["powers_mw"] == {"1": 100.0, "2": 100.0}
    printed = capsys.readouterr().out
    assert "CR1: power 100.000 mW" in printed


def test_solve_reports_infeasible_scenarios(scenario_file, tmp_path):
    code = main(["solve", "--scenario", str(scenario_file([9.5, 9.5])),
                 "--out", str(tmp_path)])
    assert code == EXIT_INFEASIBLE
    data = json.loads((tmp_path / "result_cdma-eq_seed0.json").read_text(
        encoding="utf-8"))
    assert data["avg_power_mw"] is None


def test_solve_with_trace_writes_the_log(scenario_file, tmp_path):
    code = main(["solve", "--scenario", str(scenario_file([5.0, 5.0])),
                 "--out", str(tmp_path), "--trace"])
    assert code == EXIT_OK
    lines = (tmp_path / "result_cdma-eq_seed0.trace").read_text(
        encoding="utf-8").splitlines()
    assert lines[0] == "# 0 phase: pu_negotiation"


def test_generated_scenario_in_stdma_mode(tmp_path):
    code = main(["solve", "--n-cr", "3", "--n-pu", "1", "--mode", "stdma",
                 "--out", str(tmp_path)])
    assert code in (EXIT_OK, EXIT_INFEASIBLE)
    assert (tmp_path / "result_stdma_seed0.json").exists()


def test_missing_files_are_errors(tmp_path, capsys):
    assert main(["solve", "--scenario", str(tmp_path / "none.json"),
                 "--out", str(tmp_path)]) == EXIT_ERROR
    assert "none.json" in capsys.readouterr().err
    assert main(["solve", "--config", str(tmp_path / "none.json")]) == \
        EXIT_ERROR


def test_invalid_flags_are_errors(tmp_path, capsys):
    assert main(["solve", "--n-cr", "0", "--out", str(tmp_path)]) == \
        EXIT_ERROR
    assert "n_cr" in capsys.readouterr().err
    assert main(["solve", "--mode", "fdma"]) == EXIT_ERROR
    assert main([]) == EXIT_ERROR


@pytest.mark.parametrize("name, last", [("pair", "outcome: solved"),
                                        ("triangle",
                                         "outcome: no_solution")])
def test_trace_of_toy_instances(name, last, capsys):
    assert main(["trace", "--instance", name]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines
    assert lines[-1].endswith(last)


def test_validate_command(capsys):
    assert main(["validate", "--n", "5", "--n-multi", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    rows = {line.split()[0]: line.split()[1:] for line in out.splitlines()}
    assert rows["single"] == ["5", "5"]
    assert rows["multi"] == ["2", "2"]


def test_sweep_command(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text('{"sweep": {"n_cr": [2, 3], "n_pu": 1, '
                      '"thresholds_mw": [1e-9], "runs_per_point": 2}}',
                      encoding="utf-8")
    code = main(["sweep", "--config", str(config), "--out", str(tmp_path),
                 "--no-progress", "--seed", "2"])
    assert code == EXIT_OK
    csv = tmp_path / "sweep_cdma-eq_seed2.csv"
    assert len(csv.read_text(encoding="utf-8").splitlines()) == 5
    assert (tmp_path / "cycles_vs_n_cr.svg").exists()
    assert "power rises with threshold" in capsys.readouterr().out


def test_validate_without_instances_passes_vacuously(capsys):
    assert main(["validate", "--n", "0", "--n-multi", "0"]) == EXIT_OK


def test_validate_fails_on_a_mismatch(monkeypatch, capsys):
    broken = OracleCase(0, "single", 11, True, RunOutcome.NO_SOLUTION,
                        False)
    monkeypatch.setattr("main.validate", lambda *args: [broken])
    assert main(["validate", "--n", "1", "--n-multi", "0"]) == EXIT_ERROR
    assert "FAIL single #0" in capsys.readouterr().out


def test_trace_is_deterministic_per_seed(capsys):
    args = ["trace", "--instance", "triangle", "--seed", "3",
            "--delay-max", "2"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
