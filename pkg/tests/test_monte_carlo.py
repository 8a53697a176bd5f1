import math

import numpy as np
import pandas as pd
import pytest

from cognitiveqos.experiments.monte_carlo import (CSV_COLUMNS, GRID_KEYS,
                                                  SweepResult, aggregate,
                                                  cycles_vs_messages,
                                                  emit_csv, grid_points,
                                                  read_csv, run_monte_carlo,
                                                  run_seed, with_derived)
from cognitiveqos.experiments.trends import (DEFAULT_TRENDS,
                                             MIN_CORRELATION, TrendSpec,
                                             TrendStatus, assert_trends,
                                             check_trend, trend_report)
from cognitiveqos.helpers.config import Mode, SweepConfig
from cognitiveqos.visualization.sweep_plot import plot_metric, plot_sweep


def make_rows(*overrides):
    """
    Hand-made sweep rows; every row starts from the same defaults.
    """
    base = {"seed": 1, "n_cr": 5, "n_pu": 2, "threshold": 1e-9, "step": 2.0,
            "delay_max": 0, "mode": "cdma-eq", "cycles": 4,
            "messages_ok": 10, "messages_nogood": 2, "messages_pu": 3,
            "nccc": 40, "avg_power_mw": 50.0, "sum_log_rate": 55.0,
            "feasible": True}
    return pd.DataFrame([{**base, **row} for row in overrides],
                        columns=CSV_COLUMNS)


@pytest.fixture
def small_sweep():
    return SweepConfig(runs_per_point=2, n_cr=[3, 4], n_pu=1,
                       thresholds_mw=[1e-9], steps_mw=[2.0], delays=[0],
                       base_seed=5)


def test_grid_is_the_cross_product(small_sweep):
    config = small_sweep.model_copy(update={"delays": [0, 2]})
    points = grid_points(config)
    assert len(points) == 4
    assert {(p.n_cr, p.delay_max) for p in points} == \
        {(3, 0), (3, 2), (4, 0), (4, 2)}


def test_run_seeds_depend_on_base_and_index_only():
    assert run_seed(5, 0) == run_seed(5, 0)
    assert len({run_seed(5, index) for index in range(20)}) == 20
    assert run_seed(5, 1) != run_seed(6, 1)


def test_sweep_rows_and_csv(small_sweep, tmp_path):
    result = run_monte_carlo(small_sweep, progress=False)
    assert list(result.rows.columns) == CSV_COLUMNS
    assert len(result.rows) == 4
    # Common random numbers: both CR counts reuse the run seeds.
    by_point = result.rows.groupby("n_cr")["seed"].apply(list)
    assert by_point[3] == by_point[4]
    assert by_point[3] == [run_seed(5, 0), run_seed(5, 1)]
    assert (result.rows["mode"] == "cdma-eq").all()

    path = tmp_path / "out" / "sweep.csv"
    emit_csv(result, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 5

    reread = read_csv(path)
    assert reread.rows["seed"].tolist() == result.rows["seed"].tolist()
    assert reread.aggregates_consistent()
    np.testing.assert_allclose(
        reread.aggregates.to_numpy(dtype=float),
        result.aggregates.to_numpy(dtype=float), equal_nan=True)


def test_sweep_runs_keep_every_protocol_guarantee(small_sweep):
    # Anomalies cover the negotiation bound, PU caps and served SINRs.
    config = small_sweep.model_copy(update={"runs_per_point": 4,
                                            "delays": [0, 3]})
    result = run_monte_carlo(config, progress=False)
    assert len(result.rows) == 16
    assert result.anomalies == []


def test_sweep_is_reproducible(small_sweep):
    first = run_monte_carlo(small_sweep, progress=False)
    second = run_monte_carlo(small_sweep, progress=False)
    pd.testing.assert_frame_equal(first.rows, second.rows)


def test_aggregate_statistics():
    rows = make_rows({"cycles": 2, "avg_power_mw": 10.0},
                     {"cycles": 4, "avg_power_mw": float("nan"),
                      "feasible": False},
                     {"n_cr": 7, "cycles": 9})
    table = aggregate(rows)
    assert list(table.columns[:5]) == GRID_KEYS + ["runs"]
    first = table[table["n_cr"] == 5].iloc[0]
    assert first["runs"] == 2
    assert first["cycles_mean"] == pytest.approx(3.0)
    assert first["cycles_median"] == pytest.approx(3.0)
    assert first["cycles_std"] == pytest.approx(math.sqrt(2))
    assert first["avg_power_mw_mean"] == pytest.approx(10.0)
    assert first["messages_total_mean"] == pytest.approx(15.0)
    assert first["messages_per_cr_mean"] == pytest.approx(3.0)
    assert table[table["n_cr"] == 7].iloc[0]["runs"] == 1


def test_aggregates_consistency_detects_tampering():
    result = SweepResult.from_rows(make_rows({"cycles": 2}, {"cycles": 6}))
    assert result.aggregates_consistent()
    result.aggregates.loc[0, "cycles_mean"] = 5.0
    assert not result.aggregates_consistent()


def test_empty_rows_give_empty_aggregates():
    result = SweepResult.from_rows(pd.DataFrame(columns=CSV_COLUMNS))
    assert result.aggregates.empty
    assert result.aggregates_consistent()
    assert cycles_vs_messages(result).empty


def test_derived_message_columns():
    rows = with_derived(make_rows({"n_cr": 3, "messages_ok": 7}))
    assert rows.loc[0, "messages_total"] == 12
    assert rows.loc[0, "messages_per_cr"] == pytest.approx(4.0)


def test_cycles_vs_messages_side_by_side():
    result = SweepResult.from_rows(make_rows(
        {"n_cr": 3, "cycles": 2}, {"n_cr": 3, "cycles": 4},
        {"n_cr": 6, "cycles": 8}))
    table = cycles_vs_messages(result)
    assert table["n_cr"].tolist() == [3, 6]
    assert table["cycles"].tolist() == [3.0, 8.0]
    assert table["messages_total"].tolist() == [15.0, 15.0]


def test_csv_errors(tmp_path):
    with pytest.raises(OSError, match="missing.csv"):
        read_csv(tmp_path / "missing.csv")
    partial = tmp_path / "partial.csv"
    partial.write_text("seed,n_cr\n1,3\n", encoding="utf-8")
    with pytest.raises(ValueError, match="lacks columns"):
        read_csv(partial)


def threshold_sweep(powers):
    return SweepResult.from_rows(make_rows(*[
        {"threshold": threshold, "avg_power_mw": power}
        for threshold, power in zip([1e-10, 1e-9, 1e-8], powers)]))


def test_rising_trend_passes():
    spec = TrendSpec("power rises", "avg_power_mw", "threshold", 1)
    check = check_trend(threshold_sweep([10.0, 20.0, 30.0]), spec)
    assert check.status is TrendStatus.PASS
    assert check.rho == pytest.approx(1.0)
    assert check.medians == (10.0, 20.0, 30.0)


def test_reversed_trend_fails():
    spec = TrendSpec("power rises", "avg_power_mw", "threshold", 1)
    check = check_trend(threshold_sweep([30.0, 20.0, 10.0]), spec)
    assert check.status is TrendStatus.FAIL


def test_correlation_exactly_at_the_bound_passes():
    rows = make_rows(*[{"n_cr": n_cr, "cycles": cycles}
                       for n_cr, cycles in zip([7, 10, 15, 20], [1, 2, 4, 3])])
    spec = TrendSpec("cycles rise", "cycles", "n_cr", 1)
    check = check_trend(SweepResult.from_rows(rows), spec)
    assert check.rho == pytest.approx(MIN_CORRELATION)
    assert check.status is TrendStatus.PASS


def test_infeasible_points_are_dropped_before_ranking():
    spec = TrendSpec("power rises", "avg_power_mw", "threshold", 1)
    check = check_trend(threshold_sweep([float("nan"), 20.0, 30.0]), spec)
    assert check.status is TrendStatus.SKIPPED


def test_flat_trend_passes_only_when_allowed():
    rows = make_rows(*[{"delay_max": delay} for delay in (0, 2, 4)])
    result = SweepResult.from_rows(rows)
    strict = TrendSpec("nccc grows", "nccc", "delay_max", 1)
    lenient = TrendSpec("nccc grows", "nccc", "delay_max", 1,
                        allow_flat=True)
    assert check_trend(result, strict).status is TrendStatus.FAIL
    flat = check_trend(result, lenient)
    assert flat.status is TrendStatus.PASS
    assert math.isnan(flat.rho)


def test_trend_spec_direction_is_validated():
    with pytest.raises(ValueError):
        TrendSpec("bad", "cycles", "n_cr", 0)


def test_default_trends_report():
    checks = assert_trends(threshold_sweep([10.0, 20.0, 30.0]))
    assert len(checks) == len(DEFAULT_TRENDS)
    statuses = {check.spec.name: check.status for check in checks}
    assert statuses["power rises with threshold"] is TrendStatus.PASS
    assert statuses["cycles rise with CR count"] is TrendStatus.SKIPPED
    report = trend_report(checks)
    assert report.splitlines()[0].startswith("trend")
    assert "power rises with threshold" in report


def test_plots_only_for_swept_axes(tmp_path):
    result = threshold_sweep([10.0, 20.0, 30.0])
    paths = plot_sweep(result, tmp_path / "plots")
    names = sorted(path.name for path in paths)
    assert names == ["avg_power_mw_vs_threshold.svg",
                     "cycles_vs_threshold.svg",
                     "messages_per_cr_vs_threshold.svg"]
    assert all(path.stat().st_size > 0 for path in paths)
    assert "<svg" in paths[0].read_text(encoding="utf-8")


def test_single_plot_by_cr_count(tmp_path):
    result = SweepResult.from_rows(make_rows(
        {"n_cr": 3, "cycles": 2}, {"n_cr": 6, "cycles": 5}))
    path = plot_metric(result, "cycles", "n_cr", tmp_path)
    assert path == tmp_path / "cycles_vs_n_cr.svg"
    assert path.exists()


def test_empty_sweep_plots_nothing(tmp_path):
    result = SweepResult.from_rows(pd.DataFrame(columns=CSV_COLUMNS))
    assert plot_sweep(result, tmp_path) == []


@pytest.mark.slow
@pytest.mark.parametrize("mode", list(Mode))
def test_full_scale_sweep(mode):
    config = SweepConfig(runs_per_point=5, n_cr=[7, 10, 15, 20],
                         thresholds_mw=[2e-10, 5e-10, 1e-9, 2e-9, 5e-9],
                         mode=mode, base_seed=1)
    result = run_monte_carlo(config, progress=False)
    assert result.aggregates_consistent()
    assert len(result.rows) == 4 * 5 * 5
    assert (result.aggregates["runs"] == 5).all()
    assert result.anomalies == []
    checks = assert_trends(result)
    assert len(checks) == len(DEFAULT_TRENDS)
    failed = [check.spec.name for check in checks
              if check.status is TrendStatus.FAIL]
    assert not failed


@pytest.mark.slow
def test_worker_pool_gives_the_same_rows(small_sweep):
    serial = run_monte_carlo(small_sweep, progress=False)
    pooled = run_monte_carlo(small_sweep.model_copy(update={"workers": 2}),
                             progress=False)
    pd.testing.assert_frame_equal(serial.rows, pooled.rows)


def test_empty_result_writes_only_the_header(tmp_path):
    path = tmp_path / "empty.csv"
    emit_csv(SweepResult.from_rows(pd.DataFrame(columns=CSV_COLUMNS)), path)
    assert path.read_text(encoding="utf-8").splitlines() == \
        [",".join(CSV_COLUMNS)]


def test_unwritable_csv_names_the_path(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    with pytest.raises(OSError, match="blocker"):
        emit_csv(threshold_sweep([1.0, 2.0, 3.0]), blocker / "sweep.csv")


@pytest.mark.slow
def test_delays_do_not_lower_messages_or_nccc():
    config = SweepConfig(runs_per_point=20, n_cr=[7], n_pu=2,
                         thresholds_mw=[1e-9], steps_mw=[2.0],
                         delays=[0, 2, 4], base_seed=3)
    result = run_monte_carlo(config, progress=False)
    delay_trends = [spec for spec in DEFAULT_TRENDS
                    if spec.axis == "delay_max"]
    assert len(delay_trends) == 2
    for spec in delay_trends:
        assert check_trend(result, spec).status is TrendStatus.PASS
