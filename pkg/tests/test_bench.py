import dataclasses

import pytest

from binsched import (
    CSV_HEADER,
    NON_TERMINATION_FLAG,
    BenchConfig,
    BenchRow,
    Experiment,
    SchedulerKind,
    Site,
    aggregate_rows,
    render_rows,
    report,
    rows_from_csv,
    rows_to_csv,
    run_benchmark,
    sweep_points,
)


def small_config(**overrides):
    defaults = dict(
        experiment=Experiment.BASELINE,
        n_txns_values=(20, 40),
        dependency_pct_values=(0.0,),
        schedulers=(SchedulerKind.SERIAL, SchedulerKind.LOCKFREE),
        num_threads=2,
        repetitions=2,
        base_seed=5,
    )
    defaults.update(overrides)
    return BenchConfig(**defaults)


def synthetic_row(**overrides):
    base = dict(
        scheduler="lockfree",
        n_txns=600,
        dependency_pct=40.0,
        cp1=40.0,
        cp2=120.0,
        cp3=60.0,
        num_threads=8,
        delayed_pct=0.0,
        crashed_pct=0.0,
        exec_time_s=1.0,
        throughput_tps=600.0,
        num_bins=12,
        phase1_s=0.2,
        phase2_s=0.1,
        exec_stage_s=0.7,
        seed=1,
        rep=0,
    )
    base.update(overrides)
    return BenchRow(**base)


# --- sweeps and row arithmetic ---------------------------------------------------


def test_baseline_sweep_points():
    config = small_config(n_txns_values=(200, 400), dependency_pct_values=(0.0, 40.0))
    assert sweep_points(config) == [
        (200, 0.0, 0.0, 0.0),
        (200, 40.0, 0.0, 0.0),
        (400, 0.0, 0.0, 0.0),
        (400, 40.0, 0.0, 0.0),
    ]


def test_latency_sweep_points():
    config = small_config(
        experiment=Experiment.LATENCY,
        n_txns_values=(600,),
        delayed_pct_values=(0.0, 20.0, 40.0),
    )
    assert sweep_points(config) == [(600, 0.0, 0.0, 0.0), (600, 0.0, 20.0, 0.0), (600, 0.0, 40.0, 0.0)]


def test_crash_sweep_points():
    config = small_config(
        experiment=Experiment.CRASH,
        schedulers=(SchedulerKind.LOCKFREE,),
        crashed_pct_values=(0.0, 80.0),
    )
    assert sweep_points(config) == [(20, 0.0, 0.0, 0.0), (20, 0.0, 0.0, 80.0), (40, 0.0, 0.0, 0.0), (40, 0.0, 0.0, 80.0)]


def test_row_count_arithmetic():
    config = small_config()
    rows = run_benchmark(config)
    assert len(rows) == len(sweep_points(config)) * len(config.schedulers) * config.repetitions


def test_rows_arrive_incrementally():
    seen = []
    rows = run_benchmark(small_config(n_txns_values=(10,), repetitions=1), on_row=seen.append)
    assert seen == rows


def test_throughput_times_exec_time_is_n():
    rows = run_benchmark(small_config(n_txns_values=(30,), repetitions=1))
    for row in rows:
        assert row.throughput_tps * row.exec_time_s == pytest.approx(row.n_txns, rel=1e-9)


def test_crash_experiment_restricted_to_lockfree():
    with pytest.raises(ValueError):
        small_config(experiment=Experiment.CRASH, schedulers=(SchedulerKind.STANDARD,))


def test_crash_experiment_runs_with_dead_threads_excluded():
    config = small_config(
        experiment=Experiment.CRASH,
        schedulers=(SchedulerKind.LOCKFREE,),
        n_txns_values=(40,),
        crashed_pct_values=(50.0,),
        num_threads=4,
        repetitions=1,
        crash_point=Site.PHASE1_PRE_PUBLISH,
    )
    rows = run_benchmark(config)
    assert len(rows) == 1
    assert rows[0].crashed_pct == 50.0
    assert not rows[0].flags


def test_watchdog_produces_non_termination_rows():
    # delays large enough that the run cannot beat the watchdog
    config = small_config(
        experiment=Experiment.LATENCY,
        schedulers=(SchedulerKind.STANDARD,),
        n_txns_values=(40,),
        delayed_pct_values=(100.0,),
        delay_s=0.05,
        num_threads=4,
        repetitions=1,
        watchdog_secs=0.3,
    )
    rows = run_benchmark(config)
    assert len(rows) == 1
    assert rows[0].flags == NON_TERMINATION_FLAG
    assert rows[0].exec_time_s == 0.3


# --- CSV round trip -----------------------------------------------------------------


def test_csv_header_is_bit_exact():
    text = rows_to_csv([])
    assert text.splitlines()[0] == CSV_HEADER


def test_csv_round_trip_on_real_rows():
    rows = run_benchmark(small_config(n_txns_values=(25,), repetitions=1))
    assert rows_from_csv(rows_to_csv(rows)) == rows


def test_csv_round_trip_on_awkward_floats():
    rows = [synthetic_row(exec_time_s=1 / 3, throughput_tps=0.1 + 0.2, flags="NON_TERMINATION")]
    assert rows_from_csv(rows_to_csv(rows)) == rows


def test_csv_rejects_foreign_header():
    with pytest.raises(ValueError):
        rows_from_csv("a,b,c\n1,2,3\n")


# --- aggregation ------------------------------------------------------------------------


def test_three_reps_collapse_to_one_median_row():
    rows = [
        synthetic_row(rep=0, exec_time_s=1.0, throughput_tps=600.0),
        synthetic_row(rep=1, exec_time_s=5.0, throughput_tps=120.0),
        synthetic_row(rep=2, exec_time_s=2.0, throughput_tps=300.0),
    ]
    aggregated = aggregate_rows(rows)
    assert len(aggregated) == 1
    assert aggregated[0].exec_time_s == 2.0
    assert aggregated[0].throughput_tps == 300.0
    assert aggregated[0].rep == 3


def test_schedulers_aggregate_into_separate_series():
    rows = [synthetic_row(scheduler="serial"), synthetic_row(scheduler="lockfree")]
    aggregated = aggregate_rows(rows)
    assert [r.scheduler for r in aggregated] == ["lockfree", "serial"]


def test_flagged_rows_annotate_but_do_not_vote():
    rows = [
        synthetic_row(rep=0, exec_time_s=1.0),
        synthetic_row(rep=1, exec_time_s=3.0),
        synthetic_row(rep=2, exec_time_s=30.0, flags=NON_TERMINATION_FLAG),
    ]
    aggregated = aggregate_rows(rows)
    assert len(aggregated) == 1
    assert aggregated[0].exec_time_s == 2.0  # median of the clean rows only
    assert aggregated[0].flags == NON_TERMINATION_FLAG
    assert aggregated[0].rep == 2


def test_all_flagged_group_still_reported():
    rows = [synthetic_row(exec_time_s=30.0, flags=NON_TERMINATION_FLAG)]
    aggregated = aggregate_rows(rows)
    assert aggregated[0].flags == NON_TERMINATION_FLAG
    assert aggregated[0].exec_time_s == 30.0


def test_empty_report_rejected():
    with pytest.raises(ValueError):
        aggregate_rows([])


def test_report_csv_round_trips_aggregates():
    rows = [synthetic_row(rep=r, exec_time_s=float(r + 1)) for r in range(3)]
    text = report(rows, "csv")
    assert rows_from_csv(text) == aggregate_rows(rows)


def test_render_json_and_gnuplot():
    rows = [synthetic_row()]
    as_json = render_rows(rows, "json")
    assert '"scheduler": "lockfree"' in as_json
    as_gnuplot = render_rows(rows, "gnuplot")
    assert as_gnuplot.startswith("# scheduler: lockfree")
    with pytest.raises(ValueError):
        render_rows(rows, "yaml")


def test_row_fields_match_csv_header():
    names = [f.name for f in dataclasses.fields(BenchRow)]
    assert names == CSV_HEADER.split(",")
