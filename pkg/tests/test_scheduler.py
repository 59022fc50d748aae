import threading
import time

import pytest
from hypothesis import given, settings, strategies as st

from _helpers import random_wallet_block, wallet_block, wallet_blocks
from binsched import (
    CRASH_POINTS,
    FaultPlan,
    NonTermination,
    SchedulerConfigError,
    Site,
    Variant,
    bin_oracle,
    make_fault_plan,
    schedule,
    schedule_with_watchdog,
)

ALL_VARIANTS = list(Variant)


def test_worked_example_all_variants():
    block = wallet_block([("A", "B"), ("C", "D"), ("B", "E")])
    for variant in ALL_VARIANTS:
        result = schedule(block, variant, num_threads=4)
        assert result.assignment.initial_bin_list() == [0, 0, 1]
        assert result.plan.bin_matrix == ((0, 1), (2,))


def test_empty_block():
    for variant in ALL_VARIANTS:
        result = schedule([], variant, num_threads=3)
        assert result.plan.num_bins == 0
        assert result.plan.glb_ptr == -1
        assert result.assignment.initial_bin_list() == []


@pytest.mark.parametrize("num_threads", [1, 2, 4, 8, 16])
def test_variants_agree_with_oracle(num_threads):
    block = random_wallet_block(seed=101, max_n=250)
    expected = bin_oracle(block)
    for variant in ALL_VARIANTS:
        result = schedule(block, variant, num_threads=num_threads)
        assert result.assignment.initial_bin_list() == expected


@settings(max_examples=15, deadline=None)
@given(wallet_blocks(max_n=80), st.sampled_from([1, 2, 4, 8]))
def test_variant_equivalence_property(block, num_threads):
    expected = bin_oracle(block)
    for variant in ALL_VARIANTS:
        result = schedule(block, variant, num_threads=num_threads)
        assert result.assignment.initial_bin_list() == expected


def test_delay_plans_do_not_change_the_outcome():
    block = random_wallet_block(seed=7, max_n=60)
    expected = bin_oracle(block)
    faults = make_fault_plan(4, delayed_pct=50, delay=0.002, seed=1)
    for variant in ALL_VARIANTS:
        result = schedule(block, variant, num_threads=4, faults=faults)
        assert result.assignment.initial_bin_list() == expected


@pytest.mark.parametrize("crash_point", CRASH_POINTS)
@pytest.mark.parametrize("n_crashed", [1, 4, 7])
def test_lockfree_progress_under_crashes(crash_point, n_crashed):
    block = random_wallet_block(seed=55, max_n=200)
    expected = bin_oracle(block)
    faults = FaultPlan(crashed_workers=frozenset(range(n_crashed)), crash_point=crash_point)
    result = schedule(block, Variant.LOCKFREE, num_threads=8, faults=faults)
    assert result.assignment.initial_bin_list() == expected


def test_lockfree_crash_plus_delay_mix():
    block = random_wallet_block(seed=56, max_n=100)
    faults = make_fault_plan(
        8, delayed_pct=25, delay=0.001, crashed_pct=25, crash_point=Site.PHASE1_POST_CLAIM, seed=4
    )
    result = schedule(block, Variant.LOCKFREE, num_threads=8, faults=faults)
    assert result.assignment.initial_bin_list() == bin_oracle(block)


# --- configuration errors -------------------------------------------------------


def test_zero_threads_rejected():
    with pytest.raises(SchedulerConfigError):
        schedule(wallet_block([("A", "B")]), Variant.LOCKFREE, num_threads=0)


@pytest.mark.parametrize("variant", [Variant.STANDARD, Variant.ASSISTED])
def test_crash_plans_rejected_on_barrier_variants(variant):
    faults = FaultPlan(crashed_workers=frozenset({0}))
    with pytest.raises(SchedulerConfigError):
        schedule(wallet_block([("A", "B")]), variant, num_threads=2, faults=faults)


def test_lockfree_needs_a_survivor():
    faults = FaultPlan(crashed_workers=frozenset({0, 1}))
    with pytest.raises(SchedulerConfigError):
        schedule(wallet_block([("A", "B")]), Variant.LOCKFREE, num_threads=2, faults=faults)


def test_out_of_range_worker_ids_rejected():
    faults = FaultPlan(crashed_workers=frozenset({9}))
    with pytest.raises(SchedulerConfigError):
        schedule(wallet_block([("A", "B")]), Variant.LOCKFREE, num_threads=2, faults=faults)


# --- watchdog and non-termination -------------------------------------------------


@pytest.mark.parametrize("variant", [Variant.STANDARD, Variant.ASSISTED])
def test_barrier_variants_hang_under_crashes(variant):
    block = random_wallet_block(seed=61, max_n=120)
    faults = FaultPlan(crashed_workers=frozenset({1}), crash_point=Site.INTER_PHASE)
    started = time.perf_counter()
    with pytest.raises(NonTermination):
        schedule_with_watchdog(block, variant, num_threads=4, faults=faults, watchdog_secs=0.8)
    elapsed = time.perf_counter() - started
    assert elapsed < 15.0  # watchdog bounds the hang; suite never blocks


def test_watchdog_env_override(monkeypatch):
    monkeypatch.setenv("MBPS_WATCHDOG_SECS", "0.5")
    block = random_wallet_block(seed=62, max_n=80)
    faults = FaultPlan(crashed_workers=frozenset({0}), crash_point=Site.INTER_PHASE)
    started = time.perf_counter()
    with pytest.raises(NonTermination) as info:
        schedule_with_watchdog(block, Variant.STANDARD, num_threads=2, faults=faults)
    assert info.value.watchdog_secs == 0.5
    assert time.perf_counter() - started < 15.0


def test_lockfree_with_watchdog_completes():
    block = random_wallet_block(seed=63, max_n=120)
    faults = FaultPlan(crashed_workers=frozenset({0, 1, 2}), crash_point=Site.PHASE2_PRE_CAS)
    result = schedule_with_watchdog(
        block, Variant.LOCKFREE, num_threads=4, faults=faults, watchdog_secs=10.0
    )
    assert result.assignment.initial_bin_list() == bin_oracle(block)


# --- result metadata ---------------------------------------------------------------


def test_timing_fields_are_sane():
    block = random_wallet_block(seed=71, max_n=150)
    result = schedule(block, Variant.LOCKFREE, num_threads=4)
    timing = result.timing
    assert timing.phase1_s >= 0
    assert timing.phase2_s >= 0
    assert timing.total_s >= max(timing.phase1_s, timing.phase2_s) - 1e-9


def test_retry_stats_are_nonnegative():
    block = random_wallet_block(seed=72, max_n=150)
    result = schedule(block, Variant.LOCKFREE, num_threads=8)
    assert result.retries.cas_retries >= 0
    assert result.retries.not_ready_skips >= 0


def test_plan_consistent_with_assignment():
    block = random_wallet_block(seed=73, max_n=150)
    result = schedule(block, Variant.ASSISTED, num_threads=4)
    initial = result.assignment.initial_bin_list()
    for b, row in enumerate(result.plan.bin_matrix):
        assert list(row) == sorted(row)
        for txn_id in row:
            assert initial[txn_id] == b


def test_concurrent_schedule_calls_do_not_interfere():
    block_a = random_wallet_block(seed=81, max_n=120)
    block_b = random_wallet_block(seed=82, max_n=120)
    results: dict[str, list[int]] = {}

    def run(name, block):
        results[name] = schedule(block, Variant.LOCKFREE, 4).assignment.initial_bin_list()

    t1 = threading.Thread(target=run, args=("a", block_a))
    t2 = threading.Thread(target=run, args=("b", block_b))
    t1.start()
    t2.start()
    t1.join()
    t2.join()
    assert results["a"] == bin_oracle(block_a)
    assert results["b"] == bin_oracle(block_b)
