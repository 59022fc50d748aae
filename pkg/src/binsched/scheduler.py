"""End-to-end variant orchestration over a fixed worker pool.

Three variants combine the phase procedures differently:

* STANDARD: exactly-once claiming in both phases, with a barrier between
  conflict discovery and bin assignment.
* ASSISTED: helper (wraparound) procedures in both phases, still separated
  by a barrier.
* LOCKFREE: helper procedures with no barrier; each worker moves to bin
  assignment as soon as its own conflict loop terminates, so delayed or
  stopped peers never gate progress.

All three produce the same bin assignment for the same block. The barrier
variants hang if a worker stops before the rendezvous, so every run is
wrapped in a watchdog that aborts the pool and reports
:class:`NonTermination` instead of hanging the caller. :func:`schedule`
rejects crash plans on barrier variants up front;
:func:`schedule_with_watchdog` admits them, existing precisely to
demonstrate and contain that non-termination.
"""

from __future__ import annotations

import enum
import os
import threading
import time
from dataclasses import dataclass
from typing import Sequence

from .atomics import AtomicInt
from .binning import BinAssignment, assign_bins_helper, assign_bins_standard
from .conflict import (
    ConflictIndex,
    ConflictTable,
    SchedulerState,
    build_conflict_sets_helper,
    build_conflict_sets_standard,
)
from .executor import EMPTY_PLAN, ExecutionPlan, build_execution_plan
from .faults import Aborted, FaultPlan, Site, WorkerCrashed, fault_site
from .txn import Transaction

WATCHDOG_ENV_VAR = "MBPS_WATCHDOG_SECS"
DEFAULT_WATCHDOG_SECS = 30.0


class Variant(enum.Enum):
    STANDARD = "standard"
    ASSISTED = "assisted"
    LOCKFREE = "lockfree"

    @property
    def uses_barrier(self) -> bool:
        return self is not Variant.LOCKFREE

    @property
    def uses_helpers(self) -> bool:
        return self is not Variant.STANDARD


class SchedulerConfigError(ValueError):
    """Invalid run configuration, reported before any worker starts."""


class NonTermination(RuntimeError):
    """The watchdog fired: the run did not finish within its budget."""

    def __init__(self, variant: Variant, num_threads: int, watchdog_secs: float) -> None:
        super().__init__(
            f"{variant.value} run with {num_threads} threads exceeded "
            f"watchdog of {watchdog_secs:.3f}s"
        )
        self.variant = variant
        self.num_threads = num_threads
        self.watchdog_secs = watchdog_secs


@dataclass(frozen=True)
class PhaseTimings:
    phase1_s: float
    phase2_s: float
    total_s: float


@dataclass(frozen=True)
class RetryStats:
    """Redundant-work telemetry: lost CAS races and NOT_READY skips."""

    cas_retries: int
    not_ready_skips: int


@dataclass(frozen=True)
class ScheduleResult:
    assignment: BinAssignment
    plan: ExecutionPlan
    timing: PhaseTimings
    retries: RetryStats


def resolve_watchdog_secs(watchdog_secs: float | None) -> float:
    if watchdog_secs is not None:
        return watchdog_secs
    env = os.environ.get(WATCHDOG_ENV_VAR)
    if env:
        return float(env)
    return DEFAULT_WATCHDOG_SECS


def _validate(
    variant: Variant,
    num_threads: int,
    faults: FaultPlan,
    allow_crash_on_barrier: bool,
) -> None:
    if num_threads < 1:
        raise SchedulerConfigError(f"num_threads must be >= 1, got {num_threads}")
    workers = faults.crashed_workers | faults.delayed_workers
    if workers and (min(workers) < 0 or max(workers) >= num_threads):
        raise SchedulerConfigError("fault plan names worker ids outside the pool")
    if faults.crashes_anyone and variant.uses_barrier and not allow_crash_on_barrier:
        raise SchedulerConfigError(
            f"{variant.value} is not crash tolerant; crash plans require the "
            "watchdog entry point"
        )
    if variant is Variant.LOCKFREE and len(faults.crashed_workers) >= num_threads:
        raise SchedulerConfigError("lockfree runs need at least one surviving worker")


def schedule(
    txns: Sequence[Transaction],
    variant: Variant,
    num_threads: int,
    faults: FaultPlan | None = None,
    watchdog_secs: float | None = None,
) -> ScheduleResult:
    """Run one block through a variant; strict about hazardous configs."""
    plan = faults if faults is not None else FaultPlan()
    _validate(variant, num_threads, plan, allow_crash_on_barrier=False)
    return _run_pool(txns, variant, num_threads, plan, resolve_watchdog_secs(watchdog_secs))


def schedule_with_watchdog(
    txns: Sequence[Transaction],
    variant: Variant,
    num_threads: int,
    faults: FaultPlan | None = None,
    watchdog_secs: float | None = None,
) -> ScheduleResult:
    """Like :func:`schedule` but admits crash plans on barrier variants.

    Such runs cannot finish; the watchdog aborts the pool and raises
    :class:`NonTermination` so harnesses can record the outcome.
    """
    plan = faults if faults is not None else FaultPlan()
    _validate(variant, num_threads, plan, allow_crash_on_barrier=True)
    return _run_pool(txns, variant, num_threads, plan, resolve_watchdog_secs(watchdog_secs))


def _run_pool(
    txns: Sequence[Transaction],
    variant: Variant,
    num_threads: int,
    faults: FaultPlan,
    watchdog_secs: float,
) -> ScheduleResult:
    n = len(txns)
    if n == 0:
        timing = PhaseTimings(0.0, 0.0, 0.0)
        return ScheduleResult(BinAssignment(0), EMPTY_PLAN, timing, RetryStats(0, 0))

    table = ConflictTable(n)
    bins = BinAssignment(n)
    state = SchedulerState(num_threads=num_threads)
    index = ConflictIndex(txns)
    abort = threading.Event()
    barrier = threading.Barrier(num_threads) if variant.uses_barrier else None
    cas_retries = AtomicInt(0)
    not_ready = AtomicInt(0)
    t_start: list[float | None] = [None] * num_threads
    t_phase1_end: list[float | None] = [None] * num_threads
    t_phase2_start: list[float | None] = [None] * num_threads
    t_phase2_end: list[float | None] = [None] * num_threads
    errors: list[BaseException] = []

    def body(wid: int) -> None:
        t_start[wid] = time.perf_counter()
        try:
            if variant.uses_helpers:
                build_conflict_sets_helper(
                    txns, table, state, wid,
                    index=index, faults=faults, abort=abort, cas_retries=cas_retries,
                )
            else:
                build_conflict_sets_standard(
                    txns, table, state, wid, index=index, faults=faults, abort=abort,
                )
            t_phase1_end[wid] = time.perf_counter()
            fault_site(faults, wid, Site.INTER_PHASE, abort)
            if barrier is not None:
                barrier.wait()
            t_phase2_start[wid] = time.perf_counter()
            if variant.uses_helpers:
                assign_bins_helper(
                    txns, table, bins, state, wid,
                    faults=faults, abort=abort,
                    cas_retries=cas_retries, not_ready_skips=not_ready,
                )
            else:
                assign_bins_standard(
                    txns, table, bins, state, wid,
                    faults=faults, abort=abort, cas_retries=cas_retries,
                )
            t_phase2_end[wid] = time.perf_counter()
        except (WorkerCrashed, Aborted, threading.BrokenBarrierError):
            return
        except BaseException as exc:
            errors.append(exc)
            abort.set()
            if barrier is not None:
                barrier.abort()

    workers = [
        threading.Thread(target=body, args=(w,), name=f"sched-{w}", daemon=True)
        for w in range(num_threads)
    ]
    started = time.perf_counter()
    for t in workers:
        t.start()
    deadline = started + watchdog_secs
    for t in workers:
        t.join(max(0.0, deadline - time.perf_counter()))
    if any(t.is_alive() for t in workers):
        abort.set()
        if barrier is not None:
            barrier.abort()
        for t in workers:
            t.join(5.0)
        raise NonTermination(variant, num_threads, watchdog_secs)
    if errors:
        raise errors[0]
    if not bins.is_complete():
        if faults.crashes_anyone:
            # a dead worker's claim will never be redone in this variant, so
            # the pipeline can never produce a plan: report it immediately
            # instead of burning the whole watchdog budget
            raise NonTermination(variant, num_threads, watchdog_secs)
        raise RuntimeError("worker pool exited with an incomplete assignment")

    p1_start = min(v for v in t_start if v is not None)
    p1_end = max(v for v in t_phase1_end if v is not None)
    p2_start = min(v for v in t_phase2_start if v is not None)
    p2_end = max(v for v in t_phase2_end if v is not None)
    timing = PhaseTimings(
        phase1_s=p1_end - p1_start,
        phase2_s=p2_end - p2_start,
        total_s=p2_end - p1_start,
    )
    retries = RetryStats(cas_retries.load(), not_ready.load())
    return ScheduleResult(bins, build_execution_plan(bins), timing, retries)
