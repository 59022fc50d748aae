"""Benchmark harness: experiment sweeps, CSV rows, and report aggregation.

Three experiment families mirror the evaluation axes: BASELINE sweeps block
size and dependency percentage with no faults, LATENCY sweeps the share of
delayed workers, and CRASH sweeps the share of crashed workers (lock-free
scheduler only, since the barrier variants cannot survive a crash). Every
measurement appends one row; callers can sink rows incrementally so an
interrupted run preserves partial data. Medians across repetitions are the
job of :func:`aggregate_rows` / :func:`report`, not the runner.

A crashed worker stays dead for the whole pipeline: the execution stage of
a crash run uses only the surviving threads, which is what makes crash
overhead visible when per-transaction work is simulated.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import statistics
import time
from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterable, Sequence

from .executor import WalletState, execute_plan, execute_serial
from .faults import CRASH_POINTS, FaultPlan, Site, make_fault_plan
from .scheduler import NonTermination, Variant, schedule_with_watchdog
from .workload import WorkloadSpec, compute_conflict_params, generate_workload

CSV_HEADER = (
    "scheduler,n_txns,dependency_pct,cp1,cp2,cp3,num_threads,delayed_pct,"
    "crashed_pct,exec_time_s,throughput_tps,num_bins,phase1_s,phase2_s,"
    "exec_stage_s,seed,rep,flags"
)
NON_TERMINATION_FLAG = "NON_TERMINATION"


class Experiment(enum.Enum):
    BASELINE = "baseline"
    LATENCY = "latency"
    CRASH = "crash"


class SchedulerKind(enum.Enum):
    SERIAL = "serial"
    STANDARD = "standard"
    ASSISTED = "assisted"
    LOCKFREE = "lockfree"

    @property
    def variant(self) -> Variant | None:
        if self is SchedulerKind.SERIAL:
            return None
        return Variant(self.value)


@dataclass(frozen=True)
class BenchRow:
    scheduler: str
    n_txns: int
    dependency_pct: float
    cp1: float
    cp2: float
    cp3: float
    num_threads: int
    delayed_pct: float
    crashed_pct: float
    exec_time_s: float
    throughput_tps: float
    num_bins: int
    phase1_s: float
    phase2_s: float
    exec_stage_s: float
    seed: int
    rep: int
    flags: str = ""


@dataclass(frozen=True)
class BenchConfig:
    experiment: Experiment
    n_txns_values: tuple[int, ...]
    dependency_pct_values: tuple[float, ...]
    schedulers: tuple[SchedulerKind, ...]
    num_threads: int = 8
    delayed_pct_values: tuple[float, ...] = (0.0,)
    crashed_pct_values: tuple[float, ...] = (0.0,)
    delay_s: float = 0.005
    crash_point: Site = Site.PHASE1_PRE_PUBLISH
    repetitions: int = 5
    per_txn_work: float = 0.0
    n_accounts: int = 100
    amount_range: tuple[int, int] = (1, 100)
    base_seed: int = 1
    fault_seed: int = 0
    watchdog_secs: float | None = None

    def __post_init__(self) -> None:
        if not self.n_txns_values or not self.dependency_pct_values or not self.schedulers:
            raise ValueError("sweep axes and scheduler list must be non-empty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.num_threads < 1:
            raise ValueError("num_threads must be >= 1")
        if self.crash_point not in CRASH_POINTS:
            raise ValueError(f"{self.crash_point} is not a crash point")
        if self.experiment is Experiment.CRASH:
            allowed = {SchedulerKind.LOCKFREE, SchedulerKind.SERIAL}
            extra = set(self.schedulers) - allowed
            if extra:
                raise ValueError(
                    "crash experiments run on the lockfree scheduler "
                    f"(plus serial reference); got {sorted(k.value for k in extra)}"
                )


def sweep_points(config: BenchConfig) -> list[tuple[int, float, float, float]]:
    """(n_txns, dependency_pct, delayed_pct, crashed_pct) per sweep point."""
    points = []
    for n in config.n_txns_values:
        for dep in config.dependency_pct_values:
            if config.experiment is Experiment.LATENCY:
                points.extend((n, dep, d, 0.0) for d in config.delayed_pct_values)
            elif config.experiment is Experiment.CRASH:
                points.extend((n, dep, 0.0, c) for c in config.crashed_pct_values)
            else:
                points.append((n, dep, 0.0, 0.0))
    return points


def _measure_serial(block, per_txn_work: float) -> tuple[float, WalletState]:
    t0 = time.perf_counter()
    final = execute_serial(block, WalletState(), per_txn_work)
    return time.perf_counter() - t0, final


def run_benchmark(
    config: BenchConfig,
    on_row: Callable[[BenchRow], None] | None = None,
) -> list[BenchRow]:
    """Execute the configured sweep; one row per point x scheduler x rep."""
    rows: list[BenchRow] = []

    def emit(row: BenchRow) -> None:
        rows.append(row)
        if on_row is not None:
            on_row(row)

    for n, dep, delayed_pct, crashed_pct in sweep_points(config):
        for rep in range(config.repetitions):
            seed = config.base_seed + rep
            block = generate_workload(
                WorkloadSpec(
                    n_txns=n,
                    n_accounts=config.n_accounts,
                    dependency_pct=dep,
                    amount_range=config.amount_range,
                    seed=seed,
                )
            )
            params = compute_conflict_params(block)
            base = BenchRow(
                scheduler="",
                n_txns=n,
                dependency_pct=dep,
                cp1=params.cp1,
                cp2=params.cp2,
                cp3=params.cp3,
                num_threads=config.num_threads,
                delayed_pct=delayed_pct,
                crashed_pct=crashed_pct,
                exec_time_s=0.0,
                throughput_tps=0.0,
                num_bins=0,
                phase1_s=0.0,
                phase2_s=0.0,
                exec_stage_s=0.0,
                seed=seed,
                rep=rep,
            )
            for kind in config.schedulers:
                emit(_measure(kind, block, base, config))
    return rows


def _measure(kind: SchedulerKind, block, base: BenchRow, config: BenchConfig) -> BenchRow:
    n = len(block)
    if kind is SchedulerKind.SERIAL:
        elapsed, _ = _measure_serial(block, config.per_txn_work)
        return replace(
            base,
            scheduler=kind.value,
            num_threads=1,
            exec_time_s=elapsed,
            throughput_tps=_throughput(n, elapsed),
            exec_stage_s=elapsed,
        )

    variant = kind.variant
    assert variant is not None
    faults: FaultPlan | None = None
    if base.delayed_pct > 0 or base.crashed_pct > 0:
        faults = make_fault_plan(
            config.num_threads,
            delayed_pct=base.delayed_pct,
            delay=config.delay_s,
            crashed_pct=base.crashed_pct,
            crash_point=config.crash_point,
            seed=config.fault_seed,
        )
    try:
        result = schedule_with_watchdog(
            block, variant, config.num_threads, faults, config.watchdog_secs
        )
    except NonTermination as hang:
        return replace(
            base,
            scheduler=kind.value,
            exec_time_s=hang.watchdog_secs,
            throughput_tps=_throughput(n, hang.watchdog_secs),
            flags=NON_TERMINATION_FLAG,
        )
    crashed = len(faults.crashed_workers) if faults is not None else 0
    live_threads = max(1, config.num_threads - crashed)
    t0 = time.perf_counter()
    execute_plan(result.plan, block, WalletState(), live_threads, config.per_txn_work)
    exec_stage = time.perf_counter() - t0
    total = result.timing.total_s + exec_stage
    return replace(
        base,
        scheduler=kind.value,
        exec_time_s=total,
        throughput_tps=_throughput(n, total),
        num_bins=result.plan.num_bins,
        phase1_s=result.timing.phase1_s,
        phase2_s=result.timing.phase2_s,
        exec_stage_s=exec_stage,
    )


def _throughput(n: int, elapsed: float) -> float:
    return n / elapsed if elapsed > 0 else 0.0


# --- rendering and aggregation -------------------------------------------

_INT_FIELDS = {"n_txns", "num_threads", "num_bins", "seed", "rep"}
_STR_FIELDS = {"scheduler", "flags"}
_FIELD_ORDER = CSV_HEADER.split(",")


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_FIELD_ORDER)
    for row in rows:
        record = asdict(row)
        writer.writerow([record[name] for name in _FIELD_ORDER])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[BenchRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != _FIELD_ORDER:
        raise ValueError(f"unexpected CSV header: {header}")
    rows = []
    for record in reader:
        if not record:
            continue
        kwargs = {}
        for name, value in zip(_FIELD_ORDER, record):
            if name in _STR_FIELDS:
                kwargs[name] = value
            elif name in _INT_FIELDS:
                kwargs[name] = int(value)
            else:
                kwargs[name] = float(value)
        rows.append(BenchRow(**kwargs))
    return rows


_GROUP_KEY = ("scheduler", "n_txns", "dependency_pct", "num_threads", "delayed_pct", "crashed_pct")
_MEDIAN_FIELDS = (
    "cp1", "cp2", "cp3", "exec_time_s", "throughput_tps",
    "phase1_s", "phase2_s", "exec_stage_s",
)


def aggregate_rows(rows: Sequence[BenchRow]) -> list[BenchRow]:
    """Median per sweep point; non-terminating rows annotate but never vote.

    The aggregated row reuses the schema: ``rep`` holds the number of
    repetitions that entered the median and ``seed`` the first seed seen.
    """
    if not rows:
        raise ValueError("no rows to aggregate")
    groups: dict[tuple, list[BenchRow]] = {}
    for row in rows:
        key = tuple(getattr(row, name) for name in _GROUP_KEY)
        groups.setdefault(key, []).append(row)

    aggregated = []
    for key in sorted(groups, key=lambda k: tuple(str(v) for v in k)):
        members = groups[key]
        clean = [r for r in members if not r.flags]
        flagged = len(clean) < len(members)
        voters = clean if clean else members
        medians = {
            name: statistics.median(getattr(r, name) for r in voters) for name in _MEDIAN_FIELDS
        }
        aggregated.append(
            replace(
                voters[0],
                **medians,
                num_bins=statistics.median_low(r.num_bins for r in voters),
                seed=voters[0].seed,
                rep=len(voters),
                flags=NON_TERMINATION_FLAG if flagged else "",
            )
        )
    return aggregated


def render_rows(rows: Sequence[BenchRow], fmt: str = "csv") -> str:
    if fmt == "csv":
        return rows_to_csv(rows)
    if fmt == "json":
        return json.dumps([asdict(r) for r in rows], indent=2)
    if fmt == "gnuplot":
        out = []
        for scheduler in sorted({r.scheduler for r in rows}):
            out.append(f"# scheduler: {scheduler}")
            out.append("# " + " ".join(_FIELD_ORDER[1:-1]))
            for row in rows:
                if row.scheduler != scheduler:
                    continue
                record = asdict(row)
                out.append(" ".join(str(record[name]) for name in _FIELD_ORDER[1:-1]))
            out.append("")
        return "\n".join(out)
    raise ValueError(f"unknown report format: {fmt}")


def report(rows: Sequence[BenchRow], fmt: str = "csv") -> str:
    """Aggregate repetitions to medians and render them."""
    return render_rows(aggregate_rows(rows), fmt)
