"""Multi-bin parallel transaction scheduling with deterministic replay.

A block of read/write-annotated transactions is partitioned into bins of
pairwise non-conflicting transactions; bins execute in order, internally in
parallel, and the final state always matches single-threaded index-order
execution. Three scheduler variants trade synchronization for resilience,
and a fault-injection harness reproduces latency and crash experiments.
"""

from .atomics import AtomicInt, AtomicRef
from .bench import (
    CSV_HEADER,
    NON_TERMINATION_FLAG,
    BenchConfig,
    BenchRow,
    Experiment,
    SchedulerKind,
    aggregate_rows,
    render_rows,
    report,
    rows_from_csv,
    rows_to_csv,
    run_benchmark,
    sweep_points,
)
from .binning import (
    NOT_READY,
    UNASSIGNED,
    BinAssignment,
    assign_bins_helper,
    assign_bins_standard,
    bin_oracle,
    calculate_bin,
    calculate_bin_helper,
)
from .conflict import (
    ConflictIndex,
    ConflictTable,
    SchedulerState,
    build_conflict_sets_helper,
    build_conflict_sets_standard,
    check_conflicts,
    conflict_sets_oracle,
    run_conflict_phase,
)
from .executor import (
    EMPTY_PLAN,
    ExecutionPlan,
    WalletState,
    build_execution_plan,
    execute_plan,
    execute_serial,
    next_transaction,
)
from .faults import (
    CRASH_POINTS,
    NO_FAULTS,
    Aborted,
    FaultAction,
    FaultPlan,
    Site,
    WorkerCrashed,
    apply_fault,
    make_fault_plan,
)
from .scheduler import (
    DEFAULT_WATCHDOG_SECS,
    WATCHDOG_ENV_VAR,
    NonTermination,
    PhaseTimings,
    RetryStats,
    ScheduleResult,
    SchedulerConfigError,
    Variant,
    schedule,
    schedule_with_watchdog,
)
from .txn import (
    Address,
    Transaction,
    TransferPayload,
    dump_workload,
    load_workload,
    make_transaction,
    transaction_from_dict,
    transaction_to_dict,
)
from .workload import (
    ConflictParams,
    WorkloadSpec,
    compute_conflict_params,
    generate_workload,
)

__version__ = "0.1.0"

__all__ = [
    "Address",
    "AtomicInt",
    "AtomicRef",
    "Aborted",
    "BenchConfig",
    "BenchRow",
    "BinAssignment",
    "CRASH_POINTS",
    "CSV_HEADER",
    "ConflictIndex",
    "ConflictParams",
    "ConflictTable",
    "DEFAULT_WATCHDOG_SECS",
    "EMPTY_PLAN",
    "Experiment",
    "ExecutionPlan",
    "FaultAction",
    "FaultPlan",
    "NON_TERMINATION_FLAG",
    "NOT_READY",
    "NO_FAULTS",
    "NonTermination",
    "PhaseTimings",
    "RetryStats",
    "ScheduleResult",
    "SchedulerConfigError",
    "SchedulerKind",
    "SchedulerState",
    "Site",
    "Transaction",
    "TransferPayload",
    "UNASSIGNED",
    "Variant",
    "WATCHDOG_ENV_VAR",
    "WalletState",
    "WorkerCrashed",
    "WorkloadSpec",
    "aggregate_rows",
    "apply_fault",
    "assign_bins_helper",
    "assign_bins_standard",
    "bin_oracle",
    "build_conflict_sets_helper",
    "build_conflict_sets_standard",
    "build_execution_plan",
    "calculate_bin",
    "calculate_bin_helper",
    "check_conflicts",
    "compute_conflict_params",
    "conflict_sets_oracle",
    "dump_workload",
    "execute_plan",
    "execute_serial",
    "generate_workload",
    "load_workload",
    "make_fault_plan",
    "make_transaction",
    "next_transaction",
    "render_rows",
    "report",
    "rows_from_csv",
    "rows_to_csv",
    "run_benchmark",
    "run_conflict_phase",
    "schedule",
    "schedule_with_watchdog",
    "sweep_points",
    "transaction_from_dict",
    "transaction_to_dict",
]
