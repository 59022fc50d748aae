"""Phase 1: pairwise conflict predicate and concurrent conflict-set discovery.

Two transactions conflict when their declared access sets overlap in any
write-involving way: write/write, read/write, or write/read. Read/read
overlap is not a conflict. For every transaction ``i`` the phase publishes
the *lower conflict set*, the ids ``j < i`` it conflicts with, into a shared
:class:`ConflictTable`.

Two discovery procedures share that contract:

* :func:`build_conflict_sets_standard` hands each index to exactly one
  worker via fetch-and-add and stores the result. A worker that stops mid
  claim leaves its slot unset forever; this variant is not crash tolerant.
* :func:`build_conflict_sets_helper` claims wraparound (``mod n``), so fast
  workers recompute slots abandoned by slow or stopped peers, and publishes
  via compare-and-swap from the unset sentinel so exactly one publisher
  wins per slot. A worker that makes a full pass over already-published
  slots registers as stuck; the phase terminates when every worker is stuck
  or a worker's own full pass completes, at which point the done counter is
  clamped to ``n`` so all workers exit promptly.

An unset slot is a distinct sentinel (``None``) from a published empty set:
the first transaction always has an empty conflict set, and it still has to
count as completed.

Per-slot scans use :class:`ConflictIndex`, an address-postings table built
once from the immutable block; it enumerates exactly the set
``{j < i : check_conflicts(txn_i, txn_j)}`` without touching unrelated
transactions. :func:`conflict_sets_oracle` is the independent quadratic
restatement used to cross-check it.
"""

from __future__ import annotations

import threading
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Sequence

from .atomics import AtomicInt, AtomicRef
from .faults import FaultPlan, Site, WorkerCrashed, fault_site
from .txn import Address, Transaction


def check_conflicts(a: Transaction, b: Transaction) -> bool:
    """True iff the two transactions overlap on any write-involving pair."""
    return (
        not a.write_set.isdisjoint(b.write_set)
        or not a.read_set.isdisjoint(b.write_set)
        or not a.write_set.isdisjoint(b.read_set)
    )


def conflict_sets_oracle(txns: Sequence[Transaction]) -> list[frozenset[int]]:
    """Serial O(n^2) reference: lower conflict sets by direct pairwise check."""
    out: list[frozenset[int]] = []
    for i, txn in enumerate(txns):
        out.append(frozenset(j for j in range(i) if check_conflicts(txn, txns[j])))
    return out


class ConflictIndex:
    """Address -> accessing-transaction postings, built once per block.

    ``lower_conflicts(txn)`` unions the write-involving postings below the
    transaction's own id, which is exactly the pairwise definition; postings
    are ascending because the block is scanned in id order.
    """

    __slots__ = ("_readers", "_writers")

    def __init__(self, txns: Sequence[Transaction]) -> None:
        writers: dict[Address, list[int]] = {}
        readers: dict[Address, list[int]] = {}
        for txn in txns:
            for addr in txn.write_set:
                writers.setdefault(addr, []).append(txn.id)
            for addr in txn.read_set:
                readers.setdefault(addr, []).append(txn.id)
        self._writers = writers
        self._readers = readers

    @staticmethod
    def _below(postings: list[int], i: int) -> list[int]:
        return postings[: bisect_left(postings, i)]

    def lower_conflicts(self, txn: Transaction) -> frozenset[int]:
        i = txn.id
        out: set[int] = set()
        for addr in txn.write_set:
            if addr in self._writers:
                out.update(self._below(self._writers[addr], i))
            if addr in self._readers:
                out.update(self._below(self._readers[addr], i))
        for addr in txn.read_set:
            if addr in self._writers:
                out.update(self._below(self._writers[addr], i))
        return frozenset(out)


class ConflictTable:
    """Shared array of publish-once lower-conflict-set slots."""

    def __init__(self, n: int) -> None:
        self.n = n
        self.slots: list[AtomicRef[frozenset[int]]] = [AtomicRef() for _ in range(n)]
        self.successful_publishes = AtomicInt(0)

    def get(self, i: int) -> frozenset[int] | None:
        return self.slots[i].load()

    def publish(self, i: int, conflicts: frozenset[int]) -> None:
        """Uncontended store, for the exactly-once claiming variant."""
        self.slots[i].store(conflicts)
        self.successful_publishes.fetch_add(1)

    def try_publish(self, i: int, conflicts: frozenset[int]) -> bool:
        """CAS from the unset sentinel; loser's candidate set is discarded."""
        if self.slots[i].compare_and_set(None, conflicts):
            self.successful_publishes.fetch_add(1)
            return True
        return False

    def is_complete(self) -> bool:
        return all(slot.load() is not None for slot in self.slots)

    def to_lists(self) -> list[list[int] | None]:
        """Dump-friendly view: sorted lists, None for unset slots."""
        return [sorted(s) if (s := slot.load()) is not None else None for slot in self.slots]


@dataclass
class SchedulerState:
    """Shared atomic counters coordinating one scheduling run."""

    num_threads: int
    claim_counter_phase1: AtomicInt = field(default_factory=AtomicInt)
    claim_counter_phase2: AtomicInt = field(default_factory=AtomicInt)
    conflict_txns_done: AtomicInt = field(default_factory=AtomicInt)
    processed_txns_done: AtomicInt = field(default_factory=AtomicInt)
    stuck_threads_phase1: AtomicInt = field(default_factory=AtomicInt)
    stuck_threads_phase2: AtomicInt = field(default_factory=AtomicInt)


def build_conflict_sets_standard(
    txns: Sequence[Transaction],
    table: ConflictTable,
    state: SchedulerState,
    worker_id: int,
    *,
    index: ConflictIndex | None = None,
    faults: FaultPlan | None = None,
    abort: threading.Event | None = None,
) -> None:
    """Exactly-once claiming: each index is computed by a single worker."""
    n = len(txns)
    if index is None:
        index = ConflictIndex(txns)
    i = state.claim_counter_phase1.fetch_add(1)
    while i < n:
        fault_site(faults, worker_id, Site.PHASE1_POST_CLAIM, abort)
        if table.get(i) is None:
            lower = index.lower_conflicts(txns[i])
            fault_site(faults, worker_id, Site.PHASE1_PRE_PUBLISH, abort)
            table.publish(i, lower)
        i = state.claim_counter_phase1.fetch_add(1)


def build_conflict_sets_helper(
    txns: Sequence[Transaction],
    table: ConflictTable,
    state: SchedulerState,
    worker_id: int,
    *,
    index: ConflictIndex | None = None,
    faults: FaultPlan | None = None,
    abort: threading.Event | None = None,
    cas_retries: AtomicInt | None = None,
) -> None:
    """Wraparound claiming with CAS publication; tolerates stopped peers."""
    n = len(txns)
    if n == 0:
        return
    if index is None:
        index = ConflictIndex(txns)
    local_count = 0
    stuck = False
    while state.conflict_txns_done.load() < n:
        i = state.claim_counter_phase1.fetch_add(1) % n
        fault_site(faults, worker_id, Site.PHASE1_POST_CLAIM, abort)
        if table.get(i) is None:
            local_count = 0
            if stuck:
                state.stuck_threads_phase1.fetch_add(-1)
                stuck = False
            lower = index.lower_conflicts(txns[i])
            fault_site(faults, worker_id, Site.PHASE1_PRE_PUBLISH, abort)
            if table.try_publish(i, lower):
                state.conflict_txns_done.add_clamped(1, n)
            elif cas_retries is not None:
                cas_retries.fetch_add(1)
        else:
            local_count += 1
            if local_count == n and not stuck:
                stuck = True
                state.stuck_threads_phase1.fetch_add(1)
        if state.stuck_threads_phase1.load() == state.num_threads or local_count == n:
            state.conflict_txns_done.store(n)


def run_conflict_phase(
    txns: Sequence[Transaction],
    num_threads: int,
    use_helpers: bool,
    faults: FaultPlan | None = None,
) -> ConflictTable:
    """Convenience pool runner for phase 1 alone (tests, demos, dumps)."""
    if num_threads < 1:
        raise ValueError("num_threads must be >= 1")
    table = ConflictTable(len(txns))
    state = SchedulerState(num_threads=num_threads)
    index = ConflictIndex(txns)
    build = build_conflict_sets_helper if use_helpers else build_conflict_sets_standard
    errors: list[BaseException] = []

    def body(worker_id: int) -> None:
        try:
            build(txns, table, state, worker_id, index=index, faults=faults)
        except WorkerCrashed:
            pass
        except BaseException as exc:  # surfaced after join
            errors.append(exc)

    threads = [
        threading.Thread(target=body, args=(w,), name=f"conflict-{w}", daemon=True)
        for w in range(num_threads)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return table
