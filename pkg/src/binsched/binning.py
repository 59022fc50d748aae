"""Phase 2: assign each transaction to the lowest bin above its conflicts.

A transaction's bin is ``1 + max(bin of each lower conflict)``, with an
empty conflict set mapping to bin 0. Conflicting pairs therefore land in
strictly ordered bins (earlier id in the lower bin) and every bin holds only
pairwise non-conflicting transactions, so bins can execute internally in
parallel and sequentially with each other while reproducing the serial
outcome.

:func:`assign_bins_standard` claims each index exactly once and *blocks*
(bounded-backoff spin) on dependencies that are still unassigned; safe when
phase 1 completed behind a barrier, not crash tolerant.
:func:`assign_bins_helper` never blocks: unassigned dependencies yield a
NOT_READY result and the worker claims a fresh wraparound index instead,
so abandoned work is eventually redone by peers.

Per-bin membership snapshots are immutable sets installed by copy-on-write
CAS: each retry builds a fresh copy, so readers never observe a partially
built set and superseded snapshots stay readable until the phase ends.
"""

from __future__ import annotations

import threading
import time
from typing import Sequence

from .atomics import AtomicInt, AtomicRef
from .conflict import ConflictTable, SchedulerState, check_conflicts
from .faults import Aborted, FaultPlan, Site, fault_site
from .txn import Transaction

UNASSIGNED = -1
NOT_READY = -1

_SPIN_SLEEP_MIN = 10e-6
_SPIN_SLEEP_MAX = 1e-3


class BinAssignment:
    """Shared publish-once bin numbers plus per-bin membership snapshots.

    ``bin_array`` is pre-sized to ``n`` slots (worst case one bin per
    transaction) so bin addressing never needs resizing coordination.
    """

    def __init__(self, n: int) -> None:
        self.n = n
        self.initial_bin: list[AtomicInt] = [AtomicInt(UNASSIGNED) for _ in range(n)]
        self.bin_array: list[AtomicRef[frozenset[int]]] = [AtomicRef() for _ in range(n)]
        self.successful_assignments = AtomicInt(0)

    def bin_of(self, i: int) -> int:
        return self.initial_bin[i].load()

    def assign(self, i: int, bin_no: int) -> None:
        """Uncontended store, for the exactly-once claiming variant."""
        self.initial_bin[i].store(bin_no)
        self.successful_assignments.fetch_add(1)

    def try_assign(self, i: int, bin_no: int) -> bool:
        """CAS from UNASSIGNED so helper duplicates publish exactly once."""
        if self.initial_bin[i].compare_and_set(UNASSIGNED, bin_no):
            self.successful_assignments.fetch_add(1)
            return True
        return False

    def insert_member(self, bin_no: int, i: int, cas_retries: AtomicInt | None = None) -> None:
        """Copy-on-write insert of ``i`` into a bin's membership snapshot.

        Re-insertion is idempotent: finding ``i`` already present breaks out,
        which makes lost CAS races and helper duplication harmless.
        """
        slot = self.bin_array[bin_no]
        while True:
            current = slot.load()
            if current is None:
                candidate = frozenset((i,))
            else:
                if i in current:
                    break
                candidate = current | {i}
            if slot.compare_and_set(current, candidate):
                break
            if cas_retries is not None:
                cas_retries.fetch_add(1)

    def is_complete(self) -> bool:
        return all(cell.load() != UNASSIGNED for cell in self.initial_bin)

    def initial_bin_list(self) -> list[int]:
        return [cell.load() for cell in self.initial_bin]

    def num_bins(self) -> int:
        bins = self.initial_bin_list()
        if not bins:
            return 0
        top = max(bins)
        return top + 1 if top != UNASSIGNED else 0

    def bins(self) -> list[frozenset[int]]:
        """Membership snapshots for the bins actually in use."""
        out = []
        for b in range(self.num_bins()):
            members = self.bin_array[b].load()
            out.append(members if members is not None else frozenset())
        return out


def calculate_bin(
    i: int,
    table: ConflictTable,
    bins: BinAssignment,
    *,
    abort: threading.Event | None = None,
) -> int:
    """Blocking bin computation: spin until every dependency is assigned."""
    conflicts = table.get(i)
    if conflicts is None:
        raise RuntimeError(f"conflict slot {i} not published; phase 1 incomplete")
    current = -1
    for dep in conflicts:
        pause = _SPIN_SLEEP_MIN
        while bins.bin_of(dep) == UNASSIGNED:
            if abort is not None and abort.is_set():
                raise Aborted()
            time.sleep(pause)
            pause = min(pause * 2, _SPIN_SLEEP_MAX)
        dep_bin = bins.bin_of(dep)
        if dep_bin > current:
            current = dep_bin
    return current + 1


def calculate_bin_helper(i: int, table: ConflictTable, bins: BinAssignment) -> int:
    """Non-blocking bin computation: NOT_READY while any dependency waits.

    An unpublished conflict slot also reports NOT_READY: a lock-free worker
    can reach phase 2 while a slow peer is still mid-publication, and the
    slot will appear shortly.
    """
    conflicts = table.get(i)
    if conflicts is None:
        return NOT_READY
    current = -1
    for dep in conflicts:
        dep_bin = bins.bin_of(dep)
        if dep_bin == UNASSIGNED:
            return NOT_READY
        if dep_bin > current:
            current = dep_bin
    return current + 1


def assign_bins_standard(
    txns: Sequence[Transaction],
    table: ConflictTable,
    bins: BinAssignment,
    state: SchedulerState,
    worker_id: int,
    *,
    faults: FaultPlan | None = None,
    abort: threading.Event | None = None,
    cas_retries: AtomicInt | None = None,
) -> None:
    """Exactly-once claiming with blocking dependency waits."""
    n = len(txns)
    i = state.claim_counter_phase2.fetch_add(1)
    while i < n:
        fault_site(faults, worker_id, Site.PHASE2_POST_CLAIM, abort)
        alloted = calculate_bin(i, table, bins, abort=abort)
        fault_site(faults, worker_id, Site.PHASE2_PRE_CAS, abort)
        bins.insert_member(alloted, i, cas_retries)
        bins.assign(i, alloted)
        i = state.claim_counter_phase2.fetch_add(1)


def assign_bins_helper(
    txns: Sequence[Transaction],
    table: ConflictTable,
    bins: BinAssignment,
    state: SchedulerState,
    worker_id: int,
    *,
    faults: FaultPlan | None = None,
    abort: threading.Event | None = None,
    cas_retries: AtomicInt | None = None,
    not_ready_skips: AtomicInt | None = None,
) -> None:
    """Wraparound claiming; skips unready work instead of blocking on it."""
    n = len(txns)
    if n == 0:
        return
    local_count = 0
    stuck = False
    while state.processed_txns_done.load() < n:
        i = state.claim_counter_phase2.fetch_add(1) % n
        fault_site(faults, worker_id, Site.PHASE2_POST_CLAIM, abort)
        if bins.bin_of(i) == UNASSIGNED:
            local_count = 0
            if stuck:
                state.stuck_threads_phase2.fetch_add(-1)
                stuck = False
            alloted = calculate_bin_helper(i, table, bins)
            if alloted == NOT_READY:
                if not_ready_skips is not None:
                    not_ready_skips.fetch_add(1)
                continue
            fault_site(faults, worker_id, Site.PHASE2_PRE_CAS, abort)
            bins.insert_member(alloted, i, cas_retries)
            if bins.try_assign(i, alloted):
                state.processed_txns_done.add_clamped(1, n)
            elif cas_retries is not None:
                cas_retries.fetch_add(1)
        else:
            local_count += 1
            if local_count == n and not stuck:
                stuck = True
                state.stuck_threads_phase2.fetch_add(1)
        if state.stuck_threads_phase2.load() == state.num_threads or local_count == n:
            state.processed_txns_done.store(n)


def bin_oracle(txns: Sequence[Transaction]) -> list[int]:
    """Serial restatement of the bin rule, independent of the shared phases.

    ``oracle[i]`` is 0 when transaction ``i`` conflicts with no earlier
    transaction, otherwise one above the highest bin among its earlier
    conflicts; computed in index order by direct pairwise checks.
    """
    out: list[int] = []
    for i, txn in enumerate(txns):
        highest = -1
        for j in range(i):
            if check_conflicts(txn, txns[j]) and out[j] > highest:
                highest = out[j]
        out.append(highest + 1)
    return out
