"""Stage 3: dense bin-by-bin plan construction and wallet execution.

The plan lays bins out as a ragged matrix walked by :func:`next_transaction`,
a total lookup that returns ``None`` once a coordinate runs off the ready
plan. Execution applies bins in ascending order with intra-bin parallelism:
bin-internal transactions are pairwise non-conflicting, so workers can apply
them in any interleaving, and a rendezvous between consecutive bins preserves
the conflict order. The final state always equals single-threaded index-order
application (:func:`execute_serial`), which is the reference semantics for
every equivalence test.

Transfers debit the sender and credit the receiver unconditionally on signed
balances; accounts absent from the initial state materialize at balance 0 on
first touch. Balance cells for every touched account are materialized before
workers start, so the map structure itself is never mutated concurrently.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Sequence

from .atomics import AtomicInt
from .binning import UNASSIGNED, BinAssignment
from .txn import Address, Transaction


@dataclass(frozen=True)
class ExecutionPlan:
    """Ragged bin-by-bin layout: ``bin_matrix[b][k]`` is a transaction id."""

    bin_matrix: tuple[tuple[int, ...], ...]
    total_trans_bin: tuple[int, ...]
    glb_ptr: int
    num_bins: int


EMPTY_PLAN = ExecutionPlan(bin_matrix=(), total_trans_bin=(), glb_ptr=-1, num_bins=0)


def build_execution_plan(assignment: BinAssignment) -> ExecutionPlan:
    """Materialize the per-bin rows from a complete assignment.

    Rows are sorted ascending (normalization) and ``glb_ptr`` is set to the
    last bin index, marking the whole plan ready.
    """
    initial = assignment.initial_bin_list()
    if any(b == UNASSIGNED for b in initial):
        missing = [i for i, b in enumerate(initial) if b == UNASSIGNED]
        raise ValueError(f"assignment incomplete: {len(missing)} unassigned (first: {missing[:5]})")
    if not initial:
        return EMPTY_PLAN
    num_bins = max(initial) + 1
    rows: list[list[int]] = [[] for _ in range(num_bins)]
    for txn_id, bin_no in enumerate(initial):
        rows[bin_no].append(txn_id)
    bin_matrix = tuple(tuple(sorted(row)) for row in rows)
    return ExecutionPlan(
        bin_matrix=bin_matrix,
        total_trans_bin=tuple(len(row) for row in bin_matrix),
        glb_ptr=num_bins - 1,
        num_bins=num_bins,
    )


def next_transaction(plan: ExecutionPlan, curr_bin: int, curr_trans: int) -> int | None:
    """Plan lookup; ``None`` when the coordinate is outside the ready plan."""
    if plan.glb_ptr >= 0:
        if curr_bin > plan.glb_ptr:
            return None
        val = plan.total_trans_bin[curr_bin]
        if curr_trans >= val:
            return None
        return plan.bin_matrix[curr_bin][curr_trans]
    return None


@dataclass
class WalletState:
    """Account -> signed balance map; total balance is transfer-invariant."""

    balances: dict[Address, int] = field(default_factory=dict)

    def copy(self) -> "WalletState":
        return WalletState(dict(self.balances))

    def total(self) -> int:
        return sum(self.balances.values())

    def balance(self, addr: Address) -> int:
        return self.balances.get(addr, 0)


def _apply(balances: dict[Address, int], txn: Transaction) -> None:
    payload = txn.payload
    if payload is None:
        raise ValueError(f"transaction {txn.id} has no wallet payload to execute")
    balances[payload.from_addr] -= payload.amount
    balances[payload.to_addr] += payload.amount


def execute_serial(
    txns: Sequence[Transaction],
    initial: WalletState,
    per_txn_work: float = 0.0,
) -> WalletState:
    """Index-order single-threaded application: the reference semantics.

    ``per_txn_work`` simulates per-contract work so the serial baseline is
    cost-comparable to the parallel executor in benchmarks; it defaults to
    zero and never changes the resulting state.
    """
    balances = dict(initial.balances)
    for txn in txns:
        if txn.payload is not None:
            balances.setdefault(txn.payload.from_addr, 0)
            balances.setdefault(txn.payload.to_addr, 0)
        if per_txn_work > 0:
            time.sleep(per_txn_work)
        _apply(balances, txn)
    return WalletState(balances)


def _validate_plan(plan: ExecutionPlan, txns: Sequence[Transaction]) -> None:
    seen: set[int] = set()
    for row in plan.bin_matrix:
        seen.update(row)
    if len(seen) != len(txns) or (seen and (min(seen) < 0 or max(seen) >= len(txns))):
        raise ValueError("plan does not partition the block's transaction ids")


def execute_plan(
    plan: ExecutionPlan,
    txns: Sequence[Transaction],
    initial: WalletState,
    num_threads: int = 1,
    per_txn_work: float = 0.0,
) -> WalletState:
    """Apply bins in order, each bin in parallel across ``num_threads``.

    Workers pull positions within the current bin by fetch-and-add and look
    the transaction id up through :func:`next_transaction`; a barrier between
    bins keeps conflicting effects in index order.
    """
    if num_threads < 1:
        raise ValueError("num_threads must be >= 1")
    _validate_plan(plan, txns)

    balances = dict(initial.balances)
    for txn in txns:
        if txn.payload is None:
            raise ValueError(f"transaction {txn.id} has no wallet payload to execute")
        balances.setdefault(txn.payload.from_addr, 0)
        balances.setdefault(txn.payload.to_addr, 0)

    if plan.num_bins == 0:
        return WalletState(balances)

    if num_threads == 1:
        for b in range(plan.num_bins):
            k = 0
            while (txn_id := next_transaction(plan, b, k)) is not None:
                if per_txn_work > 0:
                    time.sleep(per_txn_work)
                _apply(balances, txns[txn_id])
                k += 1
        return WalletState(balances)

    claims = [AtomicInt(0) for _ in range(plan.num_bins)]
    rendezvous = threading.Barrier(num_threads)
    errors: list[BaseException] = []

    def body() -> None:
        try:
            for b in range(plan.num_bins):
                while True:
                    k = claims[b].fetch_add(1)
                    txn_id = next_transaction(plan, b, k)
                    if txn_id is None:
                        break
                    if per_txn_work > 0:
                        time.sleep(per_txn_work)
                    _apply(balances, txns[txn_id])
                rendezvous.wait()
        except threading.BrokenBarrierError:
            return
        except BaseException as exc:
            errors.append(exc)
            rendezvous.abort()

    workers = [
        threading.Thread(target=body, name=f"exec-{w}", daemon=True) for w in range(num_threads)
    ]
    for t in workers:
        t.start()
    for t in workers:
        t.join()
    if errors:
        raise errors[0]
    return WalletState(balances)
