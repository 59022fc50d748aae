"""Execute a scheduled plan in parallel and compare with serial replay.

Bins run in ascending order with a rendezvous between them; transactions
inside one bin touch disjoint accounts, so workers may apply them in any
interleaving. The final wallet state therefore always equals plain
index-order execution, and the total balance is conserved. With simulated
per-transaction work the parallel executor also shows real speedup,
because sleeping releases the interpreter lock.
"""

import time

from binsched import (
    Variant,
    WalletState,
    WorkloadSpec,
    execute_plan,
    execute_serial,
    generate_workload,
    schedule,
)

block = generate_workload(WorkloadSpec(n_txns=600, n_accounts=50, dependency_pct=20, seed=3))
result = schedule(block, Variant.LOCKFREE, num_threads=8)
print(f"scheduled {len(block)} transactions into {result.plan.num_bins} bins")

serial = execute_serial(block, WalletState())
parallel = execute_plan(result.plan, block, WalletState(), num_threads=8)
print(f"parallel state equals serial state: {parallel.balances == serial.balances}")
print(f"total balance conserved (sum = {parallel.total()})")

work = 0.001
t0 = time.perf_counter()
execute_serial(block, WalletState(), per_txn_work=work)
serial_s = time.perf_counter() - t0
t0 = time.perf_counter()
execute_plan(result.plan, block, WalletState(), num_threads=8, per_txn_work=work)
parallel_s = time.perf_counter() - t0
print(
    f"\nwith {work * 1e3:.0f} ms simulated work per transaction: "
    f"serial {serial_s:.2f} s, 8-thread plan {parallel_s:.2f} s "
    f"({serial_s / parallel_s:.1f}x speedup)"
)
