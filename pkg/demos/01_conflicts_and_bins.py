"""Walk through conflict detection and bin assignment on a tiny block.

Two wallet transfers conflict when they touch a common account with at
least one write involved; read-read overlap alone is harmless. Every
transaction is then assigned the lowest bin strictly above all of its
earlier conflicts, so a bin never holds two conflicting transactions.
"""

from binsched import (
    TransferPayload,
    Variant,
    bin_oracle,
    check_conflicts,
    conflict_sets_oracle,
    make_transaction,
    schedule,
)

block = [
    make_transaction(0, TransferPayload("alice", "bob", 10)),
    make_transaction(1, TransferPayload("carol", "dave", 10)),
    make_transaction(2, TransferPayload("bob", "erin", 5)),
    make_transaction(3, TransferPayload("erin", "alice", 1)),
]

print("pairwise conflicts (write-involving overlap):")
for a in block:
    for b in block:
        if a.id < b.id and check_conflicts(a, b):
            shared = (a.read_set | a.write_set) & (b.read_set | b.write_set)
            print(f"  T{a.id} ~ T{b.id}  (shared accounts: {sorted(shared)})")

print("\nlower conflict sets (what phase 1 publishes):")
for txn, conflicts in zip(block, conflict_sets_oracle(block)):
    print(f"  T{txn.id}: {sorted(conflicts) or 'none'}")

print("\nbin rule: 1 + max(bin of earlier conflicts), empty set -> bin 0")
print(f"  serial oracle says: {bin_oracle(block)}")

result = schedule(block, Variant.LOCKFREE, num_threads=4)
print(f"  4-thread lockfree run: {result.assignment.initial_bin_list()}")
print("\nexecution plan (bins execute in order, each bin in parallel):")
for b, row in enumerate(result.plan.bin_matrix):
    print(f"  bin {b}: transactions {list(row)}")
