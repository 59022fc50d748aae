"""Shared test fixtures: block builders and hypothesis strategies."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from binsched import (
    Transaction,
    TransferPayload,
    WorkloadSpec,
    generate_workload,
    make_transaction,
)


def transfer(a, b, amount=10):
    return TransferPayload(a, b, amount)


def wallet_block(pairs):
    """Build a block from a list of (from, to) or (from, to, amount)."""
    txns = []
    for i, pair in enumerate(pairs):
        txns.append(make_transaction(i, transfer(*pair)))
    return txns


def disjoint_block(n):
    return wallet_block([(f"d{i}a", f"d{i}b") for i in range(n)])


def chain_block(n):
    """T_i transfers from account i to i+1, so consecutive txns conflict."""
    return wallet_block([(f"n{i}", f"n{i + 1}") for i in range(n)])


def clique_block(n):
    """Every transaction touches the same pair: a full conflict clique."""
    return wallet_block([("X", "Y")] * n)


def random_wallet_block(seed, max_n=120):
    rng = random.Random(seed)
    spec = WorkloadSpec(
        n_txns=rng.randint(1, max_n),
        n_accounts=rng.randint(2, 40),
        dependency_pct=rng.choice([0, 10, 30, 50, 80, 100]),
        seed=rng.randint(0, 2**32),
    )
    return generate_workload(spec)


_addresses = st.integers(min_value=0, max_value=10)


@st.composite
def access_set_blocks(draw, max_n=10):
    """Blocks with arbitrary read/write sets, including read- or write-only."""
    n = draw(st.integers(min_value=0, max_value=max_n))
    txns = []
    for i in range(n):
        reads = frozenset(draw(st.sets(_addresses, max_size=3)))
        writes = frozenset(draw(st.sets(_addresses, max_size=3)))
        txns.append(Transaction(id=i, read_set=reads, write_set=writes))
    return txns


@st.composite
def wallet_blocks(draw, max_n=60):
    spec = WorkloadSpec(
        n_txns=draw(st.integers(min_value=0, max_value=max_n)),
        n_accounts=draw(st.integers(min_value=2, max_value=30)),
        dependency_pct=draw(st.sampled_from([0, 20, 50, 100])),
        seed=draw(st.integers(min_value=0, max_value=2**20)),
    )
    return generate_workload(spec)
