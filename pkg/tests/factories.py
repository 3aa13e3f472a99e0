"""Builders for synthetic records, trees and seed sets used across the tests."""

from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from defiblocks.groundtruth.seeds import Category, ExtendedSeedSet, Origin, SeedEntry
from defiblocks.ingest.records import TraceRecord
from defiblocks.ingest.registry import ContractInfo, ContractRegistry

FIXTURE_DIR = Path(__file__).parent / "data" / "fixture_corpus"

# Aggregator swap actors.
USER = "0x8ba1f109551bd432803012645ac136ddd64dba72"
ROUTER = "0x11111112542d85b3ef69ae05771c2dccff4faa26"
BAT = "0x0d8775f648430679a709e98d2b0cb6250d2887ef"
WETH = "0xc02aaa39b223fe8d0a0e5c4f27ead9083c756cc2"
USDT = "0xdac17f958d2ee523a2206206994597c13d831ec7"
UNI_FACTORY = "0x5c69bee701ef814a2b6a3edd4b1652cb9cc5aa6f"
SUSHI_FACTORY = "0xc0aee478e3658e2610c5f7a4a2e1777ce9e4f2ac"
UNI_PAIR = "0xb6909b960dbbe7392d405429eb2b3649752b4838"
SUSHI_PAIR = "0x06da0fd433c1a5d7a4faa01111c044910a184553"
SWAP_TX = "0x" + "f1" * 32

SWAP = "022c0d9f"
TRANSFER = "a9059cbb"
TRANSFER_FROM = "23b872dd"
BALANCE_OF = "70a08231"


def addr(i: int) -> str:
    return f"0x{i:040x}"


def txh(i: int) -> str:
    return f"0x{i:064x}"


def record(
    tx: str,
    frm: str,
    to: Optional[str],
    path: Sequence[int] = (),
    method: Optional[str] = None,
    trace_type: str = "call",
    status: str = "success",
    block: int = 1,
    value: int = 0,
) -> TraceRecord:
    return TraceRecord(
        tx_hash=tx,
        block_number=block,
        from_address=frm,
        to_address=to,
        trace_address=tuple(path),
        trace_type=trace_type,
        method_id=method,
        value=value,
        status=status,
    )


def contracts(*addresses: str, erc20: Sequence[str] = ()) -> ContractRegistry:
    """Registry where every given address is a contract without creator."""
    entries = {a: ContractInfo() for a in addresses}
    for a in erc20:
        entries[a] = ContractInfo(is_erc20=True)
    return ContractRegistry(entries=entries)


def labels(mapping: dict[str, str], extended: Sequence[str] = ()) -> ExtendedSeedSet:
    """Extended seed set from address → protocol, all in the dex category."""
    return ExtendedSeedSet(
        entries={
            a: SeedEntry(
                address=a,
                protocol=p,
                category=Category.DEX,
                label=p,
                origin=Origin.EXTENDED if a in extended else Origin.SEED,
            )
            for a, p in mapping.items()
        }
    )


def random_tx_records(
    rng: np.random.Generator,
    tx: str,
    pool: Sequence[str],
    max_vertices: int = 12,
    methods: Sequence[Optional[str]] = (SWAP, TRANSFER, BALANCE_OF, None),
) -> list[TraceRecord]:
    """
    Records of one random transaction over an address pool.

    The tree has between 2 and `max_vertices` vertices; the root caller is an
    address outside the pool.
    """
    n = int(rng.integers(2, max_vertices + 1))
    paths: list[tuple[int, ...]] = [()]
    kids: dict[tuple[int, ...], int] = {}
    callee: dict[tuple[int, ...], str] = {(): pool[int(rng.integers(len(pool)))]}
    for _ in range(n - 2):
        parent = paths[int(rng.integers(len(paths)))]
        path = parent + (kids.get(parent, 0),)
        kids[parent] = kids.get(parent, 0) + 1
        paths.append(path)
        callee[path] = pool[int(rng.integers(len(pool)))]
    caller = addr(0xE0A)
    out = []
    for path in paths:
        frm = caller if not path else callee[path[:-1]]
        method = methods[int(rng.integers(len(methods)))]
        out.append(record(tx, frm, callee[path], path, method))
    rng.shuffle(out)
    return out
