"""
Parallel helpers for defiblocks.

Shardable work is mapped over worker pools with results returned in
submission order, so merges are deterministic regardless of worker count.
"""

from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from typing import Callable, Iterable, Iterator, Sequence, TypeVar
import hashlib
import itertools

T = TypeVar("T")
R = TypeVar("R")


def chunked(items: Iterable[T], size: int) -> Iterator[list[T]]:
    """
    Split an iterable into lists of at most `size` items.

    Args:
        items: Input items.
        size: Maximum chunk size (>= 1).

    Yields:
        Consecutive chunks.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    it = iter(items)
    while chunk := list(itertools.islice(it, size)):
        yield chunk


def ordered_map(
    func: Callable[[T], R],
    items: Sequence[T],
    workers: int = 1,
    processes: bool = True,
) -> list[R]:
    """
    Map a function over items, optionally in a worker pool.

    Results are always returned in input order.

    Args:
        func: Picklable callable when `processes` is True.
        items: Work items.
        workers: Worker count; 1 runs serially in-process.
        processes: Use a process pool (CPU-bound work) instead of threads.

    Returns:
        Results in input order.
    """
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    executor_cls = ProcessPoolExecutor if processes else ThreadPoolExecutor
    with executor_cls(max_workers=workers) as ex:
        return list(ex.map(func, items))


def derive_seed(master_seed: int, name: str) -> int:
    """
    Derive a stable 32-bit seed from a master seed and a name.

    Args:
        master_seed: Master seed.
        name: Stage or task name.

    Returns:
        Non-negative integer seed.
    """
    digest = hashlib.sha256(f"{master_seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:4], "big")
