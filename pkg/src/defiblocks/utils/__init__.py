"""Utility modules for defiblocks."""

from defiblocks.utils.io import (
    atomic_write,
    ensure_dir,
    file_digest,
    load_yaml,
    read_jsonl,
    read_table,
    save_yaml,
    write_jsonl,
    write_table,
)
from defiblocks.utils.parallel import chunked, derive_seed, ordered_map

__all__ = [
    "atomic_write",
    "chunked",
    "derive_seed",
    "ensure_dir",
    "file_digest",
    "load_yaml",
    "ordered_map",
    "read_jsonl",
    "read_table",
    "save_yaml",
    "write_jsonl",
    "write_table",
]
