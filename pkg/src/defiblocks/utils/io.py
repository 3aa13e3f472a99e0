"""
I/O utilities for defiblocks.

Provides YAML and table helpers, atomic writes, and file digests used by the
stage manifests.
"""

from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Optional, Sequence
import hashlib
import json
import os
import tempfile

import pandas as pd
import yaml


DIGEST_CHUNK_BYTES = 1 << 20


def ensure_dir(path: Path) -> Path:
    """
    Ensure directory exists, creating if necessary.

    Args:
        path: Directory path.

    Returns:
        The same path for chaining.
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def load_yaml(path: Path) -> dict[str, Any]:
    """
    Load YAML file.

    Args:
        path: Path to YAML file.

    Returns:
        Parsed YAML content.

    Raises:
        FileNotFoundError: If file doesn't exist.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"YAML file not found: {path}")

    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def save_yaml(data: dict[str, Any], path: Path) -> None:
    """
    Save data to YAML file atomically.

    Args:
        data: Data to save.
        path: Output path.
    """
    atomic_write(path, yaml.safe_dump(data, default_flow_style=False, sort_keys=False))


def atomic_write(path: Path, content: str) -> None:
    """
    Write content atomically using temp file + rename.

    Args:
        path: Target file path.
        content: Content to write.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fd, temp_path = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        os.replace(temp_path, path)
    except Exception:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        raise


def file_digest(path: Path) -> str:
    """
    Compute the SHA-256 hex digest of a file.

    Args:
        path: File to hash.

    Returns:
        Lowercase hex digest.
    """
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(DIGEST_CHUNK_BYTES), b""):
            h.update(chunk)
    return h.hexdigest()


def write_table(
    rows: Iterable[Mapping[str, Any]],
    path: Path,
    columns: Sequence[str],
    float_format: Optional[str] = None,
) -> int:
    """
    Write rows as a comma-separated table with a fixed header.

    The header is always written, so an empty table is still a valid dump.

    Args:
        rows: Row mappings; keys outside `columns` are ignored.
        path: Output path.
        columns: Column order.
        float_format: Optional printf-style float format (e.g. '%.4f').

    Returns:
        Number of data rows written.
    """
    frame = pd.DataFrame(list(rows), columns=list(columns))
    write_frame(frame, path, float_format=float_format)
    return len(frame)


def write_frame(frame: pd.DataFrame, path: Path, float_format: Optional[str] = None, index: bool = False) -> None:
    """Write a DataFrame as CSV atomically with LF line endings."""
    content = frame.to_csv(index=index, lineterminator="\n", float_format=float_format)
    atomic_write(path, content)


def read_table(path: Path) -> pd.DataFrame:
    """
    Read a table written by write_table with every column as string.

    Args:
        path: CSV path.

    Returns:
        DataFrame of strings; missing cells are empty strings.
    """
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def write_jsonl(records: Iterable[Mapping[str, Any]], path: Path) -> int:
    """
    Write records as JSON lines with sorted keys.

    Returns:
        Number of records written.
    """
    lines = [json.dumps(dict(r), sort_keys=True, separators=(",", ":")) for r in records]
    atomic_write(path, "".join(line + "\n" for line in lines))
    return len(lines)


def read_jsonl(path: Path) -> Iterator[dict[str, Any]]:
    """Iterate the records of a JSON-lines file, skipping blank lines."""
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                yield json.loads(line)
