"""
Trace file parsing.

Format A is a comma-separated file with a header row naming exactly the trace
columns. Format B is JSON lines with the same field names. Both are streamed
in chunks; malformed rows become diagnostics carrying their line numbers.
"""

from pathlib import Path
from typing import IO, Any, Iterable, Iterator, Optional, Union
import json
import math

import pandas as pd
from pydantic import ValidationError

from defiblocks.config.schema import TraceFormat
from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.errors import TraceFormatError
from defiblocks.ingest.records import TRACE_COLUMNS, TraceRecord
from defiblocks.logging.setup import get_logger
from defiblocks.utils.io import write_table

logger = get_logger(__name__)

TraceSource = Union[str, Path, IO[bytes]]

DEFAULT_CHUNK_ROWS = 100_000
# Marks a delimited row with more fields than the header.
_OVERFLOW = "\x00overflow"


def parse_traces(
    source: TraceSource,
    fmt: TraceFormat = TraceFormat.DELIMITED,
    diagnostics: Optional[DiagnosticCollector] = None,
    chunk_rows: int = DEFAULT_CHUNK_ROWS,
) -> Iterator[TraceRecord]:
    """
    Parse a trace file into records in file order.

    Args:
        source: Path or binary stream.
        fmt: Declared file format.
        diagnostics: Collector for rejected rows (created if omitted).
        chunk_rows: Rows read per chunk.

    Yields:
        Valid, unique TraceRecords.

    Raises:
        TraceFormatError: If the file is unreadable or its header is wrong.
    """
    name = _source_name(source)
    diagnostics = diagnostics if diagnostics is not None else DiagnosticCollector(source=name)
    seen: set[tuple[str, tuple[int, ...]]] = set()
    n_rows = n_kept = 0

    if fmt is TraceFormat.DELIMITED:
        rows = _iter_delimited(source, chunk_rows, diagnostics)
    else:
        rows = _iter_jsonl(source, diagnostics)

    for line, raw in rows:
        n_rows += 1
        try:
            record = TraceRecord(**raw)
        except ValidationError as exc:
            err = exc.errors()[0]
            field = ".".join(str(p) for p in err["loc"]) or "row"
            diagnostics.report(
                "invalid_row", f"{field}: {err['msg']}", line=line, source=name, field=field
            )
            continue

        if record.key in seen:
            diagnostics.report(
                "duplicate_trace",
                "duplicate (tx_hash, trace_address)",
                line=line,
                source=name,
                tx_hash=record.tx_hash,
                trace_address=raw.get("trace_address", ""),
            )
            continue

        seen.add(record.key)
        n_kept += 1
        yield record

    logger.info("traces_parsed", source=name, rows=n_rows, records=n_kept, rejected=n_rows - n_kept)


def _source_name(source: TraceSource) -> str:
    if isinstance(source, (str, Path)):
        return str(source)
    return str(getattr(source, "name", "<stream>"))


def _iter_delimited(
    source: TraceSource,
    chunk_rows: int,
    diagnostics: DiagnosticCollector,
) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (line number, raw row) pairs of a delimited trace file."""
    name = _source_name(source)

    def overflow(fields: list[str]) -> list[str]:
        # Keeps the row in place so later line numbers stay exact.
        return [_OVERFLOW, str(len(fields))] + [""] * (len(TRACE_COLUMNS) - 2)

    try:
        reader = pd.read_csv(
            source,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            chunksize=chunk_rows,
            engine="python",
            on_bad_lines=overflow,
        )
    except pd.errors.EmptyDataError:
        return
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise TraceFormatError(f"cannot read trace file {name}: {exc}") from exc

    offset = 0
    checked = False
    try:
        for chunk in reader:
            if not checked:
                _check_columns(list(chunk.columns), name)
                if not isinstance(chunk.index, pd.RangeIndex):
                    # pandas reads an overlong first row as an index column.
                    raise TraceFormatError(f"{name}:2: more fields than the header")
                checked = True
            for i, values in enumerate(chunk.itertuples(index=False, name=None)):
                raw = {col: _cell(v) for col, v in zip(TRACE_COLUMNS, values)}
                # Header is line 1.
                line = offset + i + 2
                if raw["tx_hash"] == _OVERFLOW:
                    diagnostics.report(
                        "invalid_row",
                        f"expected {len(TRACE_COLUMNS)} fields, got {raw['block_number']}",
                        line=line,
                        source=name,
                        field="row",
                    )
                    continue
                if all(v == "" for v in raw.values()):
                    continue
                yield line, raw
            offset += len(chunk)
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise TraceFormatError(f"cannot read trace file {name}: {exc}") from exc


def _iter_jsonl(
    source: TraceSource,
    diagnostics: DiagnosticCollector,
) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (line number, raw row) pairs of a JSON-lines trace file."""
    name = _source_name(source)
    try:
        if isinstance(source, (str, Path)):
            with open(source, "rb") as f:
                lines = f.read().splitlines()
        else:
            lines = source.read().splitlines()
    except OSError as exc:
        raise TraceFormatError(f"cannot read trace file {name}: {exc}") from exc

    for idx, line_bytes in enumerate(lines, start=1):
        if not line_bytes.strip():
            continue
        try:
            obj = json.loads(line_bytes)
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            diagnostics.report("invalid_row", f"not a JSON record ({exc})", line=idx, source=name, field="row")
            continue
        if not isinstance(obj, dict):
            diagnostics.report("invalid_row", "expected a JSON object", line=idx, source=name, field="row")
            continue
        yield idx, {col: _cell(obj.get(col)) for col in TRACE_COLUMNS}


def _check_columns(columns: list[str], name: str) -> None:
    expected = list(TRACE_COLUMNS)
    if [c.strip() for c in columns] != expected:
        raise TraceFormatError(
            f"{name}: header must be exactly {','.join(expected)}; got {','.join(columns)}"
        )


def _cell(value: Any) -> Any:
    """Normalize a raw cell: missing values become empty strings."""
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (list, tuple)):
        return list(value)
    return str(value)


def dump_records(records: Iterable[TraceRecord], path: Path) -> int:
    """
    Write records in the canonical delimited format.

    Args:
        records: Records to write, in the desired order.
        path: Output path.

    Returns:
        Number of records written.
    """
    return write_table((r.to_row() for r in records), path, TRACE_COLUMNS)
