"""
Trace record model.

A TraceRecord is one external or internal transaction row of a pre-exported
trace file. Field parsing and validation happen here so that the parser only
deals with rows and line numbers.
"""

from enum import Enum
from typing import Any, Optional
import re

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


ADDRESS_RE = re.compile(r"^0x[0-9a-f]{40}$")
TX_HASH_RE = re.compile(r"^0x[0-9a-f]{64}$")
METHOD_ID_RE = re.compile(r"^[0-9a-f]{8}$")

TRACE_COLUMNS: tuple[str, ...] = (
    "tx_hash",
    "block_number",
    "from_address",
    "to_address",
    "trace_address",
    "trace_type",
    "method_id",
    "value",
    "status",
)


class TraceType(str, Enum):
    """Kind of trace."""

    CALL = "call"
    CREATE = "create"
    SELFDESTRUCT = "selfdestruct"


class TraceStatus(str, Enum):
    """Execution outcome of a trace."""

    SUCCESS = "success"
    FAILED = "failed"


# Spellings used by common ETL exports.
_TRACE_TYPE_ALIASES = {"suicide": "selfdestruct"}
_STATUS_ALIASES = {"1": "success", "0": "failed", "true": "success", "false": "failed"}


def normalize_address(value: Any, field_name: str = "address") -> str:
    """
    Normalize and validate a 20-byte hex address.

    Args:
        value: Raw value.
        field_name: Name used in error messages.

    Returns:
        Lowercase address with 0x prefix.

    Raises:
        ValueError: If the value is not a 20-byte hex address.
    """
    text = str(value).strip().lower()
    if not ADDRESS_RE.match(text):
        raise ValueError(f"invalid {field_name} {value!r} (expected 0x + 40 hex chars)")
    return text


def normalize_method_id(value: Any) -> Optional[str]:
    """
    Normalize a 4-byte method id to 8 lowercase hex chars.

    Empty values mean "no method id".

    Raises:
        ValueError: If the value is not 4 bytes of hex.
    """
    if value is None:
        return None
    text = str(value).strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    if not text:
        return None
    if not METHOD_ID_RE.match(text):
        raise ValueError(f"invalid method_id {value!r} (expected 8 hex chars)")
    return text


def parse_trace_address(value: Any) -> tuple[int, ...]:
    """
    Parse a trace address from its dot-joined or list form.

    Raises:
        ValueError: If any component is not a non-negative integer.
    """
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        parts = [str(p) for p in value]
    else:
        text = str(value).strip()
        if not text:
            return ()
        parts = text.split(".")
    try:
        path = tuple(int(p) for p in parts)
    except ValueError:
        raise ValueError(f"invalid trace_address {value!r}") from None
    if any(p < 0 for p in path):
        raise ValueError(f"invalid trace_address {value!r} (negative component)")
    return path


def format_trace_address(path: tuple[int, ...]) -> str:
    """Format a trace address in its dot-joined form."""
    return ".".join(str(p) for p in path)


class TraceRecord(BaseModel):
    """
    One external or internal transaction.

    Attributes:
        tx_hash: 32-byte transaction id (0x + 64 hex chars).
        block_number: Block the transaction was included in.
        from_address: Caller.
        to_address: Callee; None for a creation whose address is unknown.
        trace_address: Nesting position; empty for the external transaction.
        trace_type: call, create or selfdestruct.
        method_id: First 4 bytes of the call input as 8 hex chars, or None.
        value: Transferred wei.
        status: success or failed.
    """

    model_config = ConfigDict(frozen=True)

    tx_hash: str
    block_number: int = Field(ge=0)
    from_address: str
    to_address: Optional[str] = None
    trace_address: tuple[int, ...] = ()
    trace_type: TraceType = TraceType.CALL
    method_id: Optional[str] = None
    value: int = Field(default=0, ge=0)
    status: TraceStatus = TraceStatus.SUCCESS

    @field_validator("tx_hash", mode="before")
    @classmethod
    def _check_tx_hash(cls, v: Any) -> str:
        text = str(v).strip().lower()
        if not TX_HASH_RE.match(text):
            raise ValueError(f"invalid tx_hash {v!r} (expected 0x + 64 hex chars)")
        return text

    @field_validator("from_address", mode="before")
    @classmethod
    def _check_from(cls, v: Any) -> str:
        return normalize_address(v, "from_address")

    @field_validator("to_address", mode="before")
    @classmethod
    def _check_to(cls, v: Any) -> Optional[str]:
        if v is None or str(v).strip() == "":
            return None
        return normalize_address(v, "to_address")

    @field_validator("trace_address", mode="before")
    @classmethod
    def _check_trace_address(cls, v: Any) -> tuple[int, ...]:
        return parse_trace_address(v)

    @field_validator("trace_type", mode="before")
    @classmethod
    def _check_trace_type(cls, v: Any) -> str:
        text = str(v).strip().lower()
        return _TRACE_TYPE_ALIASES.get(text, text)

    @field_validator("method_id", mode="before")
    @classmethod
    def _check_method_id(cls, v: Any) -> Optional[str]:
        return normalize_method_id(v)

    @field_validator("block_number", "value", mode="before")
    @classmethod
    def _check_integer(cls, v: Any) -> Any:
        if isinstance(v, str):
            text = v.strip()
            if not text:
                return 0
            if not text.isdigit():
                raise ValueError(f"expected a non-negative integer, got {v!r}")
            return int(text)
        return v

    @field_validator("status", mode="before")
    @classmethod
    def _check_status(cls, v: Any) -> str:
        text = str(v).strip().lower()
        return _STATUS_ALIASES.get(text, text)

    @model_validator(mode="after")
    def _check_consistency(self) -> "TraceRecord":
        if self.to_address is None and self.trace_type is not TraceType.CREATE:
            raise ValueError(f"to_address is required for {self.trace_type.value} traces")
        if self.trace_type is TraceType.SELFDESTRUCT and self.method_id is not None:
            raise ValueError("selfdestruct traces carry no method_id")
        return self

    @property
    def is_external(self) -> bool:
        """True for the external transaction of its tx_hash."""
        return not self.trace_address

    @property
    def failed(self) -> bool:
        """True if this trace reverted."""
        return self.status is TraceStatus.FAILED

    @property
    def key(self) -> tuple[str, tuple[int, ...]]:
        """Unique identity of the record within a corpus."""
        return (self.tx_hash, self.trace_address)

    def to_row(self) -> dict[str, str]:
        """Canonical delimited-format row."""
        return {
            "tx_hash": self.tx_hash,
            "block_number": str(self.block_number),
            "from_address": self.from_address,
            "to_address": self.to_address or "",
            "trace_address": format_trace_address(self.trace_address),
            "trace_type": self.trace_type.value,
            "method_id": self.method_id or "",
            "value": str(self.value),
            "status": self.status.value,
        }
