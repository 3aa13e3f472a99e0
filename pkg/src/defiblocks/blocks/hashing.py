"""
Canonical building-block hash.

The canonical string lists one "label:outdegree:method" entry per subtree
vertex in execution order, joined by "|". Methods are 8 lowercase hex chars
or "none". The hash is the SHA-256 hex digest of the UTF-8 string.
"""

from typing import Optional, Sequence
import hashlib

from defiblocks.errors import BlockHashError
from defiblocks.ingest.records import METHOD_ID_RE

NO_METHOD = "none"


def _method_token(method_id: Optional[str]) -> str:
    if method_id is None or method_id == NO_METHOD:
        return NO_METHOD
    token = method_id.lower()
    if not METHOD_ID_RE.match(token):
        raise BlockHashError(f"invalid method id {method_id!r}")
    return token


def _label_token(label: str) -> str:
    return label.lower() if label.startswith(("0x", "0X")) else label


def canonical_string(
    vertex_labels: Sequence[str],
    outdegrees: Sequence[int],
    method_ids: Sequence[Optional[str]],
) -> str:
    """
    Build the canonical string of a block.

    Raises:
        BlockHashError: On length mismatch, negative outdegree or bad method id.
    """
    if not (len(vertex_labels) == len(outdegrees) == len(method_ids)):
        raise BlockHashError(
            f"length mismatch: {len(vertex_labels)} labels, {len(outdegrees)} outdegrees, "
            f"{len(method_ids)} method ids"
        )
    entries = []
    for label, degree, method in zip(vertex_labels, outdegrees, method_ids):
        if degree < 0:
            raise BlockHashError(f"negative outdegree {degree}")
        entries.append(f"{_label_token(label)}:{int(degree)}:{_method_token(method)}")
    return "|".join(entries)


def block_hash(
    vertex_labels: Sequence[str],
    outdegrees: Sequence[int],
    method_ids: Sequence[Optional[str]],
) -> str:
    """
    SHA-256 of the canonical string, as 64 lowercase hex chars.

    Args:
        vertex_labels: Labels in ascending t order of the originating edges.
        outdegrees: Outdegree of each vertex within the block.
        method_ids: Method id of each vertex's incoming edge.

    Returns:
        Hex digest.
    """
    text = canonical_string(vertex_labels, outdegrees, method_ids)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
