"""Trace ingestion: record parsing, contract registry, trace tree assembly."""

from defiblocks.ingest.parser import dump_records, parse_traces
from defiblocks.ingest.records import (
    TRACE_COLUMNS,
    TraceRecord,
    TraceStatus,
    TraceType,
)
from defiblocks.ingest.registry import (
    ERC20_SELECTORS,
    ContractInfo,
    ContractRegistry,
    build_contract_registry,
    load_erc20_flags,
    scan_erc20_bytecode,
)
from defiblocks.ingest.trees import (
    TraceEdge,
    TraceTree,
    TraceVertex,
    VertexKind,
    assemble_trace_trees,
    assemble_tree,
)

__all__ = [
    "ERC20_SELECTORS",
    "TRACE_COLUMNS",
    "ContractInfo",
    "ContractRegistry",
    "TraceEdge",
    "TraceRecord",
    "TraceStatus",
    "TraceTree",
    "TraceType",
    "TraceVertex",
    "VertexKind",
    "assemble_trace_trees",
    "assemble_tree",
    "build_contract_registry",
    "dump_records",
    "load_erc20_flags",
    "parse_traces",
    "scan_erc20_bytecode",
]
