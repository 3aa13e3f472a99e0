"""
Contract registry.

Maps every known code account to its creator, creation block and ERC20 flag.
Built from creation traces; ERC20 flags come from a precomputed address list
or from a scan of deployed bytecode for the mandatory ERC20 selectors.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.errors import TraceFormatError
from defiblocks.ingest.records import TraceRecord, TraceType, normalize_address
from defiblocks.logging.setup import get_logger
from defiblocks.utils.io import read_table, write_table

logger = get_logger(__name__)

# totalSupply, balanceOf, transfer, transferFrom, approve, allowance
ERC20_SELECTORS: tuple[str, ...] = (
    "18160ddd",
    "70a08231",
    "a9059cbb",
    "23b872dd",
    "095ea7b3",
    "dd62ed3e",
)

REGISTRY_COLUMNS = ("address", "is_contract", "creator", "created_block", "is_erc20")


@dataclass(frozen=True)
class ContractInfo:
    """
    Registry entry for one address.

    Attributes:
        is_contract: Address holds code.
        creator: Address that created it, if known.
        created_block: Block of creation, if known.
        is_erc20: Code implements the mandatory ERC20 interface.
    """

    is_contract: bool = True
    creator: Optional[str] = None
    created_block: Optional[int] = None
    is_erc20: bool = False


@dataclass
class ContractRegistry:
    """
    Address → ContractInfo map with creator-link queries.

    Attributes:
        entries: Registry entries keyed by lowercase address.
    """

    entries: dict[str, ContractInfo] = field(default_factory=dict)
    _children: Optional[dict[str, list[str]]] = field(default=None, repr=False, compare=False)

    def __contains__(self, address: object) -> bool:
        return address in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, address: str) -> Optional[ContractInfo]:
        """Look up an address."""
        return self.entries.get(address)

    def is_contract(self, address: Optional[str]) -> bool:
        """True if the address is a known code account."""
        info = self.entries.get(address) if address else None
        return info is not None and info.is_contract

    def is_erc20(self, address: Optional[str]) -> bool:
        """True if the address is a known ERC20 contract."""
        info = self.entries.get(address) if address else None
        return info is not None and info.is_erc20

    def creator_of(self, address: str) -> Optional[str]:
        """Direct creator of an address, if known."""
        info = self.entries.get(address)
        return info.creator if info else None

    def creator_chain(self, address: str) -> list[str]:
        """
        Walk creator links upward.

        Args:
            address: Start address (not included in the result).

        Returns:
            Creators from the direct creator to the outermost one. The walk
            stops before revisiting an address.
        """
        chain: list[str] = []
        visited = {address}
        current = self.creator_of(address)
        while current is not None and current not in visited:
            chain.append(current)
            visited.add(current)
            current = self.creator_of(current)
        return chain

    def children_of(self, address: str) -> list[str]:
        """Addresses created directly by `address`, sorted."""
        if self._children is None:
            children: dict[str, list[str]] = {}
            for addr, info in self.entries.items():
                if info.creator is not None:
                    children.setdefault(info.creator, []).append(addr)
            for lst in children.values():
                lst.sort()
            self._children = children
        return list(self._children.get(address, ()))

    def set_erc20(self, addresses: Iterable[str]) -> int:
        """
        Flag addresses as ERC20 contracts.

        Unknown addresses are added as contracts without creator.

        Returns:
            Number of flagged addresses.
        """
        n = 0
        for address in addresses:
            info = self.entries.get(address, ContractInfo())
            self.entries[address] = replace(info, is_contract=True, is_erc20=True)
            n += 1
        return n

    def erc20_count(self) -> int:
        """Number of ERC20-flagged contracts."""
        return sum(1 for info in self.entries.values() if info.is_erc20)

    def rows(self) -> Iterator[dict[str, object]]:
        """Registry rows sorted by address."""
        for address in sorted(self.entries):
            info = self.entries[address]
            yield {
                "address": address,
                "is_contract": int(info.is_contract),
                "creator": info.creator or "",
                "created_block": "" if info.created_block is None else info.created_block,
                "is_erc20": int(info.is_erc20),
            }

    def dump(self, path: Path) -> int:
        """Write the registry as a table; returns the entry count."""
        return write_table(self.rows(), path, REGISTRY_COLUMNS)

    @classmethod
    def load(cls, path: Path) -> "ContractRegistry":
        """Read a registry written by `dump`."""
        frame = read_table(path)
        entries: dict[str, ContractInfo] = {}
        for row in frame.itertuples(index=False):
            entries[row.address] = ContractInfo(
                is_contract=row.is_contract == "1",
                creator=row.creator or None,
                created_block=int(row.created_block) if row.created_block else None,
                is_erc20=row.is_erc20 == "1",
            )
        return cls(entries=entries)


def build_contract_registry(
    creation_records: Iterable[TraceRecord],
    erc20_flags: Optional[Union[str, Path, Iterable[str]]] = None,
    diagnostics: Optional[DiagnosticCollector] = None,
) -> ContractRegistry:
    """
    Build the registry from creation traces.

    Creations are applied in (block_number, trace_address) order. An address
    created twice with different creators keeps the first creator. Failed
    creations and non-create rows never contribute creator links.

    Args:
        creation_records: Creation traces (other trace types are skipped).
        erc20_flags: ERC20 flag file path or an address collection.
        diagnostics: Collector for conflicts.

    Returns:
        The contract registry.
    """
    diagnostics = diagnostics if diagnostics is not None else DiagnosticCollector(source="registry")
    registry = ContractRegistry()
    skipped_type = skipped_failed = 0

    creates: list[TraceRecord] = []
    for record in creation_records:
        if record.trace_type is not TraceType.CREATE:
            skipped_type += 1
        elif record.failed:
            skipped_failed += 1
        elif record.to_address is None:
            diagnostics.report(
                "create_without_address",
                "successful creation without created address",
                tx_hash=record.tx_hash,
            )
        else:
            creates.append(record)

    creates.sort(key=lambda r: (r.block_number, r.trace_address, r.tx_hash))
    for record in creates:
        created = record.to_address
        assert created is not None
        existing = registry.entries.get(created)
        if existing is None:
            registry.entries[created] = ContractInfo(
                is_contract=True,
                creator=record.from_address,
                created_block=record.block_number,
            )
        elif existing.creator != record.from_address:
            diagnostics.report(
                "creation_conflict",
                "address created twice with different creators; keeping the first",
                address=created,
                kept=existing.creator,
                rejected=record.from_address,
            )

    if skipped_type:
        logger.warning("non_create_rows_skipped", count=skipped_type)
    if skipped_failed:
        logger.info("failed_creations_skipped", count=skipped_failed)

    if erc20_flags is not None:
        flags = (
            load_erc20_flags(Path(erc20_flags), diagnostics)
            if isinstance(erc20_flags, (str, Path))
            else erc20_flags
        )
        registry.set_erc20(flags)

    logger.info(
        "registry_built",
        contracts=len(registry),
        erc20=registry.erc20_count(),
        conflicts=diagnostics.count("creation_conflict"),
    )
    return registry


def load_erc20_flags(path: Path, diagnostics: Optional[DiagnosticCollector] = None) -> frozenset[str]:
    """
    Read an ERC20 flag file (one address per line).

    Invalid lines become diagnostics.

    Raises:
        TraceFormatError: If the file cannot be read.
    """
    diagnostics = diagnostics if diagnostics is not None else DiagnosticCollector(source=str(path))
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TraceFormatError(f"cannot read ERC20 flag file {path}: {exc}") from exc

    flags: set[str] = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            flags.add(normalize_address(line))
        except ValueError as exc:
            diagnostics.report("invalid_erc20_flag", str(exc), line=line_no)
    return frozenset(flags)


def scan_erc20_bytecode(path: Path, diagnostics: Optional[DiagnosticCollector] = None) -> frozenset[str]:
    """
    Identify ERC20 contracts from deployed bytecode.

    The file is a table with columns address, bytecode. An address is ERC20
    iff its bytecode contains all mandatory ERC20 selectors.

    Raises:
        TraceFormatError: If the file cannot be read or lacks the columns.
    """
    diagnostics = diagnostics if diagnostics is not None else DiagnosticCollector(source=str(path))
    try:
        frame = read_table(path)
    except (OSError, ValueError) as exc:
        raise TraceFormatError(f"cannot read bytecode file {path}: {exc}") from exc
    if not {"address", "bytecode"} <= set(frame.columns):
        raise TraceFormatError(f"{path}: expected columns address, bytecode")

    flags: set[str] = set()
    for i, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            address = normalize_address(row.address)
        except ValueError as exc:
            diagnostics.report("invalid_bytecode_row", str(exc), line=i)
            continue
        if has_erc20_selectors(row.bytecode):
            flags.add(address)
    logger.info("erc20_bytecode_scanned", contracts=len(frame), erc20=len(flags))
    return frozenset(flags)


def has_erc20_selectors(bytecode: str) -> bool:
    """True if hex bytecode contains every mandatory ERC20 selector."""
    code = bytecode.lower()
    return all(sel in code for sel in ERC20_SELECTORS)
