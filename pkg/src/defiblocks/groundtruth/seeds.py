"""
Seed labels.

A seed file assigns curated code-account addresses to protocols. After
extension the same structure also holds addresses deployed by seeds.
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

import pandas as pd

from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.errors import SeedFormatError
from defiblocks.ingest.records import normalize_address
from defiblocks.logging.setup import get_logger
from defiblocks.utils.io import read_table, write_table

logger = get_logger(__name__)

SEED_COLUMNS = ("address", "protocol", "category", "label")
SEED_SET_COLUMNS = (*SEED_COLUMNS, "origin")
SEED_COUNT_COLUMNS = ("scope", "name", "category", "seed", "extended", "total")


class Category(str, Enum):
    """Protocol category."""

    ASSETS = "assets"
    DERIVATIVES = "derivatives"
    DEX = "dex"
    LENDING = "lending"


class Origin(str, Enum):
    """Where a label came from."""

    SEED = "seed"
    EXTENDED = "extended"


@dataclass(frozen=True)
class SeedEntry:
    """
    Protocol label of one address.

    Attributes:
        address: Lowercase address.
        protocol: Protocol name, lowercase.
        category: Protocol category.
        label: Free-form label of the originating seed.
        origin: seed (loaded) or extended (derived from creator links).
    """

    address: str
    protocol: str
    category: Category
    label: str
    origin: Origin = Origin.SEED

    def to_row(self) -> dict[str, str]:
        return {
            "address": self.address,
            "protocol": self.protocol,
            "category": self.category.value,
            "label": self.label,
            "origin": self.origin.value,
        }


@dataclass
class SeedSet:
    """
    Address → SeedEntry map; every address appears once.

    Attributes:
        entries: Entries keyed by address.
    """

    entries: dict[str, SeedEntry] = field(default_factory=dict)

    def __contains__(self, address: object) -> bool:
        return address in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[SeedEntry]:
        for address in sorted(self.entries):
            yield self.entries[address]

    def get(self, address: Optional[str]) -> Optional[SeedEntry]:
        """Entry of an address, if labeled."""
        return self.entries.get(address) if address else None

    def protocol_of(self, address: Optional[str]) -> Optional[str]:
        """Protocol of an address, if labeled."""
        entry = self.get(address)
        return entry.protocol if entry else None

    def category_of(self, address: Optional[str]) -> Optional[Category]:
        """Category of an address, if labeled."""
        entry = self.get(address)
        return entry.category if entry else None

    def is_extended(self, address: Optional[str]) -> bool:
        """True if the address was labeled by extension."""
        entry = self.get(address)
        return entry is not None and entry.origin is Origin.EXTENDED

    def protocols(self) -> list[str]:
        """Sorted protocol names."""
        return sorted({e.protocol for e in self.entries.values()})

    def protocol_categories(self) -> dict[str, Category]:
        """Protocol → category (first entry in address order wins)."""
        result: dict[str, Category] = {}
        for entry in self:
            result.setdefault(entry.protocol, entry.category)
        return result

    def counts(self) -> dict[tuple[str, Origin], int]:
        """Entry count per (protocol, origin)."""
        counter = Counter((e.protocol, e.origin) for e in self.entries.values())
        return dict(sorted(counter.items(), key=lambda kv: (kv[0][0], kv[0][1].value)))

    def category_totals(self) -> dict[Category, int]:
        """Entry count per category (all categories present, zero-filled)."""
        counter = Counter(e.category for e in self.entries.values())
        return {c: counter.get(c, 0) for c in Category}

    def count_rows(self) -> Iterator[dict[str, object]]:
        """Per-protocol seed/extended counts followed by per-category totals."""
        by_protocol: dict[str, Counter[Origin]] = {}
        categories = self.protocol_categories()
        for (protocol, origin), n in self.counts().items():
            by_protocol.setdefault(protocol, Counter())[origin] = n
        for protocol in sorted(by_protocol):
            c = by_protocol[protocol]
            yield {
                "scope": "protocol",
                "name": protocol,
                "category": categories[protocol].value,
                "seed": c[Origin.SEED],
                "extended": c[Origin.EXTENDED],
                "total": c[Origin.SEED] + c[Origin.EXTENDED],
            }
        for category in Category:
            members = [e for e in self.entries.values() if e.category is category]
            n_seed = sum(1 for e in members if e.origin is Origin.SEED)
            yield {
                "scope": "category",
                "name": category.value,
                "category": category.value,
                "seed": n_seed,
                "extended": len(members) - n_seed,
                "total": len(members),
            }

    def dump(self, path: Path) -> int:
        """Write entries sorted by address."""
        return write_table((e.to_row() for e in self), path, SEED_SET_COLUMNS)

    @classmethod
    def load(cls, path: Path) -> "SeedSet":
        """Read a set written by `dump`."""
        frame = read_table(path)
        entries = {
            row.address: SeedEntry(
                address=row.address,
                protocol=row.protocol,
                category=Category(row.category),
                label=row.label,
                origin=Origin(row.origin),
            )
            for row in frame.itertuples(index=False)
        }
        return cls(entries=entries)


class ExtendedSeedSet(SeedSet):
    """Seed set after extension: seeds plus addresses they (transitively) deployed."""


def load_seeds(path: Path, diagnostics: Optional[DiagnosticCollector] = None) -> SeedSet:
    """
    Load a curated seed file.

    Duplicate rows with the same protocol collapse to one entry. A duplicate
    naming a different protocol is rejected; the first row is kept.

    Args:
        path: Table with columns address, protocol, category, label.
        diagnostics: Collector for rejected rows.

    Returns:
        The seed set (all entries have origin 'seed').

    Raises:
        SeedFormatError: If the file is unreadable or lacks columns.
    """
    diagnostics = diagnostics if diagnostics is not None else DiagnosticCollector(source=str(path))
    try:
        frame = read_table(path)
    except pd.errors.EmptyDataError:
        return SeedSet()
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise SeedFormatError(f"cannot read seed file {path}: {exc}") from exc

    missing = [c for c in SEED_COLUMNS if c not in frame.columns]
    if missing:
        raise SeedFormatError(f"{path}: missing columns {', '.join(missing)}")

    entries: dict[str, SeedEntry] = {}
    first_line: dict[str, int] = {}
    for i, row in enumerate(frame[list(SEED_COLUMNS)].itertuples(index=False), start=2):
        try:
            address = normalize_address(row.address)
            category = Category(row.category.strip().lower())
        except ValueError as exc:
            diagnostics.report("invalid_seed_row", str(exc), line=i)
            continue
        protocol = row.protocol.strip().lower()
        if not protocol:
            diagnostics.report("invalid_seed_row", "empty protocol", line=i)
            continue

        existing = entries.get(address)
        if existing is not None:
            if existing.protocol != protocol:
                diagnostics.report(
                    "seed_conflict",
                    f"address listed for '{existing.protocol}' and '{protocol}'",
                    line=i,
                    address=address,
                    protocols=f"{existing.protocol},{protocol}",
                    first_line=first_line[address],
                )
            continue

        entries[address] = SeedEntry(
            address=address,
            protocol=protocol,
            category=category,
            label=row.label.strip(),
            origin=Origin.SEED,
        )
        first_line[address] = i

    seeds = SeedSet(entries=entries)
    logger.info(
        "seeds_loaded",
        path=str(path),
        seeds=len(seeds),
        protocols=len(seeds.protocols()),
        conflicts=diagnostics.count("seed_conflict"),
    )
    return seeds
