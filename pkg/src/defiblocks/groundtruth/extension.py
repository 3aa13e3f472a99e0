"""
Seed extension over contract creation links.

Every contract deployed, directly or through intermediate deployers, by a
seed address inherits the seed's protocol. When a deployed contract is itself
a seed of another protocol, the deployment wins and the seed is removed.
"""

from collections import deque
from typing import Optional

from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.groundtruth.seeds import ExtendedSeedSet, Origin, SeedEntry, SeedSet
from defiblocks.ingest.registry import ContractRegistry
from defiblocks.logging.setup import get_logger

logger = get_logger(__name__)


def extend_seeds(
    seeds: SeedSet,
    registry: ContractRegistry,
    one_hop: bool = False,
    diagnostics: Optional[DiagnosticCollector] = None,
) -> ExtendedSeedSet:
    """
    Extend seed labels along creator links.

    Traversal starts at seeds that have no seed among their creators, in
    address order. Each reached contract takes the protocol, category and label
    of the nearest surviving seed above it.

    Args:
        seeds: Loaded seed set.
        registry: Registry with creator links.
        one_hop: Only label contracts deployed directly by a surviving seed.
        diagnostics: Collector for collisions and creator cycles.

    Returns:
        Extended seed set.
    """
    diagnostics = diagnostics if diagnostics is not None else DiagnosticCollector(source="extend_seeds")
    result: dict[str, SeedEntry] = {}
    visited: set[str] = set()

    roots = [
        address
        for address in sorted(seeds.entries)
        if not any(c in seeds.entries for c in registry.creator_chain(address))
    ]
    # Seeds only reachable through a creator cycle come last.
    root_set = set(roots)
    pending = roots + [a for a in sorted(seeds.entries) if a not in root_set]

    for start in pending:
        if start in visited:
            continue
        origin_entry = seeds.entries[start]
        queue: deque[tuple[str, SeedEntry]] = deque([(start, origin_entry)])
        visited.add(start)

        while queue:
            address, nearest = queue.popleft()
            own_seed = seeds.entries.get(address)

            if own_seed is not None and (own_seed.protocol == nearest.protocol or address == start):
                result[address] = own_seed
                nearest = own_seed
                expand = True
            else:
                if own_seed is not None:
                    diagnostics.report(
                        "seed_collision",
                        f"seed of '{own_seed.protocol}' was deployed by '{nearest.protocol}'; "
                        "keeping the deployment label",
                        address=address,
                        removed_protocol=own_seed.protocol,
                        assigned_protocol=nearest.protocol,
                    )
                result[address] = SeedEntry(
                    address=address,
                    protocol=nearest.protocol,
                    category=nearest.category,
                    label=nearest.label,
                    origin=Origin.EXTENDED,
                )
                expand = not one_hop

            if not expand:
                continue
            for child in registry.children_of(address):
                if child in visited:
                    diagnostics.report(
                        "creator_cycle",
                        "contract reached twice along creator links",
                        address=child,
                        creator=address,
                    )
                    continue
                visited.add(child)
                queue.append((child, nearest))

    extended = ExtendedSeedSet(entries=dict(sorted(result.items())))
    n_extended = sum(1 for e in extended.entries.values() if e.origin is Origin.EXTENDED)
    logger.info(
        "seeds_extended",
        seeds=len(extended) - n_extended,
        extended=n_extended,
        collisions=diagnostics.count("seed_collision"),
        one_hop=one_hop,
    )
    return extended
