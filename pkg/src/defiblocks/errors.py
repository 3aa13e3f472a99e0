"""
Exception hierarchy for defiblocks.

Every error raised on purpose by the package derives from DefiBlocksError so
the CLI can report it uniformly.
"""


class DefiBlocksError(Exception):
    """Base class for all defiblocks errors."""


class TraceFormatError(DefiBlocksError):
    """Trace or creation file cannot be read or does not match its format."""


class TreeAssemblyError(DefiBlocksError):
    """A transaction's records cannot be assembled into a trace tree."""


class SeedFormatError(DefiBlocksError):
    """Seed file cannot be read or does not match the seed format."""


class GraphError(DefiBlocksError):
    """Graph input is unusable for the requested analysis."""


class PowerLawFitError(DefiBlocksError):
    """Degree data cannot be fitted or tested."""


class CommunityDetectionError(DefiBlocksError):
    """Community detection or evaluation cannot run on the given input."""


class BlockHashError(DefiBlocksError):
    """Inputs to the canonical block hash are inconsistent."""


class BlockStoreError(DefiBlocksError):
    """Block store is inconsistent (for example a nesting cycle)."""


class UnknownBlockError(BlockStoreError):
    """Requested block hash is not present in the store."""


class StageError(DefiBlocksError):
    """A pipeline stage cannot run, usually because an upstream artifact is missing."""
