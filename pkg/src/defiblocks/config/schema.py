"""
Pydantic configuration schema for defiblocks.

This module defines all configuration models with strict validation,
enum fields and default values. One YAML file may supply every field.
"""

from enum import Enum
from pathlib import Path
from typing import Optional
import uuid

from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class LogLevel(str, Enum):
    """Log level enumeration."""

    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"


class TraceFormat(str, Enum):
    """Trace file format enumeration."""

    DELIMITED = "delimited"
    JSONL = "jsonl"


class Stage(str, Enum):
    """Pipeline stage enumeration, in dependency order."""

    INGEST = "ingest"
    EXTEND_SEEDS = "extend-seeds"
    BUILD_NETWORKS = "build-networks"
    TOPOLOGY = "topology"
    COMMUNITIES = "communities"
    EXTRACT_BLOCKS = "extract-blocks"
    REPORT = "report"


class DegreeMode(str, Enum):
    """Degree flavour used for distribution fitting."""

    IN = "in"
    OUT = "out"
    TOTAL = "total"


class CommunityAlgorithm(str, Enum):
    """Community detection algorithm enumeration."""

    LOUVAIN = "louvain"
    LEIDEN = "leiden"
    LABEL_PROPAGATION = "label_propagation"
    LEADING_EIGENVECTOR = "leading_eigenvector"


class NmiVariant(str, Enum):
    """Normalisation of mutual information (mean of the two entropies)."""

    ARITHMETIC = "arithmetic"
    GEOMETRIC = "geometric"
    MIN = "min"
    MAX = "max"


class NmiScope(str, Enum):
    """Node set NMI is computed on."""

    LABELED = "labeled"
    ALL = "all"


STAGE_ORDER: tuple[Stage, ...] = tuple(Stage)
DEFAULT_MASTER_SEED = 20210805


# ============================================================================
# Sub-configuration Models
# ============================================================================


class ProjectConfig(BaseModel):
    """Project-level configuration."""

    name: str = Field(default="defiblocks", description="Project name")
    run_id: str = Field(
        default="auto",
        validate_default=True,
        description="Run identifier for logs (auto generates UUID)",
    )
    log_level: LogLevel = Field(default=LogLevel.INFO, description="Logging level")
    output_dir: Path = Field(
        default=Path("./runs/default"), description="Artifact directory"
    )

    @field_validator("run_id", mode="before")
    @classmethod
    def generate_run_id(cls, v: str) -> str:
        """Generate UUID if run_id is 'auto'."""
        if v == "auto":
            return str(uuid.uuid4())[:8]
        return v


class InputsConfig(BaseModel):
    """Input file locations."""

    traces_path: Path = Field(
        default=Path("data/traces.csv"), description="Exported trace rows"
    )
    trace_format: TraceFormat = Field(
        default=TraceFormat.DELIMITED, description="Trace file format"
    )
    creations_path: Path = Field(
        default=Path("data/creations.csv"),
        description="Contract creation rows (same format as traces)",
    )
    seeds_path: Path = Field(
        default=Path("data/seeds.csv"), description="Curated seed addresses"
    )
    erc20_path: Optional[Path] = Field(
        default=None, description="ERC20 flag file, one address per line"
    )
    bytecode_path: Optional[Path] = Field(
        default=None,
        description="Deployed bytecode rows for the ERC20 selector scan",
    )
    method_names_path: Optional[Path] = Field(
        default=None, description="Local method id to name map for reports"
    )


class PipelineConfig(BaseModel):
    """Stage selection and reproducibility settings."""

    stages: list[Stage] = Field(
        default_factory=lambda: list(STAGE_ORDER), description="Stages to run"
    )
    master_seed: int = Field(
        default=DEFAULT_MASTER_SEED, ge=0, description="Seed all randomness derives from"
    )
    threads: int = Field(default=1, ge=1, le=256, description="Worker cap per stage")
    force: bool = Field(default=False, description="Rerun stages with matching manifests")


class IngestConfig(BaseModel):
    """Trace ingestion settings."""

    include_failed_traces: bool = Field(
        default=False, description="Keep reverted subtrees in networks and blocks"
    )
    chunk_rows: int = Field(default=100_000, ge=1, description="Rows per parse chunk")


class GroundTruthConfig(BaseModel):
    """Seed extension settings."""

    one_hop_extension: bool = Field(
        default=False, description="Extend seeds by direct deployments only"
    )


class TopologyConfig(BaseModel):
    """Degree fitting and component analysis settings."""

    degree_mode: DegreeMode = Field(default=DegreeMode.TOTAL, description="Degree flavour")
    bootstrap_n: int = Field(default=5000, ge=0, description="GoF bootstrap replicates (0 skips)")
    min_tail: int = Field(default=50, ge=2, description="Minimum tail size for k_min")
    top_k_components: int = Field(default=10, ge=1, description="Components in the matrix")
    top_degree_nodes: int = Field(default=15, ge=1, description="Rows in the top-degree table")


class CommunityConfig(BaseModel):
    """Community detection settings."""

    algorithms: list[CommunityAlgorithm] = Field(
        default_factory=lambda: list(CommunityAlgorithm),
        description="Algorithms to run",
    )
    nmi_variant: NmiVariant = Field(default=NmiVariant.ARITHMETIC, description="NMI normaliser")
    nmi_scope: NmiScope = Field(default=NmiScope.LABELED, description="Nodes NMI covers")
    resolution: float = Field(default=1.0, gt=0, description="Modularity resolution")


class ReportsConfig(BaseModel):
    """Composition report settings."""

    top_blocks: int = Field(default=8, ge=1, description="Rows in the top-block summary")
    treemap_protocols: list[str] = Field(
        default_factory=list,
        description="Root protocols to emit first-level treemaps for (empty = all)",
    )


# ============================================================================
# Root Configuration Model
# ============================================================================


class DefiBlocksConfig(BaseModel):
    """Root configuration model for defiblocks."""

    project: ProjectConfig = Field(default_factory=ProjectConfig)
    inputs: InputsConfig = Field(default_factory=InputsConfig)
    pipeline: PipelineConfig = Field(default_factory=PipelineConfig)
    ingest: IngestConfig = Field(default_factory=IngestConfig)
    ground_truth: GroundTruthConfig = Field(default_factory=GroundTruthConfig)
    topology: TopologyConfig = Field(default_factory=TopologyConfig)
    community: CommunityConfig = Field(default_factory=CommunityConfig)
    reports: ReportsConfig = Field(default_factory=ReportsConfig)

    model_config = {"extra": "forbid"}


class RuntimeSettings(BaseSettings):
    """Environment overrides (DEFIBLOCKS_LOG_LEVEL, DEFIBLOCKS_LOG_FORMAT, DEFIBLOCKS_THREADS)."""

    model_config = SettingsConfigDict(env_prefix="DEFIBLOCKS_")

    log_level: Optional[LogLevel] = None
    log_format: str = "console"
    threads: Optional[int] = Field(default=None, ge=1)
