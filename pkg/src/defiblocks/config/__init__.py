"""Configuration module for defiblocks."""

from defiblocks.config.schema import (
    CommunityAlgorithm,
    CommunityConfig,
    DefiBlocksConfig,
    DegreeMode,
    GroundTruthConfig,
    IngestConfig,
    InputsConfig,
    NmiScope,
    NmiVariant,
    PipelineConfig,
    ProjectConfig,
    ReportsConfig,
    RuntimeSettings,
    Stage,
    TopologyConfig,
    TraceFormat,
)
from defiblocks.config.loader import build_config, get_default_config, load_config, save_config
from defiblocks.config.validation import ConfigurationError, validate_config

__all__ = [
    "CommunityAlgorithm",
    "CommunityConfig",
    "ConfigurationError",
    "DefiBlocksConfig",
    "DegreeMode",
    "GroundTruthConfig",
    "IngestConfig",
    "InputsConfig",
    "NmiScope",
    "NmiVariant",
    "PipelineConfig",
    "ProjectConfig",
    "ReportsConfig",
    "RuntimeSettings",
    "Stage",
    "TopologyConfig",
    "TraceFormat",
    "build_config",
    "get_default_config",
    "load_config",
    "save_config",
    "validate_config",
]
