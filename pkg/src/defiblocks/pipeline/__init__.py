"""Stage orchestration with manifests and skip-on-match reruns."""

from defiblocks.pipeline.manifest import (
    DIAGNOSTICS_NAME,
    MANIFEST_NAME,
    StageManifest,
    config_digest,
    digest_files,
    require_artifact,
)
from defiblocks.pipeline.runner import PipelineRunner, StageContext, StageOutcome, stage_inputs

__all__ = [
    "DIAGNOSTICS_NAME",
    "MANIFEST_NAME",
    "PipelineRunner",
    "StageContext",
    "StageManifest",
    "StageOutcome",
    "config_digest",
    "digest_files",
    "require_artifact",
    "stage_inputs",
]
