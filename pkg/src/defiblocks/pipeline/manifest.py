"""
Stage manifests.

Every stage directory holds a `manifest.yaml` recording what the stage was
computed from (package version, seeds, relevant configuration, input file
digests) and what it produced (output file digests, counters). A stage whose
recorded provenance matches the current one and whose outputs are intact is
skipped on rerun.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional
import hashlib
import json

import yaml

from defiblocks.config.schema import DefiBlocksConfig, Stage
from defiblocks.errors import StageError
from defiblocks.utils.io import file_digest, load_yaml, save_yaml

MANIFEST_NAME = "manifest.yaml"
DIAGNOSTICS_NAME = "diagnostics.csv"

# Config sections whose values change a stage's outputs.
STAGE_SECTIONS: dict[Stage, tuple[str, ...]] = {
    Stage.INGEST: ("ingest", "inputs.trace_format"),
    Stage.EXTEND_SEEDS: ("ground_truth",),
    Stage.BUILD_NETWORKS: ("ingest.include_failed_traces",),
    Stage.TOPOLOGY: ("topology",),
    Stage.COMMUNITIES: ("community",),
    Stage.EXTRACT_BLOCKS: ("ingest.include_failed_traces",),
    Stage.REPORT: ("reports",),
}


def config_digest(config: DefiBlocksConfig, stage: Stage) -> str:
    """
    Digest of the configuration values a stage depends on.

    Run ids, paths and worker counts are excluded: input content is covered
    by input digests and parallelism never changes results.
    """
    dumped = config.model_dump(mode="json")
    selected: dict[str, Any] = {}
    for key in STAGE_SECTIONS[stage]:
        section, _, attr = key.partition(".")
        value = dumped[section]
        selected[key] = value[attr] if attr else value
    payload = json.dumps(selected, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def digest_files(paths: Mapping[str, Path]) -> dict[str, str]:
    """Content digests keyed by logical name, sorted by name."""
    return {name: file_digest(paths[name]) for name in sorted(paths)}


@dataclass
class StageManifest:
    """
    Provenance record of one stage run.

    Attributes:
        stage: Stage name.
        version: Package version that produced the outputs.
        master_seed: Pipeline master seed.
        stage_seed: Seed derived for this stage.
        config_digest: Digest of the stage's configuration values.
        inputs: Input name → content digest.
        outputs: Output file name → content digest.
        counters: Stage counters.
    """

    stage: str
    version: str
    master_seed: int
    stage_seed: int
    config_digest: str
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    counters: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "stage": self.stage,
            "version": self.version,
            "master_seed": self.master_seed,
            "stage_seed": self.stage_seed,
            "config_digest": self.config_digest,
            "inputs": dict(self.inputs),
            "outputs": dict(self.outputs),
            "counters": dict(self.counters),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "StageManifest":
        return cls(
            stage=str(data["stage"]),
            version=str(data["version"]),
            master_seed=int(data["master_seed"]),
            stage_seed=int(data["stage_seed"]),
            config_digest=str(data["config_digest"]),
            inputs=dict(data.get("inputs") or {}),
            outputs=dict(data.get("outputs") or {}),
            counters={k: int(v) for k, v in (data.get("counters") or {}).items()},
        )

    def save(self, stage_dir: Path) -> Path:
        path = Path(stage_dir) / MANIFEST_NAME
        save_yaml(self.to_dict(), path)
        return path

    @classmethod
    def load(cls, stage_dir: Path) -> Optional["StageManifest"]:
        """Read a stage manifest; None if absent or unreadable."""
        path = Path(stage_dir) / MANIFEST_NAME
        if not path.exists():
            return None
        try:
            return cls.from_dict(load_yaml(path))
        except (KeyError, TypeError, ValueError, yaml.YAMLError):
            return None

    def same_provenance(self, other: "StageManifest") -> bool:
        """True if both runs were computed from the same inputs and settings."""
        return (
            self.stage == other.stage
            and self.version == other.version
            and self.master_seed == other.master_seed
            and self.stage_seed == other.stage_seed
            and self.config_digest == other.config_digest
            and self.inputs == other.inputs
        )

    def outputs_intact(self, stage_dir: Path) -> bool:
        """True if every recorded output exists with its recorded digest."""
        for name, digest in self.outputs.items():
            path = Path(stage_dir) / name
            if not path.exists() or file_digest(path) != digest:
                return False
        return True


def require_artifact(path: Path, stage: Stage, producer: Stage) -> Path:
    """
    Check that an upstream artifact exists.

    Raises:
        StageError: Naming the stage that needs it and the one that makes it.
    """
    if not Path(path).exists():
        raise StageError(
            f"stage '{stage.value}' needs {path}, produced by stage '{producer.value}'; run it first"
        )
    return Path(path)
