"""
Configuration validation for defiblocks.

Provides cross-field and runtime checks beyond Pydantic schema validation.
"""

from pathlib import Path
from typing import Optional

from defiblocks.config.schema import DefiBlocksConfig, Stage
from defiblocks.errors import DefiBlocksError


class ConfigurationError(DefiBlocksError):
    """Configuration validation error."""


# Inputs each stage reads directly (upstream artifacts are checked by the runner).
_STAGE_INPUTS: dict[Stage, tuple[str, ...]] = {
    Stage.INGEST: ("traces_path", "creations_path"),
    Stage.EXTEND_SEEDS: ("seeds_path",),
}


def validate_config(
    config: DefiBlocksConfig,
    config_dir: Optional[Path] = None,
    check_paths: bool = False,
) -> None:
    """
    Perform cross-field and runtime validation on configuration.

    Args:
        config: DefiBlocksConfig instance to validate.
        config_dir: Optional base directory for path resolution.
        check_paths: Also require that inputs of the selected stages exist.

    Raises:
        ConfigurationError: If validation fails.
    """
    errors: list[str] = []

    errors.extend(_validate_pipeline(config))
    errors.extend(_validate_community(config))
    if check_paths:
        errors.extend(_validate_paths(config, config_dir))

    if errors:
        error_msg = "Configuration validation failed:\n" + "\n".join(
            f"  - {e}" for e in errors
        )
        raise ConfigurationError(error_msg)


def _validate_pipeline(config: DefiBlocksConfig) -> list[str]:
    """Validate stage selection."""
    errors: list[str] = []

    if not config.pipeline.stages:
        errors.append("pipeline.stages must name at least one stage")
    if len(set(config.pipeline.stages)) != len(config.pipeline.stages):
        errors.append("pipeline.stages contains duplicates")
    if config.inputs.erc20_path is not None and config.inputs.bytecode_path is not None:
        errors.append("inputs.erc20_path and inputs.bytecode_path are mutually exclusive")
    if 0 < config.topology.bootstrap_n < 100:
        errors.append("topology.bootstrap_n must be 0 (skip) or at least 100")

    return errors


def _validate_community(config: DefiBlocksConfig) -> list[str]:
    """Validate community detection settings."""
    errors: list[str] = []

    if len(set(config.community.algorithms)) != len(config.community.algorithms):
        errors.append("community.algorithms contains duplicates")

    return errors


def _validate_paths(config: DefiBlocksConfig, config_dir: Optional[Path]) -> list[str]:
    """Check that the direct inputs of the selected stages exist."""
    errors: list[str] = []

    for stage in config.pipeline.stages:
        for attr in _STAGE_INPUTS.get(stage, ()):
            path = getattr(config.inputs, attr)
            resolved = resolve_path(path, config_dir)
            if not resolved.exists():
                errors.append(f"inputs.{attr} not found for stage '{stage.value}': {resolved}")

    for attr in ("erc20_path", "bytecode_path", "method_names_path"):
        path = getattr(config.inputs, attr)
        if path is not None and not resolve_path(path, config_dir).exists():
            errors.append(f"inputs.{attr} not found: {path}")

    return errors


def resolve_path(path: Path, base_dir: Optional[Path]) -> Path:
    """Resolve a possibly relative path against base_dir."""
    path = Path(path)
    if path.is_absolute() or base_dir is None:
        return path
    return base_dir / path
