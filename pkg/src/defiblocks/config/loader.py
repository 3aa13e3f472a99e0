"""
Configuration loader for defiblocks.

A run configuration comes from a YAML file (or the built-in defaults) plus
command-line overrides addressed as "<section>.<field>". Relative input and
output paths in the file resolve against the file's directory; override
paths are taken as given, i.e. relative to the working directory.
"""

from pathlib import Path
from typing import Any, Mapping, Optional
import copy

from pydantic import ValidationError
import yaml

from defiblocks.config.schema import DefiBlocksConfig
from defiblocks.config.validation import ConfigurationError, validate_config


def load_config(
    config_path: Path,
    overrides: Optional[Mapping[str, Any]] = None,
) -> DefiBlocksConfig:
    """
    Load configuration from a YAML file.

    Args:
        config_path: Path to the YAML configuration file.
        overrides: "<section>.<field>" → value; None values are ignored.

    Returns:
        Validated DefiBlocksConfig instance.

    Raises:
        FileNotFoundError: If the configuration file does not exist.
        ConfigurationError: If the file or an override is invalid.
    """
    config_path = Path(config_path)
    if not config_path.exists():
        raise FileNotFoundError(f"Configuration file not found: {config_path}")

    with open(config_path, "r", encoding="utf-8") as f:
        try:
            raw_config = yaml.safe_load(f) or {}
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"Invalid configuration {config_path}: {exc}") from exc
    if not isinstance(raw_config, dict):
        raise ConfigurationError(f"Invalid configuration {config_path}: top level must be a mapping")

    config_dir = config_path.parent
    raw_config = _resolve_paths(raw_config, config_dir)
    return build_config(raw_config, overrides, source=str(config_path), config_dir=config_dir)


def build_config(
    raw_config: Mapping[str, Any],
    overrides: Optional[Mapping[str, Any]] = None,
    source: str = "<defaults>",
    config_dir: Optional[Path] = None,
) -> DefiBlocksConfig:
    """
    Apply overrides to a raw configuration mapping and validate it.

    Raises:
        ConfigurationError: On schema or cross-field errors.
    """
    data: dict[str, Any] = copy.deepcopy(dict(raw_config))
    for dotted, value in (overrides or {}).items():
        if value is not None:
            apply_override(data, dotted, value)
    try:
        config = DefiBlocksConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(f"Invalid configuration {source}:\n{exc}") from exc
    validate_config(config, config_dir)
    return config


def apply_override(data: dict[str, Any], dotted: str, value: Any) -> None:
    """
    Set `data[section][field]` from a "<section>.<field>" key.

    Raises:
        ConfigurationError: If the key is malformed or the section is not a mapping.
    """
    section, _, field = dotted.partition(".")
    if not section or not field or "." in field:
        raise ConfigurationError(f"override key must look like '<section>.<field>': {dotted!r}")
    target = data.setdefault(section, {})
    if not isinstance(target, dict):
        raise ConfigurationError(f"cannot override {dotted!r}: section '{section}' is not a mapping")
    target[field] = value


def _resolve_paths(config: dict[str, Any], base_dir: Path) -> dict[str, Any]:
    """
    Recursively resolve relative paths in configuration.

    Values of keys ending with '_path' or '_dir' are made relative to base_dir;
    null values stay null.
    """
    result: dict[str, Any] = {}
    for key, value in config.items():
        if isinstance(value, dict):
            result[key] = _resolve_paths(value, base_dir)
        elif isinstance(value, str) and value and key.endswith(("_path", "_dir")):
            path = Path(value).expanduser()
            result[key] = str(path if path.is_absolute() else base_dir / path)
        else:
            result[key] = value
    return result


def save_config(config: DefiBlocksConfig, output_path: Path) -> None:
    """
    Write a configuration as YAML, creating parent directories.

    Relative paths are written as absolute paths against the working
    directory, so loading the file back yields the same locations.
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    data = _resolve_paths(config.model_dump(mode="json"), Path.cwd())
    with open(output_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)


def get_default_config(overrides: Optional[Mapping[str, Any]] = None) -> DefiBlocksConfig:
    """Built-in defaults with optional "<section>.<field>" overrides."""
    return build_config({}, overrides)
