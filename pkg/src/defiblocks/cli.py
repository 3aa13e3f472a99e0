"""
defiblocks CLI - Command-line interface for the trace analytics pipeline.

Each pipeline stage has its own command; `run` executes the configured stage
list end to end and `explain-block` prints a stored building block.
"""

from pathlib import Path
from typing import Any, Optional

import typer
from rich.console import Console
from rich.table import Table

from defiblocks.config.schema import DefiBlocksConfig, NmiVariant, RuntimeSettings, Stage
from defiblocks.errors import DefiBlocksError
from defiblocks.version import __version__

app = typer.Typer(
    name="defiblocks",
    help="defiblocks - Composition analytics over Ethereum transaction traces.",
    add_completion=False,
)

console = Console()

DEFAULT_CONFIG = Path("configs/default.yaml")

ConfigOption = typer.Option(
    None,
    "--config",
    "-c",
    help="Path to configuration file (defaults to configs/default.yaml if present).",
    dir_okay=False,
)
OutputDirOption = typer.Option(None, "--output-dir", "-o", help="Override project.output_dir.")
SeedOption = typer.Option(None, "--seed", help="Override pipeline.master_seed.")
ThreadsOption = typer.Option(None, "--threads", "-t", min=1, max=256, help="Cap on workers per stage.")
ForceOption = typer.Option(False, "--force", "-f", help="Rerun stages even when their manifest matches.")
LogLevelOption = typer.Option(None, "--log-level", "-l", help="Override log level (DEBUG, INFO, WARNING, ERROR).")


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"[bold blue]defiblocks[/bold blue] v{__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: Optional[bool] = typer.Option(
        None,
        "--version",
        "-V",
        callback=version_callback,
        is_eager=True,
        help="Show version and exit.",
    ),
) -> None:
    """defiblocks - Composition analytics over Ethereum transaction traces."""
    pass


def _load(config: Optional[Path], overrides: dict[str, Any]) -> DefiBlocksConfig:
    """
    Load the configuration and apply command-line overrides.

    Args:
        config: Config file; None falls back to configs/default.yaml or defaults.
        overrides: Dotted config keys → values; None values are ignored.
    """
    from defiblocks.config.loader import get_default_config, load_config
    from defiblocks.config.validation import ConfigurationError

    if config is not None:
        if not config.exists():
            raise ConfigurationError(f"Configuration file not found: {config}")
        return load_config(config, overrides)
    if DEFAULT_CONFIG.exists():
        return load_config(DEFAULT_CONFIG, overrides)
    return get_default_config(overrides)


def _execute(
    config: Optional[Path],
    stages: Optional[list[Stage]],
    overrides: dict[str, Any],
    force: bool,
    threads: Optional[int],
    log_level: Optional[str],
) -> None:
    """Load configuration, run stages, print a summary table."""
    from defiblocks.logging.setup import LOG_FILE_NAME, configure_logging
    from defiblocks.pipeline.runner import PipelineRunner

    try:
        settings = RuntimeSettings()
        cfg = _load(config, overrides)
        level = log_level or (settings.log_level.value if settings.log_level else cfg.project.log_level.value)
        configure_logging(
            level,
            cfg.project.run_id,
            json_format=settings.log_format == "json",
            log_file=Path(cfg.project.output_dir) / LOG_FILE_NAME,
        )

        console.print(f"[green]✓[/green] Run ID: {cfg.project.run_id}")
        console.print(f"[green]✓[/green] Output: {cfg.project.output_dir}")

        runner = PipelineRunner(
            cfg,
            force=force or None,
            threads=threads if threads is not None else settings.threads,
        )
        outcomes = runner.run(stages)
    except DefiBlocksError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(code=1)

    table = Table(title="Stages")
    table.add_column("Stage", style="cyan")
    table.add_column("Status", style="green")
    table.add_column("Diagnostics", justify="right")
    table.add_column("Outputs", justify="right")
    for outcome in outcomes:
        status = "skipped (manifest match)" if outcome.skipped else "ran"
        table.add_row(
            outcome.stage.value,
            status,
            str(outcome.manifest.counters.get("diagnostics", 0)),
            str(len(outcome.manifest.outputs)),
        )
    console.print(table)
    console.print("[bold green]Pipeline complete.[/bold green]")


def _common(
    output_dir: Optional[Path],
    seed: Optional[int],
) -> dict[str, Any]:
    return {"project.output_dir": output_dir, "pipeline.master_seed": seed}


@app.command()
def run(
    config: Optional[Path] = ConfigOption,
    output_dir: Optional[Path] = OutputDirOption,
    seed: Optional[int] = SeedOption,
    threads: Optional[int] = ThreadsOption,
    force: bool = ForceOption,
    log_level: Optional[str] = LogLevelOption,
    traces: Optional[Path] = typer.Option(None, "--traces", help="Override inputs.traces_path."),
    creations: Optional[Path] = typer.Option(None, "--creations", help="Override inputs.creations_path."),
    seeds: Optional[Path] = typer.Option(None, "--seeds", help="Override inputs.seeds_path."),
    erc20: Optional[Path] = typer.Option(None, "--erc20", help="Override inputs.erc20_path."),
    bootstrap_n: Optional[int] = typer.Option(None, "--bootstrap-n", min=0, help="GoF bootstrap replicates."),
    include_failed: Optional[bool] = typer.Option(
        None, "--include-failed-traces/--exclude-failed-traces", help="Keep reverted subtrees."
    ),
    one_hop: Optional[bool] = typer.Option(None, "--one-hop/--transitive", help="Seed extension depth."),
    nmi_variant: Optional[NmiVariant] = typer.Option(None, "--nmi-variant", help="NMI normaliser."),
) -> None:
    """Run the configured stages end to end."""
    overrides = {
        **_common(output_dir, seed),
        "inputs.traces_path": traces,
        "inputs.creations_path": creations,
        "inputs.seeds_path": seeds,
        "inputs.erc20_path": erc20,
        "topology.bootstrap_n": bootstrap_n,
        "ingest.include_failed_traces": include_failed,
        "ground_truth.one_hop_extension": one_hop,
        "community.nmi_variant": nmi_variant,
    }
    _execute(config, None, overrides, force, threads, log_level)


@app.command()
def ingest(
    config: Optional[Path] = ConfigOption,
    output_dir: Optional[Path] = OutputDirOption,
    threads: Optional[int] = ThreadsOption,
    force: bool = ForceOption,
    log_level: Optional[str] = LogLevelOption,
    traces: Optional[Path] = typer.Option(None, "--traces", help="Override inputs.traces_path."),
    creations: Optional[Path] = typer.Option(None, "--creations", help="Override inputs.creations_path."),
    erc20: Optional[Path] = typer.Option(None, "--erc20", help="Override inputs.erc20_path."),
) -> None:
    """Parse traces and creations; build the contract registry."""
    overrides = {
        **_common(output_dir, None),
        "inputs.traces_path": traces,
        "inputs.creations_path": creations,
        "inputs.erc20_path": erc20,
    }
    _execute(config, [Stage.INGEST], overrides, force, threads, log_level)


@app.command(name="extend-seeds")
def extend_seeds(
    config: Optional[Path] = ConfigOption,
    output_dir: Optional[Path] = OutputDirOption,
    force: bool = ForceOption,
    log_level: Optional[str] = LogLevelOption,
    seeds: Optional[Path] = typer.Option(None, "--seeds", help="Override inputs.seeds_path."),
    one_hop: Optional[bool] = typer.Option(None, "--one-hop/--transitive", help="Seed extension depth."),
) -> None:
    """Extend seed labels along creator links."""
    overrides = {
        **_common(output_dir, None),
        "inputs.seeds_path": seeds,
        "ground_truth.one_hop_extension": one_hop,
    }
    _execute(config, [Stage.EXTEND_SEEDS], overrides, force, None, log_level)


@app.command(name="build-networks")
def build_networks(
    config: Optional[Path] = ConfigOption,
    output_dir: Optional[Path] = OutputDirOption,
    threads: Optional[int] = ThreadsOption,
    force: bool = ForceOption,
    log_level: Optional[str] = LogLevelOption,
    include_failed: Optional[bool] = typer.Option(
        None, "--include-failed-traces/--exclude-failed-traces", help="Keep reverted subtrees."
    ),
) -> None:
    """Build the CA and protocol interaction networks."""
    overrides = {**_common(output_dir, None), "ingest.include_failed_traces": include_failed}
    _execute(config, [Stage.BUILD_NETWORKS], overrides, force, threads, log_level)


@app.command()
def topology(
    config: Optional[Path] = ConfigOption,
    output_dir: Optional[Path] = OutputDirOption,
    seed: Optional[int] = SeedOption,
    threads: Optional[int] = ThreadsOption,
    force: bool = ForceOption,
    log_level: Optional[str] = LogLevelOption,
    bootstrap_n: Optional[int] = typer.Option(None, "--bootstrap-n", min=0, help="GoF bootstrap replicates."),
) -> None:
    """Fit the degree distribution and decompose the CA network."""
    overrides = {**_common(output_dir, seed), "topology.bootstrap_n": bootstrap_n}
    _execute(config, [Stage.TOPOLOGY], overrides, force, threads, log_level)


@app.command()
def communities(
    config: Optional[Path] = ConfigOption,
    output_dir: Optional[Path] = OutputDirOption,
    seed: Optional[int] = SeedOption,
    force: bool = ForceOption,
    log_level: Optional[str] = LogLevelOption,
    nmi_variant: Optional[NmiVariant] = typer.Option(None, "--nmi-variant", help="NMI normaliser."),
) -> None:
    """Detect and evaluate communities of the CA network."""
    overrides = {**_common(output_dir, seed), "community.nmi_variant": nmi_variant}
    _execute(config, [Stage.COMMUNITIES], overrides, force, None, log_level)


@app.command(name="extract-blocks")
def extract_blocks(
    config: Optional[Path] = ConfigOption,
    output_dir: Optional[Path] = OutputDirOption,
    threads: Optional[int] = ThreadsOption,
    force: bool = ForceOption,
    log_level: Optional[str] = LogLevelOption,
    include_failed: Optional[bool] = typer.Option(
        None, "--include-failed-traces/--exclude-failed-traces", help="Keep reverted subtrees."
    ),
) -> None:
    """Extract building blocks from protocol traces."""
    overrides = {**_common(output_dir, None), "ingest.include_failed_traces": include_failed}
    _execute(config, [Stage.EXTRACT_BLOCKS], overrides, force, threads, log_level)


@app.command()
def report(
    config: Optional[Path] = ConfigOption,
    output_dir: Optional[Path] = OutputDirOption,
    force: bool = ForceOption,
    log_level: Optional[str] = LogLevelOption,
) -> None:
    """Write block frequency and composition reports."""
    _execute(config, [Stage.REPORT], _common(output_dir, None), force, None, log_level)


@app.command(name="explain-block")
def explain_block(
    block_hash: str = typer.Argument(..., help="Block hash (hex, optional 0x prefix)."),
    store: Optional[Path] = typer.Option(
        None,
        "--store",
        "-s",
        help="Block store (defaults to <output_dir>/extract-blocks/block_store.jsonl).",
    ),
    config: Optional[Path] = ConfigOption,
) -> None:
    """Print a stored building block."""
    from defiblocks.blocks import BlockStore, describe_block
    from defiblocks.pipeline.runner import BLOCK_STORE

    try:
        if store is None:
            cfg = _load(config, {})
            store = Path(cfg.project.output_dir) / Stage.EXTRACT_BLOCKS.value / BLOCK_STORE
        blocks = BlockStore.load(store)
        block = blocks.get(block_hash)
    except DefiBlocksError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(code=1)

    for line in describe_block(block, blocks.count(block.hash)):
        console.print(line, highlight=False, markup=False)


@app.command()
def check(
    config: Optional[Path] = ConfigOption,
) -> None:
    """Validate configuration and report which inputs are present."""
    from defiblocks.pipeline.runner import stage_inputs

    console.print("[bold]defiblocks Configuration Check[/bold]\n")

    table = Table(title="System Information")
    table.add_column("Component", style="cyan")
    table.add_column("Status", style="green")
    table.add_row("defiblocks Version", __version__)

    try:
        cfg = _load(config, {})
    except DefiBlocksError as e:
        table.add_row("Configuration", f"✗ Error: {e}")
        console.print(table)
        raise typer.Exit(code=1)

    table.add_row("Configuration", "✓ Valid")
    table.add_row("Output", str(cfg.project.output_dir))
    table.add_row("Master seed", str(cfg.pipeline.master_seed))
    for stage in cfg.pipeline.stages:
        try:
            stage_inputs(cfg, stage)
            table.add_row(f"Stage {stage.value}", "✓ inputs present")
        except DefiBlocksError as e:
            table.add_row(f"Stage {stage.value}", f"⚠ {e}")
    console.print(table)


@app.command(name="version")
def show_version() -> None:
    """Show version information."""
    console.print(f"[bold blue]defiblocks[/bold blue] v{__version__}")
    console.print("Composition analytics over Ethereum transaction traces.")


if __name__ == "__main__":
    app()
