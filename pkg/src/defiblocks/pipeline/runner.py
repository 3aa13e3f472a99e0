"""
Pipeline runner for defiblocks.

Stages run serially in dependency order. Each stage reads the dumps of the
stages before it, writes its own dumps plus `diagnostics.csv` and
`manifest.yaml` into `output_dir/<stage>/`, and is skipped on rerun when its
manifest still matches.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Optional, Union

from defiblocks.blocks import BlockStore, TxBlocks, describe_block, extract_corpus
from defiblocks.community import (
    detect_communities,
    evaluate_partition,
    prepare_community_graph,
)
from defiblocks.community.evaluation import EVALUATION_COLUMNS
from defiblocks.config.schema import STAGE_ORDER, DefiBlocksConfig, Stage
from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.errors import CommunityDetectionError, PowerLawFitError, StageError
from defiblocks.groundtruth import (
    ExtendedSeedSet,
    extend_seeds,
    filter_protocol_traces,
    load_seeds,
    protocol_tx_counts,
)
from defiblocks.groundtruth.seeds import SEED_COUNT_COLUMNS
from defiblocks.ingest import (
    ContractRegistry,
    TraceTree,
    assemble_trace_trees,
    build_contract_registry,
    dump_records,
    parse_traces,
    scan_erc20_bytecode,
)
from defiblocks.logging.metrics import StageMetrics
from defiblocks.logging.setup import get_logger, stage_logging
from defiblocks.networks import WeightedDiGraph, build_ca_network, build_protocol_network, graph_summary
from defiblocks.networks.graph import SUMMARY_COLUMNS
from defiblocks.pipeline.manifest import (
    DIAGNOSTICS_NAME,
    StageManifest,
    config_digest,
    digest_files,
    require_artifact,
)
from defiblocks.reports import (
    build_composition_matrix,
    count_blocks,
    load_method_names,
    treemap_rows,
    tx_flattening,
)
from defiblocks.reports.composition import TREEMAP_COLUMNS
from defiblocks.reports.counts import BLOCK_COUNT_COLUMNS
from defiblocks.topology import (
    ComponentMode,
    bootstrap_gof,
    ccdf_rows,
    compare_distributions,
    component_protocol_matrix,
    connected_components,
    degree_sequence,
    degree_values,
    fit_power_law,
    top_degree_rows,
)
from defiblocks.topology.alternatives import LR_COLUMNS
from defiblocks.topology.components import COMPONENT_COLUMNS
from defiblocks.topology.degrees import TOP_DEGREE_COLUMNS
from defiblocks.utils.io import atomic_write, ensure_dir, read_jsonl, write_jsonl, write_table
from defiblocks.utils.parallel import derive_seed
from defiblocks.version import __version__

logger = get_logger(__name__)

# Inter-stage artifacts.
TRACES = "traces.csv"
REGISTRY = "registry.csv"
EXTENDED_SEEDS = "extended_seeds.csv"
CA_EDGES = "ca_edges.csv"
CA_NODES = "ca_nodes.csv"
BLOCK_STORE = "block_store.jsonl"
TX_BLOCKS = "tx_blocks.jsonl"

POWERLAW_COLUMNS = (
    "degree_mode",
    "available",
    "k_min",
    "alpha",
    "alpha_stderr",
    "ks_distance",
    "n_tail",
    "n_total",
    "gof_p_value",
    "gof_replicates",
    "gof_failed",
    "gof_seed",
    "plausible",
    "alternative_favoured",
)
CCDF_COLUMNS = ("degree", "ccdf_empirical", "ccdf_fitted")
PROTOCOL_TX_COLUMNS = ("protocol", "transactions")
MATCH_COLUMNS = ("algorithm", "protocol", "community", "precision", "recall", "f1")


@dataclass
class StageContext:
    """
    Everything one stage run needs.

    Attributes:
        config: Pipeline configuration.
        stage: Stage being run.
        seed: Seed derived for the stage.
        workers: Worker cap.
        diagnostics: Row- and record-level problems.
        metrics: Counters written into the manifest.
        outputs: Output file name → path, filled by `output`.
    """

    config: DefiBlocksConfig
    stage: Stage
    seed: int
    workers: int
    diagnostics: DiagnosticCollector
    metrics: StageMetrics
    outputs: dict[str, Path] = field(default_factory=dict)

    @property
    def output_root(self) -> Path:
        return Path(self.config.project.output_dir)

    @property
    def stage_dir(self) -> Path:
        return self.output_root / self.stage.value

    def output(self, name: str) -> Path:
        """Register and return the path of an output file."""
        path = self.stage_dir / name
        self.outputs[name] = path
        return path


@dataclass(frozen=True)
class StageOutcome:
    """Result of running (or skipping) one stage."""

    stage: Stage
    skipped: bool
    manifest: StageManifest
    n_diagnostics: int = 0


def stage_inputs(config: DefiBlocksConfig, stage: Stage) -> dict[str, Path]:
    """
    Files a stage reads, keyed by logical name.

    Raises:
        StageError: If a configured input or an upstream artifact is missing.
    """
    root = Path(config.project.output_dir)
    inputs = config.inputs

    def upstream(producer: Stage, name: str) -> Path:
        return require_artifact(root / producer.value / name, stage, producer)

    def external(path: Path, label: str) -> Path:
        if not Path(path).exists():
            raise StageError(f"stage '{stage.value}' needs {label} at {path}, which does not exist")
        return Path(path)

    found: dict[str, Path] = {}
    if stage is Stage.INGEST:
        found["traces"] = external(inputs.traces_path, "the trace file")
        found["creations"] = external(inputs.creations_path, "the creation file")
        if inputs.erc20_path is not None:
            found["erc20"] = external(inputs.erc20_path, "the ERC20 flag file")
        if inputs.bytecode_path is not None:
            found["bytecode"] = external(inputs.bytecode_path, "the bytecode file")
    elif stage is Stage.EXTEND_SEEDS:
        found["seeds"] = external(inputs.seeds_path, "the seed file")
        found[REGISTRY] = upstream(Stage.INGEST, REGISTRY)
        found[TRACES] = upstream(Stage.INGEST, TRACES)
    elif stage in (Stage.BUILD_NETWORKS, Stage.EXTRACT_BLOCKS):
        found[TRACES] = upstream(Stage.INGEST, TRACES)
        found[REGISTRY] = upstream(Stage.INGEST, REGISTRY)
        found[EXTENDED_SEEDS] = upstream(Stage.EXTEND_SEEDS, EXTENDED_SEEDS)
    elif stage in (Stage.TOPOLOGY, Stage.COMMUNITIES):
        found[CA_EDGES] = upstream(Stage.BUILD_NETWORKS, CA_EDGES)
        found[CA_NODES] = upstream(Stage.BUILD_NETWORKS, CA_NODES)
        found[EXTENDED_SEEDS] = upstream(Stage.EXTEND_SEEDS, EXTENDED_SEEDS)
    elif stage is Stage.REPORT:
        found[BLOCK_STORE] = upstream(Stage.EXTRACT_BLOCKS, BLOCK_STORE)
        found[TX_BLOCKS] = upstream(Stage.EXTRACT_BLOCKS, TX_BLOCKS)
        found[EXTENDED_SEEDS] = upstream(Stage.EXTEND_SEEDS, EXTENDED_SEEDS)
        if inputs.method_names_path is not None:
            found["method_names"] = external(inputs.method_names_path, "the method-name map")
    return found


class PipelineRunner:
    """
    Runs pipeline stages with manifests and skip-on-match.

    All randomness derives from `pipeline.master_seed`; each stage gets
    `derive_seed(master_seed, stage name)`.
    """

    def __init__(
        self,
        config: DefiBlocksConfig,
        force: Optional[bool] = None,
        threads: Optional[int] = None,
    ) -> None:
        """
        Initialize the runner.

        Args:
            config: Validated configuration.
            force: Overrides `pipeline.force`.
            threads: Overrides `pipeline.threads`.
        """
        self.config = config
        self.force = config.pipeline.force if force is None else force
        self.workers = config.pipeline.threads if threads is None else threads
        self._stage_funcs: dict[Stage, Callable[[StageContext, dict[str, Path]], None]] = {
            Stage.INGEST: self._ingest,
            Stage.EXTEND_SEEDS: self._extend_seeds,
            Stage.BUILD_NETWORKS: self._build_networks,
            Stage.TOPOLOGY: self._topology,
            Stage.COMMUNITIES: self._communities,
            Stage.EXTRACT_BLOCKS: self._extract_blocks,
            Stage.REPORT: self._report,
        }

    def run(self, stages: Optional[list[Stage]] = None) -> list[StageOutcome]:
        """
        Run stages in dependency order.

        Args:
            stages: Stages to run; defaults to `pipeline.stages`.

        Returns:
            One outcome per stage, in execution order.
        """
        selected = set(stages if stages is not None else self.config.pipeline.stages)
        ordered = [s for s in STAGE_ORDER if s in selected]
        logger.info("pipeline_start", stages=[s.value for s in ordered], output_dir=str(self.config.project.output_dir))
        outcomes = [self.run_stage(stage) for stage in ordered]
        logger.info(
            "pipeline_complete",
            ran=[o.stage.value for o in outcomes if not o.skipped],
            skipped=[o.stage.value for o in outcomes if o.skipped],
        )
        return outcomes

    def run_stage(self, stage: Stage) -> StageOutcome:
        """
        Run one stage, or skip it if its manifest still matches.

        Raises:
            StageError: If an input of the stage is missing.
        """
        with stage_logging(stage.value):
            return self._run_stage(stage)

    def _run_stage(self, stage: Stage) -> StageOutcome:
        master = self.config.pipeline.master_seed
        seed = derive_seed(master, stage.value)
        inputs = stage_inputs(self.config, stage)
        expected = StageManifest(
            stage=stage.value,
            version=__version__,
            master_seed=master,
            stage_seed=seed,
            config_digest=config_digest(self.config, stage),
            inputs=digest_files(inputs),
        )
        stage_dir = Path(self.config.project.output_dir) / stage.value

        previous = StageManifest.load(stage_dir)
        if (
            not self.force
            and previous is not None
            and previous.same_provenance(expected)
            and previous.outputs_intact(stage_dir)
        ):
            logger.info("stage_skipped", reason="manifest_match")
            return StageOutcome(stage=stage, skipped=True, manifest=previous)

        ensure_dir(stage_dir)
        ctx = StageContext(
            config=self.config,
            stage=stage,
            seed=seed,
            workers=self.workers,
            diagnostics=DiagnosticCollector(source=stage.value),
            metrics=StageMetrics(stage=stage.value),
        )
        logger.info("stage_start", seed=seed, workers=self.workers)
        ctx.metrics.start("total")
        self._stage_funcs[stage](ctx, inputs)
        ctx.metrics.stop("total")

        ctx.diagnostics.dump(stage_dir / DIAGNOSTICS_NAME)
        ctx.metrics.set("diagnostics", len(ctx.diagnostics))
        expected.outputs = digest_files(ctx.outputs)
        expected.counters = ctx.metrics.get_summary()["counters"]
        expected.save(stage_dir)
        logger.info(
            "stage_complete",
            outputs=sorted(ctx.outputs),
            diagnostics=len(ctx.diagnostics),
            timings=ctx.metrics.get_timings(),
        )
        return StageOutcome(stage=stage, skipped=False, manifest=expected, n_diagnostics=len(ctx.diagnostics))

    # ------------------------------------------------------------------
    # Shared loaders
    # ------------------------------------------------------------------

    def _trees(self, ctx: StageContext, traces_path: Path) -> Iterator[TraceTree]:
        records = parse_traces(traces_path, diagnostics=ctx.diagnostics, chunk_rows=self.config.ingest.chunk_rows)
        return assemble_trace_trees(records, ctx.diagnostics, workers=ctx.workers)

    # ------------------------------------------------------------------
    # Stages
    # ------------------------------------------------------------------

    def _ingest(self, ctx: StageContext, inputs: dict[str, Path]) -> None:
        """Parse traces and creations; dump accepted traces and the registry."""
        cfg = self.config
        records = list(
            parse_traces(
                inputs["traces"],
                fmt=cfg.inputs.trace_format,
                diagnostics=ctx.diagnostics,
                chunk_rows=cfg.ingest.chunk_rows,
            )
        )
        trees = list(assemble_trace_trees(records, ctx.diagnostics, workers=ctx.workers))
        accepted = {t.tx_hash for t in trees}
        kept = [r for r in records if r.tx_hash in accepted]
        dump_records(kept, ctx.output(TRACES))

        erc20_flags: Optional[Union[Path, frozenset[str]]] = None
        if "erc20" in inputs:
            erc20_flags = inputs["erc20"]
        elif "bytecode" in inputs:
            erc20_flags = scan_erc20_bytecode(inputs["bytecode"], ctx.diagnostics)
        creations = parse_traces(
            inputs["creations"],
            fmt=cfg.inputs.trace_format,
            diagnostics=ctx.diagnostics,
            chunk_rows=cfg.ingest.chunk_rows,
        )
        registry = build_contract_registry(creations, erc20_flags, ctx.diagnostics)
        registry.dump(ctx.output(REGISTRY))

        ctx.metrics.set("records", len(records))
        ctx.metrics.set("records_kept", len(kept))
        ctx.metrics.set("transactions", len(trees))
        ctx.metrics.set("transactions_rejected", len({r.tx_hash for r in records}) - len(trees))
        ctx.metrics.set("contracts", len(registry))
        ctx.metrics.set("erc20_contracts", registry.erc20_count())

    def _extend_seeds(self, ctx: StageContext, inputs: dict[str, Path]) -> None:
        """Extend seeds along creator links; dump the labels and their counts."""
        seeds = load_seeds(inputs["seeds"], ctx.diagnostics)
        registry = ContractRegistry.load(inputs[REGISTRY])
        ext = extend_seeds(seeds, registry, self.config.ground_truth.one_hop_extension, ctx.diagnostics)
        ext.dump(ctx.output(EXTENDED_SEEDS))
        write_table(ext.count_rows(), ctx.output("seed_counts.csv"), SEED_COUNT_COLUMNS)

        tx_counts = protocol_tx_counts(self._trees(ctx, inputs[TRACES]), ext)
        write_table(
            ({"protocol": p, "transactions": n} for p, n in tx_counts.items()),
            ctx.output("protocol_tx_counts.csv"),
            PROTOCOL_TX_COLUMNS,
        )

        ctx.metrics.set("seeds", len(seeds))
        ctx.metrics.set("extended_seeds", len(ext))
        ctx.metrics.set("protocol_transactions", sum(tx_counts.values()))

    def _build_networks(self, ctx: StageContext, inputs: dict[str, Path]) -> None:
        """Aggregate protocol traces into the CA and protocol networks."""
        registry = ContractRegistry.load(inputs[REGISTRY])
        ext = ExtendedSeedSet.load(inputs[EXTENDED_SEEDS])
        trees = filter_protocol_traces(self._trees(ctx, inputs[TRACES]), ext)
        ca = build_ca_network(
            trees,
            registry,
            ext,
            include_failed=self.config.ingest.include_failed_traces,
            workers=ctx.workers,
        )
        protocol = build_protocol_network(ca, ext)
        ca.dump(ctx.output(CA_EDGES), ctx.output(CA_NODES))
        protocol.dump(ctx.output("protocol_edges.csv"), ctx.output("protocol_nodes.csv"))
        write_table(
            [
                graph_summary(ca, ctx.diagnostics).to_row("ca"),
                graph_summary(protocol, ctx.diagnostics).to_row("protocol"),
            ],
            ctx.output("network_summary.csv"),
            SUMMARY_COLUMNS,
        )

        ctx.metrics.set("ca_nodes", ca.node_count)
        ctx.metrics.set("ca_edges", ca.edge_count)
        ctx.metrics.set("ca_weight", ca.total_weight())
        ctx.metrics.set("protocol_nodes", protocol.node_count)
        ctx.metrics.set("protocol_edges", protocol.edge_count)

    def _topology(self, ctx: StageContext, inputs: dict[str, Path]) -> None:
        """Fit the degree distribution and decompose the CA network."""
        cfg = self.config.topology
        ca = WeightedDiGraph.load(inputs[CA_EDGES], inputs[CA_NODES])
        ext = ExtendedSeedSet.load(inputs[EXTENDED_SEEDS])
        values = degree_values(degree_sequence(ca, cfg.degree_mode))

        fit_row: dict[str, object] = {"degree_mode": cfg.degree_mode.value, "available": 0}
        comparisons = []
        fit = None
        try:
            fit = fit_power_law(values, min_tail=cfg.min_tail)
        except PowerLawFitError as exc:
            ctx.diagnostics.report("power_law_unavailable", str(exc), nodes=len(values))
        if fit is not None:
            fit_row.update(fit.to_row(), available=1)
            if cfg.bootstrap_n > 0:
                gof = bootstrap_gof(
                    values,
                    fit,
                    n=cfg.bootstrap_n,
                    seed=ctx.seed,
                    min_tail=cfg.min_tail,
                    workers=ctx.workers,
                )
                fit_row.update(
                    gof_p_value=gof.p_value,
                    gof_replicates=gof.n_bootstrap,
                    gof_failed=gof.n_failed,
                    gof_seed=gof.seed,
                    plausible=int(gof.plausible),
                )
            comparisons = compare_distributions(values, fit, diagnostics=ctx.diagnostics)
            fit_row["alternative_favoured"] = int(any(c.significant and c.R < 0 for c in comparisons))
        write_table([fit_row], ctx.output("powerlaw_fit.csv"), POWERLAW_COLUMNS)
        write_table((c.to_row() for c in comparisons), ctx.output("lr_comparisons.csv"), LR_COLUMNS)
        write_table(ccdf_rows(values, fit), ctx.output("ccdf.csv"), CCDF_COLUMNS)
        write_table(top_degree_rows(ca, cfg.top_degree_nodes), ctx.output("top_degrees.csv"), TOP_DEGREE_COLUMNS)

        strong = connected_components(ca, ComponentMode.STRONG)
        weak = connected_components(ca, ComponentMode.WEAK)
        write_table(
            [*strong.rows(ca, cfg.top_k_components), *weak.rows(ca, cfg.top_k_components)],
            ctx.output("components.csv"),
            COMPONENT_COLUMNS,
        )
        component_protocol_matrix(strong, ext, cfg.top_k_components).dump(ctx.output("component_matrix.csv"))

        ctx.metrics.set("degree_observations", len(values))
        ctx.metrics.set("strong_components", len(strong.components))
        ctx.metrics.set("weak_components", len(weak.components))
        ctx.metrics.set("largest_strong_component", strong.sizes[0] if strong.components else 0)

    def _communities(self, ctx: StageContext, inputs: dict[str, Path]) -> None:
        """Detect communities on the prepared CA graph and evaluate them."""
        cfg = self.config.community
        ca = WeightedDiGraph.load(inputs[CA_EDGES], inputs[CA_NODES])
        ext = ExtendedSeedSet.load(inputs[EXTENDED_SEEDS])

        reports = []
        try:
            g = prepare_community_graph(ca)
        except CommunityDetectionError as exc:
            ctx.diagnostics.report("communities_unavailable", str(exc))
            g = None
        if g is not None:
            ctx.metrics.set("prepared_nodes", g.number_of_nodes())
            ctx.metrics.set("prepared_edges", g.number_of_edges())
            for algorithm in cfg.algorithms:
                seed = derive_seed(ctx.seed, algorithm.value)
                partition = detect_communities(g, algorithm, seed, cfg.resolution)
                partition.dump(ctx.output(f"partition_{algorithm.value}.csv"))
                ctx.metrics.set(f"communities_{algorithm.value}", partition.n_communities)
                try:
                    reports.append(evaluate_partition(partition, ext, cfg.nmi_variant, cfg.nmi_scope, graph=g))
                except CommunityDetectionError as exc:
                    ctx.diagnostics.report("evaluation_unavailable", str(exc), algorithm=algorithm.value)

        write_table((r.to_row() for r in reports), ctx.output("evaluation.csv"), EVALUATION_COLUMNS)
        write_table(
            (
                {
                    "algorithm": r.algorithm,
                    "protocol": m.protocol,
                    "community": m.community,
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                }
                for r in reports
                for m in r.matches
            ),
            ctx.output("protocol_matches.csv"),
            MATCH_COLUMNS,
        )

    def _extract_blocks(self, ctx: StageContext, inputs: dict[str, Path]) -> None:
        """Generalise protocol traces and extract building blocks."""
        registry = ContractRegistry.load(inputs[REGISTRY])
        ext = ExtendedSeedSet.load(inputs[EXTENDED_SEEDS])
        trees = filter_protocol_traces(self._trees(ctx, inputs[TRACES]), ext)
        txs = extract_corpus(
            trees,
            ext,
            registry,
            include_failed=self.config.ingest.include_failed_traces,
            workers=ctx.workers,
        )
        store = BlockStore()
        for tx in txs:
            store.add_all(tx.blocks)
        store.dump(ctx.output(BLOCK_STORE))
        write_jsonl((tx.to_dict() for tx in txs), ctx.output(TX_BLOCKS))

        ctx.metrics.set("transactions", len(txs))
        ctx.metrics.set("blocks_emitted", sum(len(tx.blocks) for tx in txs))
        ctx.metrics.set("distinct_blocks", len(store))

    def _report(self, ctx: StageContext, inputs: dict[str, Path]) -> None:
        """Block frequencies, first-level compositions and the composition matrix."""
        cfg = self.config.reports
        store = BlockStore.load(inputs[BLOCK_STORE])
        ext = ExtendedSeedSet.load(inputs[EXTENDED_SEEDS])
        txs = [
            TxBlocks(
                tx_hash=record["tx_hash"],
                root_protocol=record["root_protocol"],
                blocks=tuple(store.get(h) for h in record["block_hashes"]),
            )
            for record in read_jsonl(inputs[TX_BLOCKS])
        ]
        names = load_method_names(inputs["method_names"], ctx.diagnostics) if "method_names" in inputs else None

        counts = count_blocks(
            ((b.hash, b.root_protocol, b.root_method_id) for tx in txs for b in tx.blocks),
            names,
        )
        write_table(
            (c.to_row(rank) for rank, c in enumerate(counts, start=1)),
            ctx.output("block_counts.csv"),
            BLOCK_COUNT_COLUMNS,
        )
        top_lines: list[str] = []
        for c in counts[: cfg.top_blocks]:
            top_lines.extend(describe_block(store.get(c.hash), c.count))
            top_lines.append("")
        atomic_write(ctx.output("top_blocks.txt"), "\n".join(top_lines))

        write_table(
            treemap_rows(txs, cfg.treemap_protocols or None),
            ctx.output("first_level.csv"),
            TREEMAP_COLUMNS,
        )
        matrix = build_composition_matrix(
            ((tx.root_protocol, tx_flattening(tx, store, ctx.diagnostics)) for tx in txs),
            protocols=ext.protocols(),
            diagnostics=ctx.diagnostics,
        )
        matrix.dump(ctx.output("composition.csv"), ctx.output("composition_intensity.csv"))

        ctx.metrics.set("transactions", len(txs))
        ctx.metrics.set("blocks", sum(c.count for c in counts))
        ctx.metrics.set("distinct_blocks", len(counts))
        ctx.metrics.set("matrix_rows", len(matrix.rows))
