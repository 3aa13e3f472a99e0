"""End-to-end pipeline runs over the fixture corpus."""

from pathlib import Path
from typing import Any

import pandas as pd
import pytest

from defiblocks.blocks.store import BlockStore
from defiblocks.config.schema import DefiBlocksConfig, Stage
from defiblocks.errors import StageError
from defiblocks.pipeline.manifest import StageManifest
from defiblocks.pipeline.runner import PipelineRunner, stage_inputs
from defiblocks.utils.parallel import derive_seed

pytestmark = pytest.mark.integration


def _with(config: DefiBlocksConfig, **dotted: Any) -> DefiBlocksConfig:
    data = config.model_dump(mode="python")
    for key, value in dotted.items():
        section, attr = key.split("__")
        data[section][attr] = value
    return DefiBlocksConfig.model_validate(data)


def _table(config: DefiBlocksConfig, stage: Stage, name: str) -> pd.DataFrame:
    return pd.read_csv(Path(config.project.output_dir) / stage.value / name, dtype=str, keep_default_na=False)


@pytest.fixture()
def completed(fixture_config: DefiBlocksConfig) -> DefiBlocksConfig:
    PipelineRunner(fixture_config).run()
    return fixture_config


class TestFullRun:
    def test_every_stage_writes_manifest(self, completed: DefiBlocksConfig) -> None:
        for stage in Stage:
            manifest = StageManifest.load(Path(completed.project.output_dir) / stage.value)
            assert manifest is not None
            assert manifest.stage_seed == derive_seed(completed.pipeline.master_seed, stage.value)
            assert manifest.outputs

    def test_ingest_counters(self, completed: DefiBlocksConfig) -> None:
        manifest = StageManifest.load(Path(completed.project.output_dir) / Stage.INGEST.value)
        assert manifest.counters["records"] == 19
        assert manifest.counters["transactions"] == 3
        assert manifest.counters["erc20_contracts"] == 3

    def test_network_summary(self, completed: DefiBlocksConfig) -> None:
        summary = _table(completed, Stage.BUILD_NETWORKS, "network_summary.csv").set_index("network")
        assert summary.loc["ca", "node_count"] == "6"
        assert summary.loc["ca", "edge_count"] == "9"

    def test_block_counts(self, completed: DefiBlocksConfig) -> None:
        counts = _table(completed, Stage.REPORT, "block_counts.csv")
        assert len(counts) == 3
        top = counts.iloc[0]
        assert top["root_protocol"] == "uniswap"
        assert top["count"] == "2"
        assert top["method_name"] == "swap(uint256,uint256,address,bytes)"

    def test_composition_report(self, completed: DefiBlocksConfig) -> None:
        matrix = _table(completed, Stage.REPORT, "composition.csv").set_index("protocol")
        assert list(matrix.index) == ["1inch", "uniswap"]
        assert float(matrix.loc["1inch", "uniswap"]) == 1.0
        diagnostics = _table(completed, Stage.REPORT, "diagnostics.csv")
        assert "empty_composition_row" in set(diagnostics["code"])
        first_level = _table(completed, Stage.REPORT, "first_level.csv")
        assert first_level.iloc[0]["protocols"] == "sushiswap+uniswap"

    def test_top_blocks_and_store(self, completed: DefiBlocksConfig) -> None:
        root = Path(completed.project.output_dir)
        store = BlockStore.load(root / Stage.EXTRACT_BLOCKS.value / "block_store.jsonl")
        assert len(store) == 3
        text = (root / Stage.REPORT.value / "top_blocks.txt").read_text()
        assert all(digest in text for digest in store.blocks)

    def test_communities_evaluated(self, completed: DefiBlocksConfig) -> None:
        evaluation = _table(completed, Stage.COMMUNITIES, "evaluation.csv")
        assert list(evaluation["algorithm"]) == [a.value for a in completed.community.algorithms]


class TestRerun:
    def test_matching_manifests_skip(self, completed: DefiBlocksConfig) -> None:
        outcomes = PipelineRunner(completed).run()
        assert all(o.skipped for o in outcomes)

    def test_force_reruns(self, completed: DefiBlocksConfig) -> None:
        outcomes = PipelineRunner(completed, force=True).run([Stage.REPORT])
        assert [o.skipped for o in outcomes] == [False]

    def test_changed_setting_reruns_only_its_stage(self, completed: DefiBlocksConfig) -> None:
        outcomes = PipelineRunner(_with(completed, topology__top_degree_nodes=3)).run()
        ran = [o.stage for o in outcomes if not o.skipped]
        assert ran == [Stage.TOPOLOGY]

    def test_tampered_output_reruns(self, completed: DefiBlocksConfig) -> None:
        path = Path(completed.project.output_dir) / Stage.REPORT.value / "block_counts.csv"
        original = path.read_text()
        path.write_text("garbage\n")
        (outcome,) = PipelineRunner(completed).run([Stage.REPORT])
        assert not outcome.skipped
        assert path.read_text() == original


class TestDeterminism:
    def test_outputs_identical_across_runs_and_workers(self, fixture_config: DefiBlocksConfig, tmp_path: Path) -> None:
        other = _with(fixture_config, project__output_dir=tmp_path / "other", pipeline__threads=2)
        first = PipelineRunner(fixture_config).run()
        second = PipelineRunner(other).run()
        for a, b in zip(first, second):
            assert a.manifest.outputs == b.manifest.outputs, a.stage
            assert a.manifest.inputs == b.manifest.inputs, a.stage

    def test_seed_changes_stage_seeds(self, fixture_config: DefiBlocksConfig) -> None:
        a = derive_seed(fixture_config.pipeline.master_seed, Stage.COMMUNITIES.value)
        b = derive_seed(fixture_config.pipeline.master_seed + 1, Stage.COMMUNITIES.value)
        assert a != b


class TestFailures:
    def test_missing_upstream(self, fixture_config: DefiBlocksConfig) -> None:
        with pytest.raises(StageError, match="produced by stage 'build-networks'"):
            PipelineRunner(fixture_config).run([Stage.TOPOLOGY])

    def test_missing_input_file(self, fixture_config: DefiBlocksConfig, tmp_path: Path) -> None:
        config = _with(fixture_config, inputs__traces_path=tmp_path / "absent.csv")
        with pytest.raises(StageError, match="the trace file"):
            stage_inputs(config, Stage.INGEST)

    def test_empty_trace_file(self, fixture_config: DefiBlocksConfig, tmp_path: Path) -> None:
        empty = tmp_path / "empty.csv"
        empty.write_text("", encoding="utf-8")
        config = _with(fixture_config, inputs__traces_path=empty)
        outcomes = PipelineRunner(config).run()
        assert [o.stage for o in outcomes] == list(Stage)
        fit = _table(config, Stage.TOPOLOGY, "powerlaw_fit.csv")
        assert fit.iloc[0]["available"] == "0"
        assert len(_table(config, Stage.REPORT, "block_counts.csv")) == 0
        codes = set(_table(config, Stage.COMMUNITIES, "diagnostics.csv")["code"])
        assert codes == {"communities_unavailable"}
