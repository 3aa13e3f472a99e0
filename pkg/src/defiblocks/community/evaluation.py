"""
Evaluation of detected communities against protocol labels.

Metrics are computed on labeled nodes only. Each protocol is matched to the
detected community maximising F1, where precision counts only labeled
members of the community. Reported values are unweighted means over
protocols.
"""

from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np
from sklearn.metrics import normalized_mutual_info_score

from defiblocks.community.detection import Partition
from defiblocks.config.schema import NmiScope, NmiVariant
from defiblocks.errors import CommunityDetectionError
from defiblocks.groundtruth.seeds import SeedSet
from defiblocks.logging.setup import get_logger

logger = get_logger(__name__)

EVALUATION_COLUMNS = (
    "algorithm",
    "seed",
    "n_communities",
    "n_communities_with_labels",
    "n_protocols",
    "precision",
    "recall",
    "f1",
    "nmi",
    "community_ratio",
    "modularity",
)

UNLABELED = "<unlabeled>"


@dataclass(frozen=True)
class ProtocolMatch:
    """Best-F1 community of one protocol."""

    protocol: str
    community: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvaluationReport:
    """
    Partition quality against ground truth.

    Attributes:
        n_communities: Communities in the partition.
        n_communities_with_labels: Communities with at least one labeled node.
        n_protocols: Protocols with at least one labeled node in the graph.
        precision: Mean best-match precision.
        recall: Mean best-match recall.
        f1: Mean best-match F1.
        nmi: Normalised mutual information.
        community_ratio: n_communities_with_labels / n_protocols.
        modularity: Modularity of the partition on the prepared graph (NaN if unknown).
        matches: Per-protocol best matches.
    """

    algorithm: str
    seed: int
    n_communities: int
    n_communities_with_labels: int
    n_protocols: int
    precision: float
    recall: float
    f1: float
    nmi: float
    community_ratio: float
    modularity: float = float("nan")
    matches: tuple[ProtocolMatch, ...] = ()

    def to_row(self) -> dict[str, object]:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "n_communities": self.n_communities,
            "n_communities_with_labels": self.n_communities_with_labels,
            "n_protocols": self.n_protocols,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "nmi": self.nmi,
            "community_ratio": self.community_ratio,
            "modularity": "" if np.isnan(self.modularity) else self.modularity,
        }


def same_partition(a: list[str], b: list[str]) -> bool:
    """True if two labelings are identical up to renaming of labels."""
    forward: dict[str, str] = {}
    backward: dict[str, str] = {}
    for x, y in zip(a, b):
        if forward.setdefault(x, y) != y or backward.setdefault(y, x) != x:
            return False
    return len(a) == len(b)


def nmi(
    labels_true: list[str],
    labels_pred: list[str],
    variant: NmiVariant = NmiVariant.ARITHMETIC,
) -> float:
    """
    Normalised mutual information of two labelings.

    Identical partitions (up to relabeling) score exactly 1.0.
    """
    if same_partition(labels_true, labels_pred):
        return 1.0
    return float(normalized_mutual_info_score(labels_true, labels_pred, average_method=variant.value))


def best_matches(
    protocol_members: dict[str, set[str]],
    community_labeled: dict[int, set[str]],
) -> list[ProtocolMatch]:
    """
    Best-F1 community for each protocol.

    Ties go to the lower community id.
    """
    matches: list[ProtocolMatch] = []
    for protocol in sorted(protocol_members):
        members = protocol_members[protocol]
        best = ProtocolMatch(protocol=protocol, community=-1, precision=0.0, recall=0.0, f1=0.0)
        for cid in sorted(community_labeled):
            labeled = community_labeled[cid]
            overlap = len(members & labeled)
            if not overlap:
                continue
            precision = overlap / len(labeled)
            recall = overlap / len(members)
            f1 = 2 * precision * recall / (precision + recall)
            if f1 > best.f1:
                best = ProtocolMatch(protocol, cid, precision, recall, f1)
        matches.append(best)
    return matches


def evaluate_partition(
    partition: Partition,
    ext: SeedSet,
    nmi_variant: NmiVariant = NmiVariant.ARITHMETIC,
    nmi_scope: NmiScope = NmiScope.LABELED,
    graph: Optional[nx.Graph] = None,
) -> EvaluationReport:
    """
    Evaluate a partition against protocol labels.

    Args:
        partition: Detected partition.
        ext: Extended seed set.
        nmi_variant: Entropy mean used to normalise NMI.
        nmi_scope: labeled (default) or all nodes, unlabeled nodes forming one class.
        graph: Prepared graph for the modularity column.

    Returns:
        The evaluation report.

    Raises:
        CommunityDetectionError: If no node of the partition is labeled.
    """
    nodes = sorted(partition.assignment)
    labeled = [v for v in nodes if v in ext]
    if not labeled:
        raise CommunityDetectionError("partition contains no labeled nodes")

    protocol_members: dict[str, set[str]] = {}
    community_labeled: dict[int, set[str]] = {}
    for v in labeled:
        protocol = ext.protocol_of(v)
        assert protocol is not None
        protocol_members.setdefault(protocol, set()).add(v)
        community_labeled.setdefault(partition.assignment[v], set()).add(v)

    matches = best_matches(protocol_members, community_labeled)

    scope_nodes = labeled if nmi_scope is NmiScope.LABELED else nodes
    truth = [ext.protocol_of(v) or UNLABELED for v in scope_nodes]
    pred = [str(partition.assignment[v]) for v in scope_nodes]

    modularity = float("nan")
    if graph is not None and graph.number_of_edges() > 0:
        modularity = float(nx.community.modularity(graph, partition.communities()))

    n_protocols = len(protocol_members)
    report = EvaluationReport(
        algorithm=partition.algorithm.value,
        seed=partition.seed,
        n_communities=partition.n_communities,
        n_communities_with_labels=len(community_labeled),
        n_protocols=n_protocols,
        precision=float(np.mean([m.precision for m in matches])),
        recall=float(np.mean([m.recall for m in matches])),
        f1=float(np.mean([m.f1 for m in matches])),
        nmi=nmi(truth, pred, nmi_variant),
        community_ratio=len(community_labeled) / n_protocols,
        modularity=modularity,
        matches=tuple(matches),
    )
    logger.info(
        "partition_evaluated",
        algorithm=report.algorithm,
        f1=round(report.f1, 4),
        nmi=round(report.nmi, 4),
        ratio=round(report.community_ratio, 4),
    )
    return report
