"""Community detection on the CA network and evaluation against protocol labels."""

from defiblocks.community.detection import Partition, detect_communities
from defiblocks.community.eigenvector import leading_eigenvector_communities
from defiblocks.community.evaluation import (
    EvaluationReport,
    ProtocolMatch,
    evaluate_partition,
    nmi,
)
from defiblocks.community.leiden import leiden_communities
from defiblocks.community.prepare import prepare_community_graph

__all__ = [
    "EvaluationReport",
    "Partition",
    "ProtocolMatch",
    "detect_communities",
    "evaluate_partition",
    "leading_eigenvector_communities",
    "leiden_communities",
    "nmi",
    "prepare_community_graph",
]
