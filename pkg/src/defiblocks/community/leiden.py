"""
Leiden modularity optimisation.

Three phases repeat until every community of the current aggregate graph is
a single node: fast local moving, refinement of each community into
well-connected sub-communities, and aggregation of the refined partition.
The aggregate graph starts from the unrefined partition.
"""

from collections import deque
from dataclasses import dataclass

import networkx as nx
import numpy as np

from defiblocks.logging.setup import get_logger

logger = get_logger(__name__)

# Randomness of refinement merges.
THETA = 0.01
MAX_LEVELS = 64


@dataclass
class _Level:
    """Weighted undirected graph of one aggregation level."""

    adj: list[dict[int, float]]
    node_weight: np.ndarray

    @property
    def n(self) -> int:
        return len(self.adj)


def _from_networkx(g: nx.Graph, nodes: list[str]) -> _Level:
    index = {v: i for i, v in enumerate(nodes)}
    adj: list[dict[int, float]] = [{} for _ in nodes]
    for u, v, data in g.edges(data=True):
        if u == v:
            continue
        w = float(data.get("weight", 1.0))
        i, j = index[u], index[v]
        adj[i][j] = adj[i].get(j, 0.0) + w
        adj[j][i] = adj[j].get(i, 0.0) + w
    node_weight = np.array([sum(a.values()) for a in adj], dtype=np.float64)
    return _Level(adj=adj, node_weight=node_weight)


def _move_nodes_fast(
    level: _Level, membership: np.ndarray, m2: float, gamma: float, rng: np.random.Generator
) -> bool:
    """Local moving with a node queue; returns True if any node moved."""
    comm_weight = np.zeros(level.n, dtype=np.float64)
    np.add.at(comm_weight, membership, level.node_weight)

    order = rng.permutation(level.n)
    queue = deque(int(v) for v in order)
    queued = np.ones(level.n, dtype=bool)
    moved = False

    while queue:
        v = queue.popleft()
        queued[v] = False
        own = int(membership[v])
        k_v = level.node_weight[v]

        links: dict[int, float] = {}
        for u, w in level.adj[v].items():
            c = int(membership[u])
            links[c] = links.get(c, 0.0) + w

        comm_weight[own] -= k_v
        best = own
        best_gain = links.get(own, 0.0) - gamma * k_v * comm_weight[own] / m2
        for c in sorted(links):
            gain = links[c] - gamma * k_v * comm_weight[c] / m2
            if gain > best_gain + 1e-12:
                best, best_gain = c, gain
        comm_weight[best] += k_v

        if best != own:
            membership[v] = best
            moved = True
            for u in level.adj[v]:
                if not queued[u] and membership[u] != best:
                    queued[u] = True
                    queue.append(u)
    return moved


def _refine(
    level: _Level, membership: np.ndarray, m2: float, gamma: float, rng: np.random.Generator
) -> np.ndarray:
    """Split each community into well-connected sub-communities."""
    refined = np.arange(level.n)
    ref_weight = level.node_weight.copy()
    singleton = np.ones(level.n, dtype=bool)

    comm_weight = np.zeros(level.n, dtype=np.float64)
    np.add.at(comm_weight, membership, level.node_weight)

    # Weight from each node to the rest of its community.
    inside = np.zeros(level.n, dtype=np.float64)
    for v in range(level.n):
        c = membership[v]
        inside[v] = sum(w for u, w in level.adj[v].items() if membership[u] == c)
    # Weight from each refined community to the rest of its community.
    ref_external = inside.copy()

    for v in (int(x) for x in rng.permutation(level.n)):
        if not singleton[v]:
            continue
        c = membership[v]
        k_v = level.node_weight[v]
        if inside[v] < gamma * k_v * (comm_weight[c] - k_v) / m2:
            continue

        links: dict[int, float] = {}
        for u, w in level.adj[v].items():
            if membership[u] == c and refined[u] != refined[v]:
                r = int(refined[u])
                links[r] = links.get(r, 0.0) + w

        candidates: list[int] = []
        gains: list[float] = []
        for r in sorted(links):
            k_r = ref_weight[r]
            if ref_external[r] < gamma * k_r * (comm_weight[c] - k_r) / m2:
                continue
            gain = links[r] - gamma * k_v * k_r / m2
            if gain >= 0:
                candidates.append(r)
                gains.append(gain)
        if not candidates:
            continue

        g = np.array(gains) / THETA
        prob = np.exp(g - g.max())
        prob /= prob.sum()
        target = candidates[int(rng.choice(len(candidates), p=prob))]

        own = int(refined[v])
        ref_weight[own] -= k_v
        ref_weight[target] += k_v
        ref_external[target] += inside[v] - 2.0 * links[target]
        refined[v] = target
        singleton[v] = False
        for u in level.adj[v]:
            if refined[u] == target:
                singleton[u] = False
    return refined


def _aggregate(level: _Level, refined: np.ndarray) -> tuple[_Level, np.ndarray]:
    """Collapse refined communities into nodes; returns (graph, node → aggregate index)."""
    _, mapping = np.unique(refined, return_inverse=True)
    n_new = int(mapping.max()) + 1 if level.n else 0
    adj: list[dict[int, float]] = [{} for _ in range(n_new)]
    for v in range(level.n):
        a = int(mapping[v])
        for u, w in level.adj[v].items():
            b = int(mapping[u])
            if a != b:
                adj[a][b] = adj[a].get(b, 0.0) + w
    node_weight = np.zeros(n_new, dtype=np.float64)
    np.add.at(node_weight, mapping, level.node_weight)
    return _Level(adj=adj, node_weight=node_weight), mapping


def leiden_communities(g: nx.Graph, seed: int, resolution: float = 1.0) -> list[set[str]]:
    """
    Detect communities with the Leiden algorithm.

    Args:
        g: Undirected graph; an optional `weight` edge attribute is honoured.
        seed: Random seed for node order and refinement.
        resolution: Modularity resolution.

    Returns:
        Communities as node sets.
    """
    nodes = sorted(g.nodes)
    if not nodes:
        return []
    rng = np.random.default_rng(seed)
    level = _from_networkx(g, nodes)
    m2 = float(level.node_weight.sum())
    if m2 == 0.0:
        return [{v} for v in nodes]

    # original node → node of the current level
    to_level = np.arange(len(nodes))
    membership = np.arange(level.n)

    for depth in range(MAX_LEVELS):
        _move_nodes_fast(level, membership, m2, resolution, rng)
        n_comms = len(np.unique(membership))
        if n_comms == level.n:
            break
        refined = _refine(level, membership, m2, resolution, rng)
        if len(np.unique(refined)) == level.n:
            break
        new_level, mapping = _aggregate(level, refined)
        new_membership = np.zeros(new_level.n, dtype=np.int64)
        new_membership[mapping] = membership
        _, new_membership = np.unique(new_membership, return_inverse=True)
        to_level = mapping[to_level]
        level, membership = new_level, new_membership
        logger.debug("leiden_level", depth=depth, nodes=level.n, communities=n_comms)

    final = membership[to_level]
    groups: dict[int, set[str]] = {}
    for v, c in zip(nodes, final):
        groups.setdefault(int(c), set()).add(v)
    return list(groups.values())
