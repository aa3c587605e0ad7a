"""Task similarity networks, Louvain community detection, and representative sampling.

A task network keeps only the pairwise-similarity edges at or above the
95th-percentile nearest-rank cutoff over all candidate pairs, so ties at
the cutoff never depend on iteration order. Louvain runs with a seeded
node-visit order and records the modularity trajectory so the monotone
improvement guarantee can be checked from the outside.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .embedding import EmbeddingStore
from .errors import DataError
from .percentile import nearest_rank

log = logging.getLogger(__name__)

# A community-move must improve modularity by more than this to be accepted.
MOVE_EPSILON = 1e-12


@dataclass(frozen=True)
class TaskNetwork:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]  # (a, b, weight) with a < b
    percentile_cutoff: float

    def degrees(self) -> dict[str, int]:
        deg = {n: 0 for n in self.nodes}
        for a, b, _ in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def adjacency(self) -> dict[str, dict[str, float]]:
        adj: dict[str, dict[str, float]] = {n: {} for n in self.nodes}
        for a, b, w in self.edges:
            adj[a][b] = w
            adj[b][a] = w
        return adj


@dataclass(frozen=True)
class Partition:
    communities: Mapping[str, int]
    modularity: float
    trajectory: tuple[float, ...]
    seed: int

    @property
    def n_communities(self) -> int:
        return len(set(self.communities.values()))


@dataclass(frozen=True)
class SamplePlan:
    total: int
    quotas: Mapping[int, int]
    selected: tuple[str, ...]
    rows: tuple[tuple[str, int, int, int], ...]  # (task_id, community, degree, rank)


def build_network(tasks: EmbeddingStore, edge_percentile: float = 95.0) -> TaskNetwork:
    """All-pairs cosine similarities, keeping edges >= the nearest-rank cutoff."""
    n = len(tasks)
    if n < 3:
        raise DataError(f"need at least 3 tasks to build a network, got {n}")
    vecs = tasks.vectors.astype(np.float64)
    norms = np.linalg.norm(vecs, axis=1)
    if np.any(norms == 0.0):
        zero = [tasks.ids[i] for i in np.flatnonzero(norms == 0.0)]
        raise DataError("all-zero task vectors: " + ", ".join(zero))
    gram = vecs @ vecs.T
    sims = np.clip(gram / np.outer(norms, norms), -1.0, 1.0)
    iu, ju = np.triu_indices(n, k=1)
    pair_sims = sims[iu, ju]
    cutoff = nearest_rank(pair_sims.tolist(), edge_percentile)
    edges = []
    for i, j, s in zip(iu, ju, pair_sims):
        if s >= cutoff:
            a, b = tasks.ids[i], tasks.ids[j]
            if b < a:
                a, b = b, a
            edges.append((a, b, float(s)))
    log.info(
        "task network: %d nodes, %d of %d candidate edges kept at cutoff %.6f",
        n,
        len(edges),
        len(pair_sims),
        cutoff,
    )
    return TaskNetwork(nodes=tuple(tasks.ids), edges=tuple(edges), percentile_cutoff=float(cutoff))


def modularity(net: TaskNetwork, communities: Mapping[str, Any]) -> float:
    """Weighted modularity Q = sum_c [S_c/(2m) - (tot_c/(2m))^2].

    S_c is the ordered-pair sum of intra-community weights and tot_c the sum
    of member degrees; m is the total edge weight.
    """
    if not net.edges:
        raise DataError("modularity is undefined on an empty edge set")
    if set(communities) != set(net.nodes):
        raise DataError("partition must assign every network node to a community")
    m = 0.0
    internal: dict[Any, float] = {}
    degree: dict[str, float] = {n: 0.0 for n in net.nodes}
    for a, b, w in net.edges:
        m += w
        degree[a] += w
        degree[b] += w
        ca, cb = communities[a], communities[b]
        if ca == cb:
            internal[ca] = internal.get(ca, 0.0) + w
    if m <= 0.0:
        raise DataError(f"total edge weight must be positive, got {m}")
    tot: dict[Any, float] = {}
    for node, c in communities.items():
        tot[c] = tot.get(c, 0.0) + degree[node]
    q = 0.0
    for c in tot:
        q += (2.0 * internal.get(c, 0.0)) / (2.0 * m) - (tot[c] / (2.0 * m)) ** 2
    return q


def _local_pass(
    adj: list[dict[int, float]],
    selfw: list[float],
    m: float,
    order: list[int],
) -> tuple[list[int], bool]:
    """One Louvain level: greedy node moves until no move improves Q."""
    n = len(adj)
    k = [2.0 * selfw[i] + sum(adj[i].values()) for i in range(n)]
    comm = list(range(n))
    sigma_tot = k.copy()
    moved_any = False
    improved = True
    while improved:
        improved = False
        for v in order:
            cv = comm[v]
            links: dict[int, float] = {}
            for u, w in adj[v].items():
                cu = comm[u]
                links[cu] = links.get(cu, 0.0) + w
            sigma_tot[cv] -= k[v]
            stay_gain = links.get(cv, 0.0) - sigma_tot[cv] * k[v] / (2.0 * m)
            best_c, best_gain = cv, stay_gain
            for c in sorted(links):
                if c == cv:
                    continue
                gain = links[c] - sigma_tot[c] * k[v] / (2.0 * m)
                if gain > best_gain and (gain - stay_gain) / m > MOVE_EPSILON:
                    best_c, best_gain = c, gain
            sigma_tot[best_c] += k[v]
            if best_c != cv:
                comm[v] = best_c
                improved = True
                moved_any = True
    return comm, moved_any


def _aggregate(
    adj: list[dict[int, float]],
    selfw: list[float],
    comm: list[int],
) -> tuple[list[dict[int, float]], list[float], dict[int, int]]:
    """Collapse communities into supernodes; self-loops absorb internal weight."""
    labels = sorted(set(comm))
    remap = {c: i for i, c in enumerate(labels)}
    n_c = len(labels)
    new_adj: list[dict[int, float]] = [{} for _ in range(n_c)]
    new_self = [0.0] * n_c
    for v in range(len(adj)):
        cv = remap[comm[v]]
        new_self[cv] += selfw[v]
        for u, w in adj[v].items():
            if u <= v:
                continue
            cu = remap[comm[u]]
            if cu == cv:
                new_self[cv] += w
            else:
                new_adj[cv][cu] = new_adj[cv].get(cu, 0.0) + w
                new_adj[cu][cv] = new_adj[cu].get(cv, 0.0) + w
    return new_adj, new_self, remap


def louvain(net: TaskNetwork, seed: int) -> Partition:
    """Greedy modularity optimization with a seeded node-visit order.

    Deterministic for a fixed seed. The returned trajectory holds the
    modularity of the induced partition of the original network after each
    aggregation level, starting from the all-singletons partition.
    """
    if not net.edges:
        raise DataError("cannot run community detection on an empty edge set")
    nodes = list(net.nodes)
    index = {node: i for i, node in enumerate(nodes)}
    n = len(nodes)
    adj: list[dict[int, float]] = [{} for _ in range(n)]
    m = 0.0
    for a, b, w in net.edges:
        i, j = index[a], index[b]
        adj[i][j] = adj[i].get(j, 0.0) + w
        adj[j][i] = adj[j].get(i, 0.0) + w
        m += w
    if m <= 0.0:
        raise DataError(f"total edge weight must be positive, got {m}")
    selfw = [0.0] * n
    rng = random.Random(seed)
    node_comm = list(range(n))  # original node index -> current supernode index

    def induced() -> dict[str, int]:
        return {nodes[i]: node_comm[i] for i in range(n)}

    trajectory = [modularity(net, induced())]
    while True:
        order = list(range(len(adj)))
        rng.shuffle(order)
        comm, moved = _local_pass(adj, selfw, m, order)
        if not moved:
            break
        adj, selfw, remap = _aggregate(adj, selfw, comm)
        node_comm = [remap[comm[c]] for c in node_comm]
        trajectory.append(modularity(net, induced()))

    # Relabel communities 0..K-1 ordered by their smallest member task id.
    members: dict[int, list[str]] = {}
    for node, c in induced().items():
        members.setdefault(c, []).append(node)
    final = {}
    for new_id, c in enumerate(sorted(members, key=lambda c: min(members[c]))):
        for node in members[c]:
            final[node] = new_id
    q = modularity(net, final)
    log.info("louvain: %d communities, modularity %.4f (seed %d)", len(members), q, seed)
    return Partition(communities=final, modularity=q, trajectory=tuple(trajectory), seed=seed)


def proportional_quotas(sizes: Mapping[Any, int], total: int) -> dict[Any, int]:
    """Largest-remainder apportionment of ``total`` over group sizes.

    Integer arithmetic throughout, so quotas are exact and always sum to
    ``total``. Leftover seats go to the largest remainders, ties to the
    larger group, then to the smaller key.
    """
    n = sum(sizes.values())
    if n <= 0:
        raise DataError("cannot apportion over empty groups")
    if total < 0:
        raise DataError(f"total must be non-negative, got {total}")
    quotas = {c: (total * sizes[c]) // n for c in sizes}
    leftover = total - sum(quotas.values())
    order = sorted(sizes, key=lambda c: (-((total * sizes[c]) % n), -sizes[c], c))
    for c in order[:leftover]:
        quotas[c] += 1
    return quotas


def sample_representatives(net: TaskNetwork, partition: Partition, total: int) -> SamplePlan:
    """Pick ``total`` tasks, proportionally per community, highest degree first."""
    if total <= 0:
        raise DataError(f"sample total must be positive, got {total}")
    if total > len(net.nodes):
        raise DataError(f"sample total {total} exceeds node count {len(net.nodes)}")
    if set(partition.communities) != set(net.nodes):
        raise DataError("partition must cover exactly the network nodes")
    sizes: dict[int, int] = {}
    members: dict[int, list[str]] = {}
    for node, c in partition.communities.items():
        sizes[c] = sizes.get(c, 0) + 1
        members.setdefault(c, []).append(node)
    quotas = proportional_quotas(sizes, total)
    degrees = net.degrees()
    selected: list[str] = []
    rows: list[tuple[str, int, int, int]] = []
    for c in sorted(quotas):
        ranked = sorted(members[c], key=lambda node: (-degrees[node], node))
        for rank, node in enumerate(ranked[: quotas[c]], start=1):
            selected.append(node)
            rows.append((node, c, degrees[node], rank))
    return SamplePlan(total=total, quotas=quotas, selected=tuple(selected), rows=tuple(rows))
