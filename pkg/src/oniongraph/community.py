"""Community structure: seeded weighted Louvain, modularity, AMI.

Directed graphs are symmetrized before clustering (w'_uv = w_uv + w_vu):
modularity is computed on symmetric weights throughout. Louvain's output
depends on visit order, so the local-moving phase shuffles vertices with
an explicit seed; the same seed always reproduces the same partition.

Internally the symmetric adjacency follows the doubled-diagonal
convention: a supernode's self-entry holds twice its internal weight, so
vertex strength is a plain row sum and 2m is the grand total at every
aggregation level.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DataError
from .graphs import ServiceGraph

_GAIN_EPS = 1e-12
DEFAULT_LOUVAIN_SEED = 0


@dataclass(frozen=True)
class Partition:
    """Vertex -> dense integer cluster labels (0..k-1)."""

    assignment: dict[str, int]

    @classmethod
    def from_labels(cls, labels: dict) -> "Partition":
        """Relabel arbitrary cluster labels densely, by first appearance in
        sorted-vertex order (deterministic)."""
        dense: dict = {}
        assignment = {}
        for v in sorted(labels):
            raw = labels[v]
            if raw not in dense:
                dense[raw] = len(dense)
            assignment[v] = dense[raw]
        return cls(assignment)

    @property
    def n_vertices(self) -> int:
        return len(self.assignment)

    @property
    def n_clusters(self) -> int:
        return len(set(self.assignment.values())) if self.assignment else 0

    def cluster_sizes(self) -> list[int]:
        counts: dict[int, int] = {}
        for c in self.assignment.values():
            counts[c] = counts.get(c, 0) + 1
        return sorted(counts.values(), reverse=True)

    def restricted_to(self, vertices) -> "Partition":
        keep = {v: self.assignment[v] for v in vertices if v in self.assignment}
        return Partition.from_labels(keep)


def cluster_size_distribution(p: Partition) -> list[int]:
    """Cluster sizes in non-increasing order; sums to the vertex count."""
    return p.cluster_sizes()


def write_partition_csv(p: Partition, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["vertex", "cluster"])
    for v in sorted(p.assignment):
        writer.writerow([v, p.assignment[v]])


def read_partition_csv(fh) -> Partition:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != ["vertex", "cluster"]:
        raise DataError("partition CSV must start with 'vertex,cluster'")
    labels = {}
    for row in reader:
        if not row:
            continue
        if len(row) != 2:
            raise DataError(f"bad partition row: {row!r}")
        labels[row[0]] = int(row[1])
    return Partition.from_labels(labels)


# -- modularity ----------------------------------------------------------------


def modularity(g: ServiceGraph, p: Partition) -> float:
    """Weighted Newman modularity of the partition on the symmetrized graph."""
    missing = [v for v in g.vertices if v not in p.assignment]
    if missing:
        raise DataError(f"partition misses {len(missing)} vertices (e.g. {missing[0]!r})")
    if g.M == 0:
        raise DataError("modularity of an edgeless graph")
    labels = np.array([p.assignment[v] for v in g.vertices], dtype=np.int64)
    # symmetrized weights: every stored edge counts in both directions, so a
    # mutual directed pair folds to w_uv + w_vu automatically
    w = g.edge_weight.astype(np.float64)
    two_m = 2.0 * w.sum()
    strength = np.zeros(g.N)
    np.add.at(strength, g.edge_src, w)
    np.add.at(strength, g.edge_dst, w)
    intra = 2.0 * w[labels[g.edge_src] == labels[g.edge_dst]].sum()
    k = int(labels.max()) + 1
    cluster_strength = np.zeros(k)
    np.add.at(cluster_strength, labels, strength)
    return intra / two_m - float((cluster_strength / two_m) @ (cluster_strength / two_m))


# -- Louvain ---------------------------------------------------------------------


def _symmetric_adjacency(g: ServiceGraph) -> list[dict[int, float]]:
    adj: list[dict[int, float]] = [dict() for _ in range(g.N)]
    for s, d, w in zip(g.edge_src, g.edge_dst, g.edge_weight):
        s, d, w = int(s), int(d), float(w)
        adj[s][d] = adj[s].get(d, 0.0) + w
        adj[d][s] = adj[d].get(s, 0.0) + w
    return adj


def _one_level(adj, strength, two_m, rng) -> tuple[list[int], bool]:
    """Local-moving phase to a local optimum; returns (community, improved).

    Move gain is compared up to a positive factor: moving u from cu to c
    improves Q iff (w_uc - w_ucu)/two_m - k_u (S_c - S_cu)/two_m^2 > 0,
    with u's strength removed from both community totals.
    """
    n = len(adj)
    community = list(range(n))
    comm_strength = list(strength)
    order = list(range(n))
    improved = False
    moved = True
    while moved:
        moved = False
        rng.shuffle(order)
        for u in order:
            cu = community[u]
            ku = strength[u]
            links: dict[int, float] = {}
            for v, w in adj[u].items():
                if v != u:
                    cv = community[v]
                    links[cv] = links.get(cv, 0.0) + w
            comm_strength[cu] -= ku
            base = links.get(cu, 0.0)
            best_c, best_gain = cu, 0.0
            for c, w_uc in links.items():
                if c == cu:
                    continue
                gain = (w_uc - base) / two_m \
                    - ku * (comm_strength[c] - comm_strength[cu]) / (two_m * two_m)
                if gain > best_gain + _GAIN_EPS:
                    best_c, best_gain = c, gain
            community[u] = best_c
            comm_strength[best_c] += ku
            if best_c != cu:
                moved = True
                improved = True
    return community, improved


def _aggregate(adj, community):
    """Collapse communities to supernodes; returns (new_adj, node_map).

    The diagonal entry of a supernode accumulates every intra pair in both
    orientations, i.e. twice the internal weight, keeping row sums equal to
    summed member strengths.
    """
    relabel: dict[int, int] = {}
    for u in range(len(adj)):
        c = community[u]
        if c not in relabel:
            relabel[c] = len(relabel)
    new_adj: list[dict[int, float]] = [dict() for _ in range(len(relabel))]
    for u, nbrs in enumerate(adj):
        cu = relabel[community[u]]
        row = new_adj[cu]
        for v, w in nbrs.items():
            cv = relabel[community[v]]
            row[cv] = row.get(cv, 0.0) + w
    node_map = [relabel[community[u]] for u in range(len(adj))]
    return new_adj, node_map


def louvain(g: ServiceGraph, seed: int = DEFAULT_LOUVAIN_SEED) -> Partition:
    """Iterated local moving + aggregation until no level improves modularity."""
    if g.N == 0:
        raise DataError("louvain of an empty graph")
    if g.M == 0:
        return Partition.from_labels({v: i for i, v in enumerate(g.vertices)})
    rng = random.Random(seed)
    adj = _symmetric_adjacency(g)
    strength = [sum(nbrs.values()) for nbrs in adj]
    two_m = sum(strength)
    node_to_current = list(range(g.N))
    while True:
        community, improved = _one_level(adj, strength, two_m, rng)
        if not improved:
            break
        adj, node_map = _aggregate(adj, community)
        strength = [sum(nbrs.values()) for nbrs in adj]
        node_to_current = [node_map[c] for c in node_to_current]
    return Partition.from_labels(
        {g.vertices[i]: node_to_current[i] for i in range(g.N)}
    )


# -- adjusted mutual information ----------------------------------------------


def _contingency(p1: Partition, p2: Partition):
    vertices = sorted(p1.assignment)
    a = np.array([p1.assignment[v] for v in vertices], dtype=np.int64)
    b = np.array([p2.assignment[v] for v in vertices], dtype=np.int64)
    r, c = int(a.max()) + 1, int(b.max()) + 1
    table = np.zeros((r, c), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    return table


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def _mutual_information(table: np.ndarray, n: int) -> float:
    nz = table > 0
    pij = table[nz] / n
    pi = table.sum(axis=1) / n
    pj = table.sum(axis=0) / n
    outer = np.outer(pi, pj)[nz]
    return float((pij * np.log(pij / outer)).sum())


def _expected_mi(table: np.ndarray, n: int) -> float:
    """Exact expected MI under the permutation (hypergeometric) model."""
    a = table.sum(axis=1).astype(np.int64)
    b = table.sum(axis=0).astype(np.int64)
    max_n = int(max(a.max(), b.max()))
    nij = np.arange(1, max_n + 1, dtype=np.float64)
    log_nij = np.log(nij)
    gln_nij = gammaln(nij + 1)
    gln_a = gammaln(a + 1.0)
    gln_b = gammaln(b + 1.0)
    gln_na = gammaln(n - a + 1.0)
    gln_nb = gammaln(n - b + 1.0)
    gln_n = gammaln(n + 1.0)
    log_n = math.log(n)
    emi = 0.0
    for i, ai in enumerate(a):
        log_ai = math.log(ai)
        for j, bj in enumerate(b):
            lo = max(1, int(ai + bj - n))
            hi = int(min(ai, bj))
            if hi < lo:
                continue
            k = np.arange(lo, hi + 1)
            term1 = k / n
            term2 = log_n + log_nij[k - 1] - log_ai - math.log(bj)
            gln = (
                gln_a[i] + gln_b[j] + gln_na[i] + gln_nb[j]
                - gln_n - gln_nij[k - 1]
                - gammaln(ai - k + 1.0)
                - gammaln(bj - k + 1.0)
                - gammaln(n - ai - bj + k + 1.0)
            )
            emi += float((term1 * term2 * np.exp(gln)).sum())
    return emi


def ami(p1: Partition, p2: Partition) -> float:
    """Adjusted mutual information with arithmetic-mean normalization:
    (MI - E[MI]) / (mean(H1, H2) - E[MI]) under the permutation model.

    1 for identical partitions (up to relabeling), ~0 for independent ones.
    Requires identical vertex domains.
    """
    if set(p1.assignment) != set(p2.assignment):
        raise DataError("partitions cover different vertex sets")
    n = p1.n_vertices
    if n == 0:
        raise DataError("empty partitions")
    table = _contingency(p1, p2)
    if table.shape == (1, 1):
        return 1.0  # both trivial: identical by definition
    mi = _mutual_information(table, n)
    emi = _expected_mi(table, n)
    h1 = _entropy(table.sum(axis=1), n)
    h2 = _entropy(table.sum(axis=0), n)
    denom = 0.5 * (h1 + h2) - emi
    if abs(denom) < 1e-15:
        return 1.0 if abs(mi - emi) < 1e-15 else 0.0
    return (mi - emi) / denom


def ami_on_common(p1: Partition, p2: Partition) -> tuple[float, int]:
    """AMI restricted to the shared vertex set; returns (score, n_common).

    Score is NaN when fewer than 2 vertices are shared.
    """
    common = set(p1.assignment) & set(p2.assignment)
    if len(common) < 2:
        return math.nan, len(common)
    return ami(p1.restricted_to(common), p2.restricted_to(common)), len(common)
