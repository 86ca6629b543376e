"""Bow-tie decomposition of directed graphs.

Vertices are split relative to the largest strongly connected component:
IN reaches it, OUT is reachable from it, TUBES lie on IN->OUT detours
around it, TENDRILS hang off exactly one side, DISCONNECTED is the rest.
Acyclic graphs get a singleton LSCC (the component holding the
lexicographically smallest vertex id among the largest); the report flags
that degenerate case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .graphs import ServiceGraph

CLASSES = ("LSCC", "IN", "OUT", "TUBES", "TENDRILS", "DISCONNECTED")


@dataclass(frozen=True)
class BowTieAssignment:
    assignment: dict[str, str]
    counts: dict[str, int]
    fractions: dict[str, float]
    lscc_size: int
    degenerate_lscc: bool  # True when the LSCC is a single vertex

    def to_dict(self) -> dict:
        return {
            "counts": {c: self.counts[c] for c in CLASSES},
            "fractions": {c: self.fractions[c] for c in CLASSES},
            "lscc_size": self.lscc_size,
            "degenerate_lscc": self.degenerate_lscc,
            "n": sum(self.counts.values()),
        }


def _strongly_connected_components(g: ServiceGraph) -> list[np.ndarray]:
    """Kosaraju with iterative DFS; components as sorted index arrays."""
    n = g.N
    indptr, indices, _ = g.successors_csr()
    rindptr, rindices, _ = g.predecessors_csr()

    visited = np.zeros(n, dtype=bool)
    finish_order: list[int] = []
    for start in range(n):
        if visited[start]:
            continue
        stack = [(start, 0)]
        visited[start] = True
        while stack:
            u, ptr = stack.pop()
            nbrs = indices[indptr[u] : indptr[u + 1]]
            advanced = False
            while ptr < nbrs.size:
                v = int(nbrs[ptr])
                ptr += 1
                if not visited[v]:
                    visited[v] = True
                    stack.append((u, ptr))
                    stack.append((v, 0))
                    advanced = True
                    break
            if not advanced:
                finish_order.append(u)

    comp = np.full(n, -1, dtype=np.int64)
    current = 0
    for u in reversed(finish_order):
        if comp[u] >= 0:
            continue
        comp[u] = current
        stack = [u]
        while stack:
            x = stack.pop()
            for v in rindices[rindptr[x] : rindptr[x + 1]]:
                if comp[v] < 0:
                    comp[v] = current
                    stack.append(int(v))
        current += 1
    return [np.flatnonzero(comp == c) for c in range(current)]


def _reachable_from(indptr, indices, seeds: np.ndarray, n: int) -> np.ndarray:
    seen = np.zeros(n, dtype=bool)
    seen[seeds] = True
    stack = seeds.tolist()
    while stack:
        u = stack.pop()
        for v in indices[indptr[u] : indptr[u + 1]]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return seen


def bowtie_decompose(g: ServiceGraph) -> BowTieAssignment:
    """Partition the vertices of a directed graph into the six bow-tie
    classes. Ties for the largest SCC break toward the component holding
    the smallest vertex id (vertices are stored sorted, so index order is
    id order)."""
    if not g.directed:
        raise DataError("bow-tie decomposition needs a directed graph")
    if g.N == 0:
        raise DataError("empty graph")
    n = g.N
    sccs = _strongly_connected_components(g)
    sccs.sort(key=lambda m: (-m.size, int(m.min())))
    lscc = sccs[0]

    indptr, indices, _ = g.successors_csr()
    rindptr, rindices, _ = g.predecessors_csr()

    in_lscc = np.zeros(n, dtype=bool)
    in_lscc[lscc] = True
    from_lscc = _reachable_from(indptr, indices, lscc, n)
    to_lscc = _reachable_from(rindptr, rindices, lscc, n)

    out_mask = from_lscc & ~in_lscc
    in_mask = to_lscc & ~in_lscc
    rest = ~(in_lscc | out_mask | in_mask)

    in_seeds = np.flatnonzero(in_mask)
    out_seeds = np.flatnonzero(out_mask)
    from_in = (
        _reachable_from(indptr, indices, in_seeds, n) if in_seeds.size else np.zeros(n, bool)
    )
    to_out = (
        _reachable_from(rindptr, rindices, out_seeds, n) if out_seeds.size else np.zeros(n, bool)
    )

    labels = np.empty(n, dtype=object)
    labels[in_lscc] = "LSCC"
    labels[in_mask] = "IN"
    labels[out_mask] = "OUT"
    labels[rest & from_in & to_out] = "TUBES"
    labels[rest & (from_in ^ to_out)] = "TENDRILS"
    labels[rest & ~(from_in | to_out)] = "DISCONNECTED"

    assignment = {g.vertices[i]: str(labels[i]) for i in range(n)}
    counts = {c: 0 for c in CLASSES}
    for c in assignment.values():
        counts[c] += 1
    fractions = {c: counts[c] / n for c in CLASSES}
    return BowTieAssignment(
        assignment=assignment,
        counts=counts,
        fractions=fractions,
        lscc_size=int(lscc.size),
        degenerate_lscc=lscc.size == 1,
    )
