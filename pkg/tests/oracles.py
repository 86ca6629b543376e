"""Brute-force reference implementations used to verify the library.

Everything here is deliberately independent of the package internals:
distances come from Floyd-Warshall min-plus iteration, path counts from a
DP over the distance matrix, reachability from boolean matrix closure.
"""

import numpy as np

from oniongraph.graphs import ServiceGraph


def vid(i):
    return f"v{i:03d}.onion"


def random_digraph(rng, n, p, max_weight=5):
    edges = []
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < p:
                edges.append((vid(i), vid(j), int(rng.integers(1, max_weight + 1))))
    return ServiceGraph.from_edges(True, edges, isolated_vertices=[vid(i) for i in range(n)])


def random_undirected(rng, n, p, max_weight=5):
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((vid(i), vid(j), int(rng.integers(1, max_weight + 1))))
    return ServiceGraph.from_edges(False, edges, isolated_vertices=[vid(i) for i in range(n)])


def adjacency_bool(g):
    a = np.zeros((g.N, g.N), dtype=bool)
    a[g.edge_src, g.edge_dst] = True
    if not g.directed:
        a[g.edge_dst, g.edge_src] = True
    return a


def floyd_warshall(g):
    """All-pairs unweighted distances; np.inf for unreachable pairs."""
    n = g.N
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    a = adjacency_bool(g)
    dist[a] = 1.0
    for k in range(n):
        np.minimum(dist, dist[:, k, None] + dist[None, k, :], out=dist)
    return dist


def path_counts(g, dist):
    """sigma[s, t] = number of shortest s->t paths, from the distance matrix."""
    n = g.N
    a = adjacency_bool(g)
    sigma = np.zeros((n, n))
    for s in range(n):
        sigma[s, s] = 1.0
        finite = np.isfinite(dist[s])
        for v in np.argsort(dist[s])[: int(finite.sum())]:
            v = int(v)
            if v == s:
                continue
            preds = np.flatnonzero(a[:, v] & (dist[s] == dist[s, v] - 1))
            sigma[s, v] = sigma[s, preds].sum()
    return sigma


def betweenness_oracle(g):
    """BC(v) = sum over ordered finite (s,t), s != v != t, of
    sigma_st(v)/sigma_st with sigma_st(v) = sigma_sv * sigma_vt when v lies
    on a shortest path."""
    n = g.N
    dist = floyd_warshall(g)
    sigma = path_counts(g, dist)
    bc = np.zeros(n)
    idx = np.arange(n)
    for s in range(n):
        ds = dist[s]
        on_path = (ds[:, None] + dist) == ds[None, :]
        valid = on_path & np.isfinite(dist) & np.isfinite(ds[:, None])
        valid[:, s] = False
        valid[s, :] = False
        valid[idx, idx] = False
        with np.errstate(divide="ignore", invalid="ignore"):
            contrib = np.where(valid, sigma[s][:, None] * sigma / sigma[s][None, :], 0.0)
        contrib[:, ~np.isfinite(ds) | (sigma[s] == 0)] = 0.0
        bc += contrib.sum(axis=1)
    return bc


def closeness_oracle(dist):
    """Incoming-distance closeness with reachable-count rescaling."""
    n = dist.shape[0]
    cc = np.zeros(n)
    for v in range(n):
        col = dist[:, v]
        finite = np.isfinite(col) & (col > 0)
        r = int(finite.sum())
        if r and n > 1:
            cc[v] = (r / (n - 1)) * (r / col[finite].sum())
    return cc


def eccentricity_oracle(dist):
    n = dist.shape[0]
    ecc = np.zeros(n)
    for v in range(n):
        row = dist[v]
        finite = np.isfinite(row) & (row > 0)
        ecc[v] = row[finite].max() if finite.any() else 0.0
    return ecc


def local_efficiency_oracle(g, dist):
    n = g.N
    a = adjacency_bool(g)
    eff = np.full(n, np.nan)
    for v in range(n):
        nbrs = np.flatnonzero(a[v])
        k = nbrs.size
        if k < 2:
            continue
        total = 0.0
        for u in nbrs:
            for w in nbrs:
                if u != w and np.isfinite(dist[u, w]):
                    total += 1.0 / dist[u, w]
        eff[v] = total / (k * (k - 1))
    return eff


def local_transitivity_oracle(g):
    n = g.N
    a = adjacency_bool(g)
    tra = np.full(n, np.nan)
    for v in range(n):
        nbrs = np.flatnonzero(a[v])
        k = nbrs.size
        if k < 2:
            continue
        count = 0
        for u in nbrs:
            for w in nbrs:
                if u != w and (a[u, w] or a[w, u]):
                    count += 1
        tra[v] = count / (k * (k - 1))
    return tra


def distance_stats_oracle(dist):
    n = dist.shape[0]
    off = ~np.eye(n, dtype=bool)
    finite = np.isfinite(dist) & off
    diameter = int(dist[finite].max()) if finite.any() else 0
    avg = float(dist[finite].mean()) if finite.any() else float("nan")
    inv = np.where(finite, 1.0 / np.where(finite, dist, 1.0), 0.0)
    eglo = float(inv.sum()) / (n * (n - 1)) if n > 1 else float("nan")
    return diameter, avg, eglo


def reachability_closure(g):
    """Boolean matrix R with R[u, v] = True iff a path (possibly empty) u->v exists."""
    a = adjacency_bool(g)
    r = a | np.eye(g.N, dtype=bool)
    while True:
        nxt = r | (r @ r)
        if np.array_equal(nxt, r):
            return r
        r = nxt


def bowtie_oracle(g):
    """Literal component definitions applied to the transitive closure."""
    n = g.N
    a = adjacency_bool(g)
    reach = reachability_closure(g)
    # strongly connected components from mutual reachability
    mutual = reach & reach.T
    seen = np.zeros(n, dtype=bool)
    sccs = []
    for v in range(n):
        if not seen[v]:
            members = np.flatnonzero(mutual[v])
            seen[members] = True
            sccs.append(members)
    sccs.sort(key=lambda m: (-m.size, int(m.min())))
    lscc = set(sccs[0].tolist())

    classes = {}
    lscc_arr = np.array(sorted(lscc))
    to_lscc = reach[:, lscc_arr].any(axis=1)
    from_lscc = reach[lscc_arr, :].any(axis=0)
    in_set = {v for v in range(n) if v not in lscc and to_lscc[v]}
    out_set = {v for v in range(n) if v not in lscc and from_lscc[v]}
    rest = [v for v in range(n) if v not in lscc and v not in in_set and v not in out_set]
    in_arr = np.array(sorted(in_set), dtype=int)
    out_arr = np.array(sorted(out_set), dtype=int)
    for v in rest:
        from_in = bool(reach[in_arr, v].any()) if in_arr.size else False
        to_out = bool(reach[v, out_arr].any()) if out_arr.size else False
        if from_in and to_out:
            classes[v] = "TUBES"
        elif from_in or to_out:
            classes[v] = "TENDRILS"
        else:
            classes[v] = "DISCONNECTED"
    for v in lscc:
        classes[v] = "LSCC"
    for v in in_set:
        classes[v] = "IN"
    for v in out_set:
        classes[v] = "OUT"
    return {g.vertices[v]: classes[v] for v in range(n)}
