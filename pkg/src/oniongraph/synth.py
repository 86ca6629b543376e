"""Deterministic synthetic crawl corpus with planted structure.

The generator plants, across three snapshots:

  * one dominant out-hub whose root page links a fixed fraction of all
    services,
  * two dense blocks of mutually linked services (the only mutual edges in
    the corpus, so the undirected graphs consist of exactly these blocks),
  * a stable core present in every snapshot (the retention fraction) and a
    churn population cycled through membership patterns that each miss at
    least one snapshot,
  * a population of "linker" services whose outgoing link counts follow a
    heavy tail and whose targets are drawn with Zipf popularity weights,
    giving a steeper in-degree than out-degree tail.

Core services keep identical pages in every snapshot, so the planted
all-snapshot membership count is exact and those services are both tree-
and char-persistent. Everything is driven by one seed; the same spec
always produces byte-identical page records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .records import PageRecord
from .stats import NORMAL_CLASSES, SUSPICIOUS_CLASSES, UNKNOWN_CLASSES

DEFAULT_SNAPSHOTS = ("SNP1", "SNP2", "SNP3")


@dataclass(frozen=True)
class CorpusSpec:
    n_services: int = 800
    snapshots: tuple[str, ...] = DEFAULT_SNAPSHOTS
    retention: float = 0.70
    hub_coverage: float = 0.70
    community_size: int = 60
    n_linkers: int = 320
    linker_alpha: float = 1.4  # heavy tail of outgoing link counts
    linker_cap: int = 250
    zipf_exponent: float = 0.62  # popularity skew of link targets
    intra_block_p: float = 0.10
    seed: int = 7


@dataclass
class Corpus:
    spec: CorpusSpec
    pages: dict[str, list[PageRecord]]  # snapshot -> records
    labels: list[tuple[str, str, str]]  # service, class, language
    planted: dict = field(default_factory=dict)

    def write(self, out_dir) -> dict[str, str]:
        """Write one JSONL file per snapshot plus labels.csv and
        planted.json; returns the path map."""
        import os

        os.makedirs(out_dir, exist_ok=True)
        paths = {}
        for snap in self.spec.snapshots:
            path = os.path.join(out_dir, f"pages_{snap}.jsonl")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                for rec in self.pages[snap]:
                    fh.write(
                        json.dumps(
                            {
                                "snapshot": rec.snapshot_id,
                                "service": rec.service_id,
                                "path": rec.page_path,
                                "depth": rec.depth,
                                "chars": rec.char_count,
                                "links": list(rec.out_links),
                            },
                            sort_keys=True,
                        )
                        + "\n"
                    )
            paths[snap] = path
        labels_path = os.path.join(out_dir, "labels.csv")
        with open(labels_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("service,class,language\n")
            for service, cls, lang in self.labels:
                fh.write(f"{service},{cls},{lang}\n")
        paths["labels"] = labels_path
        planted_path = os.path.join(out_dir, "planted.json")
        with open(planted_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.planted, fh, indent=2, sort_keys=True)
        paths["planted"] = planted_path
        return paths


def _service_name(i: int) -> str:
    return f"svc{i:04d}.onion"


def generate_corpus(spec: CorpusSpec = CorpusSpec()) -> Corpus:
    rng = np.random.default_rng(spec.seed)
    n = spec.n_services
    names = [_service_name(i) for i in range(n)]

    hub = names[0]
    block_a = names[1 : 1 + spec.community_size]
    block_b = names[1 + spec.community_size : 1 + 2 * spec.community_size]
    special = {hub, *block_a, *block_b}

    # membership: hub and blocks are always core; the rest fills the core up
    # to the retention fraction, churn cycles through patterns that each
    # miss at least one snapshot
    n_core = round(spec.retention * n)
    if n_core < len(special):
        raise ValueError("retention too small for the planted structure")
    periphery = [v for v in names if v not in special]
    core = sorted(special) + periphery[: n_core - len(special)]
    churn = periphery[n_core - len(special) :]
    snaps = spec.snapshots
    churn_patterns = [
        (snaps[0], snaps[1]),
        (snaps[1], snaps[2]),
        (snaps[0], snaps[2]),
        (snaps[0],),
        (snaps[1],),
        (snaps[2],),
    ]
    membership: dict[str, tuple[str, ...]] = {v: snaps for v in core}
    for i, v in enumerate(churn):
        membership[v] = churn_patterns[i % len(churn_patterns)]

    # outgoing links per service (identical in every snapshot the service
    # appears in, so core pages never change)
    links: dict[str, list[str]] = {v: [] for v in names}
    edge_set: set[tuple[str, str]] = set()

    def add_link(src: str, dst: str, times: int = 1) -> None:
        links[src].extend([dst] * times)
        edge_set.add((src, dst))

    def mutual_ok(src: str, dst: str) -> bool:
        return (dst, src) not in edge_set

    # hub covers a fixed fraction of all services; block A is excluded so
    # the hub never completes a mutual pair with its admirers
    eligible = np.array([v for v in names if v != hub and v not in block_a])
    n_targets = round(spec.hub_coverage * n)
    hub_targets = rng.choice(eligible, size=min(n_targets, eligible.size), replace=False)
    for t in sorted(hub_targets.tolist()):
        add_link(hub, t)

    # mutual blocks: ring + random chords, weight 2 both ways
    for block in (block_a, block_b):
        k = len(block)
        for i in range(k):
            pairs = [(i, (i + 1) % k)]
            for j in range(i + 2, k):
                if rng.random() < spec.intra_block_p:
                    pairs.append((i, j))
            for a, b in pairs:
                if block[a] != block[b] and (block[b], block[a]) not in edge_set:
                    add_link(block[a], block[b], 2)
                    add_link(block[b], block[a], 2)
    # block A endorses the hub one-way; block B points at a few periphery
    for a in block_a:
        add_link(a, hub)
    for b in block_b[::6]:
        target = periphery[int(rng.integers(0, len(periphery)))]
        if mutual_ok(b, target) and target != b:
            add_link(b, target)

    # linkers: heavy-tailed out counts, Zipf-popular periphery targets.
    # Taking every other periphery service mixes core and churn linkers, so
    # snapshot edge sets genuinely differ. Links between linkers only run
    # toward higher linker rank, so no directed cycle ever forms outside the
    # two planted blocks and the largest SCC stays small.
    from .fitting import sample_power_law

    linkers = periphery[::2][: spec.n_linkers]
    linker_rank = {v: i for i, v in enumerate(linkers)}
    pool = [v for v in periphery if v != hub]
    zipf_w = np.arange(1, len(pool) + 1, dtype=np.float64) ** (-spec.zipf_exponent)
    zipf_w /= zipf_w.sum()
    counts = np.minimum(
        sample_power_law(spec.linker_alpha, 1, len(linkers), rng), spec.linker_cap
    )
    for linker, count in zip(linkers, counts):
        targets = rng.choice(len(pool), size=min(int(count), len(pool) // 2),
                             replace=False, p=zipf_w)
        for t in targets.tolist():
            dst = pool[t]
            if dst == linker or not mutual_ok(linker, dst):
                continue
            if dst in linker_rank and linker_rank[dst] <= linker_rank[linker]:
                continue
            add_link(linker, dst)

    # pages: every service has a root page; linkers and blocks get a couple
    # of sub-pages so tree heights vary
    chars_of = {v: int(rng.integers(400, 6000)) for v in names}
    extra_pages = {v: int(rng.integers(0, 3)) for v in names}
    pages: dict[str, list[PageRecord]] = {snap: [] for snap in snaps}
    for v in names:
        for snap in membership[v]:
            out = links[v]
            # split links between root and sub-pages deterministically
            n_extra = extra_pages[v]
            cut = len(out) if n_extra == 0 else max(1, len(out) * 2 // 3) if out else 0
            pages[snap].append(
                PageRecord(snap, v, "/", 0, chars_of[v], tuple(out[:cut]))
            )
            rest = out[cut:]
            for e in range(n_extra):
                share = rest[e::n_extra]
                pages[snap].append(
                    PageRecord(
                        snap, v, f"/p{e}", 1 + (e % 2), chars_of[v] // (e + 2),
                        tuple(share),
                    )
                )
    for snap in snaps:
        pages[snap].sort(key=lambda r: (r.service_id, r.page_path))

    # labels: deterministic mixture over the full taxonomy, independent of
    # topology; a slice stays Unknown to exercise the exclusion rule
    pool = list(NORMAL_CLASSES + SUSPICIOUS_CLASSES)
    label_rows = []
    for i, v in enumerate(names):
        if i % 11 == 10:
            cls = UNKNOWN_CLASSES[i % len(UNKNOWN_CLASSES)]
        else:
            cls = pool[int(rng.integers(0, len(pool)))]
        label_rows.append((v, cls, "en" if i % 3 else "de"))

    planted = {
        "n_services": n,
        "snapshots": list(snaps),
        "n_core": len(core),
        "hub": hub,
        "hub_out_degree": len(set(links[hub])),
        "communities": {v: 0 for v in block_a} | {v: 1 for v in block_b},
        "seed": spec.seed,
    }
    return Corpus(spec=spec, pages=pages, labels=label_rows, planted=planted)
