import json

import pytest

from oniongraph.graphs import build_dsg, to_usg, union
from oniongraph.records import parse_pages_file, persistence_report, summarize_services
from oniongraph.synth import CorpusSpec, generate_corpus


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(CorpusSpec(n_services=200, community_size=20, n_linkers=60, seed=3))


def test_deterministic_generation(corpus):
    again = generate_corpus(CorpusSpec(n_services=200, community_size=20, n_linkers=60, seed=3))
    assert again.pages == corpus.pages
    assert again.labels == corpus.labels
    assert again.planted == corpus.planted


def test_written_corpus_parses_back(corpus, tmp_path):
    paths = corpus.write(tmp_path)
    for snap in corpus.spec.snapshots:
        records = parse_pages_file(paths[snap])
        assert records == corpus.pages[snap]
    planted = json.loads((tmp_path / "planted.json").read_text())
    assert planted["n_core"] == corpus.planted["n_core"]


def test_retention_is_exact(corpus):
    summaries = {}
    for snap in corpus.spec.snapshots:
        summaries.update(summarize_services(corpus.pages[snap]))
    report = persistence_report(summaries)
    full = tuple(sorted(corpus.spec.snapshots))
    assert report.membership_counts[full] == corpus.planted["n_core"]
    assert report.membership_counts[full] == round(0.7 * corpus.spec.n_services)
    # every churn pattern misses at least one snapshot
    for pattern, count in report.membership_counts.items():
        if pattern != full:
            assert len(pattern) < len(corpus.spec.snapshots) and count > 0


def test_core_pages_identical_across_snapshots(corpus):
    summaries = {}
    for snap in corpus.spec.snapshots:
        summaries.update(summarize_services(corpus.pages[snap]))
    report = persistence_report(summaries)
    assert report.tree_persistent_count == corpus.planted["n_core"]
    assert report.char_persistent_count == corpus.planted["n_core"]


def test_mutual_edges_confined_to_blocks(corpus):
    blocks = set(corpus.planted["communities"])
    usgs = [to_usg(build_dsg(corpus.pages[s], s)) for s in corpus.spec.snapshots]
    usgu = union(usgs)
    assert set(usgu.vertices) <= blocks
    # and no mutual edge crosses the two blocks
    comm = corpus.planted["communities"]
    for (u, v) in usgu.edge_weight_map():
        assert comm[u] == comm[v]


def test_hub_dominates_out_degree(corpus):
    g = build_dsg(corpus.pages[corpus.spec.snapshots[0]], corpus.spec.snapshots[0])
    hub_idx = g.index[corpus.planted["hub"]]
    out = g.out_degrees()
    assert out[hub_idx] == out.max()
    assert out[hub_idx] >= 0.6 * corpus.spec.n_services
