import json

import pytest

from oniongraph.errors import DataError, ParseError
from oniongraph.records import (
    PageRecord,
    parse_pages,
    persistence_report,
    summarize_services,
    write_summary_csv,
)


def make_line(**overrides):
    base = {
        "snapshot": "S1",
        "service": "abc.onion",
        "path": "/",
        "depth": 0,
        "chars": 100,
        "links": ["x.onion"],
    }
    base.update(overrides)
    return json.dumps(base)


def page(snapshot="S1", service="a.onion", path="/", depth=0, chars=100, links=()):
    return PageRecord(snapshot, service, path, depth, chars, tuple(links))


class TestParsePages:
    def test_identity_mapping(self):
        records = parse_pages([make_line()])
        assert records == [
            PageRecord("S1", "abc.onion", "/", 0, 100, ("x.onion",))
        ]

    def test_empty_stream(self):
        assert parse_pages([]) == []

    def test_negative_depth_names_field(self):
        with pytest.raises(ParseError, match="depth"):
            parse_pages([make_line(depth=-1)])

    def test_missing_field_named(self):
        record = json.loads(make_line())
        del record["chars"]
        with pytest.raises(ParseError, match="chars"):
            parse_pages([json.dumps(record)])

    def test_malformed_line_reports_line_number(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_pages([make_line(), "{not json"])

    def test_unknown_fields_ignored(self):
        records = parse_pages([make_line(extra="whatever", ranking=3)])
        assert records[0].service_id == "abc.onion"

    def test_duplicate_links_preserved(self):
        records = parse_pages([make_line(links=["x.onion", "x.onion", "y.onion"])])
        assert records[0].out_links == ("x.onion", "x.onion", "y.onion")

    def test_blank_lines_skipped(self):
        assert len(parse_pages(["", make_line(), "  \n"])) == 1

    def test_bool_depth_rejected(self):
        with pytest.raises(ParseError, match="depth"):
            parse_pages([make_line(depth=True)])


class TestSummarize:
    def test_aggregation_forced_by_definitions(self):
        pages = [
            page(path="/", depth=0, chars=100, links=["b.onion"]),
            page(path="/sub", depth=2, chars=50, links=["b.onion", "c.onion", "c.onion"]),
        ]
        summaries = summarize_services(pages)
        s = summaries[("S1", "a.onion")]
        assert s.tree_height == 2
        assert s.char_count == 150
        assert s.link_count == 4
        assert s.lcratio == pytest.approx(4 / 150)
        assert s.tree_profile == (("/", 0), ("/sub", 2))

    def test_zero_chars_gives_zero_ratio(self):
        summaries = summarize_services([page(chars=0, links=[])])
        assert summaries[("S1", "a.onion")].lcratio == 0.0

    def test_services_aggregate_independently(self):
        pages = [page(service="a.onion", chars=10), page(service="b.onion", chars=20)]
        summaries = summarize_services(pages)
        assert summaries[("S1", "a.onion")].char_count == 10
        assert summaries[("S1", "b.onion")].char_count == 20

    def test_link_count_counts_duplicate_occurrences(self):
        pages = [page(links=["b.onion", "b.onion"])]
        assert summarize_services(pages)[("S1", "a.onion")].link_count == 2


def corpus_summaries(spec):
    """spec: mapping service -> {snapshot: (chars, profile)}."""
    pages = []
    for service, snaps in spec.items():
        for snap, (chars, paths) in snaps.items():
            for p, d in paths:
                pages.append(page(snapshot=snap, service=service, path=p, depth=d, chars=chars))
    return summarize_services(pages)


class TestPersistence:
    ROOT = (("/", 0),)
    DEEP = (("/", 0), ("/x", 1))

    def test_fully_persistent_service(self):
        summaries = corpus_summaries(
            {"a.onion": {"S1": (5, self.ROOT), "S2": (5, self.ROOT), "S3": (5, self.ROOT)}}
        )
        report = persistence_report(summaries)
        assert report.membership_counts == {("S1", "S2", "S3"): 1}
        assert report.tree_persistent_count == 1
        assert report.char_persistent_count == 1

    def test_reappearing_service_pattern(self):
        summaries = corpus_summaries(
            {
                "a.onion": {"S1": (5, self.ROOT), "S2": (5, self.ROOT), "S3": (5, self.ROOT)},
                "b.onion": {"S1": (5, self.ROOT), "S3": (5, self.ROOT)},
            }
        )
        report = persistence_report(summaries)
        assert report.membership_counts[("S1", "S3")] == 1

    def test_membership_counts_against_set_oracle(self):
        # churn corpus with known per-snapshot service sets
        sets = {
            "S1": {"a.onion", "b.onion", "c.onion", "e.onion"},
            "S2": {"a.onion", "c.onion", "d.onion"},
            "S3": {"a.onion", "b.onion", "d.onion", "f.onion"},
        }
        spec = {}
        for snap, services in sets.items():
            for svc in services:
                spec.setdefault(svc, {})[snap] = (7, self.ROOT)
        report = persistence_report(corpus_summaries(spec))

        # oracle: direct set operations over the service-id sets
        all_services = set().union(*sets.values())
        expected = {}
        for svc in all_services:
            pattern = tuple(sorted(snap for snap in sets if svc in sets[snap]))
            expected[pattern] = expected.get(pattern, 0) + 1
        assert report.membership_counts == expected
        assert report.total_services == len(all_services)

    def test_tree_change_breaks_tree_persistence_only(self):
        # chars per page chosen so the snapshot totals stay equal (10 = 2*5)
        summaries = corpus_summaries(
            {"a.onion": {"S1": (10, self.ROOT), "S2": (5, self.DEEP)}}
        )
        report = persistence_report(summaries)
        assert report.tree_persistent_count == 0
        assert report.char_persistent_count == 1

    def test_char_change_breaks_char_persistence_only(self):
        summaries = corpus_summaries(
            {"a.onion": {"S1": (5, self.ROOT), "S2": (9, self.ROOT)}}
        )
        report = persistence_report(summaries)
        assert report.tree_persistent_count == 1
        assert report.char_persistent_count == 0

    def test_single_snapshot_rejected(self):
        summaries = corpus_summaries({"a.onion": {"S1": (5, self.ROOT)}})
        with pytest.raises(DataError, match="insufficient snapshots"):
            persistence_report(summaries)

    def test_band_bounds_are_closed(self):
        pages = [
            page(snapshot="S1", service="lo.onion", chars=200, links=["t.onion"]),  # exactly 1/200
            page(snapshot="S1", service="hi.onion", chars=20, links=["t.onion"]),  # exactly 1/20
            page(snapshot="S1", service="out.onion", chars=10, links=["t.onion"]),  # 1/10, outside
            page(snapshot="S2", service="lo.onion", chars=200, links=["t.onion"]),
        ]
        report = persistence_report(summarize_services(pages))
        assert report.band_fraction_per_snapshot["S1"] == pytest.approx(2 / 3)
        assert report.band_fraction_per_snapshot["S2"] == pytest.approx(1.0)


def test_summary_csv_header_and_shape(tmp_path):
    summaries = summarize_services([page(), page(service="b.onion", snapshot="S2")])
    out = tmp_path / "summaries.csv"
    with open(out, "w") as fh:
        write_summary_csv(summaries, fh)
    lines = out.read_text().splitlines()
    assert lines[0] == "service,snapshot,tree_height,chars,links,lcratio"
    assert len(lines) == 3
