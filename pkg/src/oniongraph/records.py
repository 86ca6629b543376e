"""Page-record ingestion and per-service snapshot summaries.

Input is a normalized JSON-lines format, one crawled page per line:

    {"snapshot": "SNP1", "service": "abc.onion", "path": "/",
     "depth": 0, "chars": 1200, "links": ["x.onion", "x.onion"]}

Unknown fields are ignored. Duplicate entries in "links" are preserved:
they carry the hyperlink multiplicity that later becomes edge weight.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import DataError, ParseError

# LCRatio band for directory-like services: one link every 200 chars up to
# one link every 20 chars (closed bounds).
BAND_LO = 1.0 / 200.0
BAND_HI = 1.0 / 20.0

SUMMARY_CSV_HEADER = ["service", "snapshot", "tree_height", "chars", "links", "lcratio"]


@dataclass(frozen=True)
class PageRecord:
    """One crawled page of a hidden service in one snapshot."""

    snapshot_id: str
    service_id: str
    page_path: str
    depth: int
    char_count: int
    out_links: tuple[str, ...]


@dataclass(frozen=True)
class ServiceSummary:
    """Per-(snapshot, service) aggregate of the service's crawled pages.

    tree_profile is the sorted multiset of (page_path, depth) pairs; two
    snapshots of a service are considered structurally identical when their
    profiles are equal.
    """

    service_id: str
    snapshot_id: str
    tree_height: int
    char_count: int
    link_count: int
    lcratio: float
    tree_profile: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class PersistenceReport:
    """Cross-snapshot service persistence statistics.

    membership_counts maps a sorted tuple of snapshot ids (the set of
    snapshots in which a service was crawled) to the number of services
    with exactly that membership pattern.
    """

    snapshots: tuple[str, ...]
    membership_counts: dict[tuple[str, ...], int]
    tree_persistent_count: int
    char_persistent_count: int
    band_fraction_per_snapshot: dict[str, float]

    @property
    def total_services(self) -> int:
        return sum(self.membership_counts.values())

    def to_dict(self) -> dict:
        return {
            "snapshots": list(self.snapshots),
            "membership_counts": {
                "+".join(pattern): count
                for pattern, count in sorted(self.membership_counts.items())
            },
            "tree_persistent_count": self.tree_persistent_count,
            "char_persistent_count": self.char_persistent_count,
            "band_fraction_per_snapshot": dict(sorted(self.band_fraction_per_snapshot.items())),
            "total_services": self.total_services,
        }


_REQUIRED_FIELDS = ("snapshot", "service", "path", "depth", "chars", "links")


def _field_error(name: str, why: str, line_no: int) -> ParseError:
    return ParseError(f"field '{name}' {why}", line_no)


def parse_pages(lines: Iterable[str]) -> list[PageRecord]:
    """Parse JSON-lines page records, in input order.

    Blank lines are skipped. Raises ParseError (with the 1-based line
    number) for malformed JSON, missing fields, or out-of-domain values.
    """
    records: list[PageRecord] = []
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", line_no) from exc
        if not isinstance(obj, dict):
            raise ParseError("record is not a JSON object", line_no)
        for name in _REQUIRED_FIELDS:
            if name not in obj:
                raise _field_error(name, "is missing", line_no)
        snapshot = obj["snapshot"]
        service = obj["service"]
        path = obj["path"]
        depth = obj["depth"]
        chars = obj["chars"]
        links = obj["links"]
        if not isinstance(snapshot, str) or not snapshot:
            raise _field_error("snapshot", "must be a non-empty string", line_no)
        if not isinstance(service, str) or not service:
            raise _field_error("service", "must be a non-empty string", line_no)
        if not isinstance(path, str):
            raise _field_error("path", "must be a string", line_no)
        if isinstance(depth, bool) or not isinstance(depth, int) or depth < 0:
            raise _field_error("depth", "must be a non-negative integer", line_no)
        if isinstance(chars, bool) or not isinstance(chars, int) or chars < 0:
            raise _field_error("chars", "must be a non-negative integer", line_no)
        if not isinstance(links, list) or any(not isinstance(t, str) for t in links):
            raise _field_error("links", "must be an array of strings", line_no)
        records.append(
            PageRecord(
                snapshot_id=snapshot,
                service_id=service,
                page_path=path,
                depth=depth,
                char_count=chars,
                out_links=tuple(links),
            )
        )
    return records


def parse_pages_file(path) -> list[PageRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_pages(fh)


def summarize_services(pages: Iterable[PageRecord]) -> dict[tuple[str, str], ServiceSummary]:
    """Aggregate pages into one ServiceSummary per (snapshot, service) pair.

    tree_height is the maximum page depth, char/link counts are sums over
    pages (duplicate links counted), and lcratio is links/chars with the
    zero-chars case pinned to 0 so the metric stays total.
    """
    groups: dict[tuple[str, str], list[PageRecord]] = {}
    for page in pages:
        groups.setdefault((page.snapshot_id, page.service_id), []).append(page)
    summaries: dict[tuple[str, str], ServiceSummary] = {}
    for (snapshot_id, service_id), members in groups.items():
        chars = sum(p.char_count for p in members)
        links = sum(len(p.out_links) for p in members)
        summaries[(snapshot_id, service_id)] = ServiceSummary(
            service_id=service_id,
            snapshot_id=snapshot_id,
            tree_height=max(p.depth for p in members),
            char_count=chars,
            link_count=links,
            lcratio=(links / chars) if chars > 0 else 0.0,
            tree_profile=tuple(sorted((p.page_path, p.depth) for p in members)),
        )
    return summaries


def persistence_report(summaries: Mapping[tuple[str, str], ServiceSummary]) -> PersistenceReport:
    """Compute membership patterns, structural/char persistence, and the
    LCRatio band fraction per snapshot.

    Requires summaries spanning at least two snapshots. A service is
    tree-persistent when its tree_profile is identical in every snapshot
    (which implies membership in all of them), char-persistent when its
    char_count is.
    """
    snapshots = tuple(sorted({snap for snap, _ in summaries}))
    if len(snapshots) < 2:
        raise DataError("insufficient snapshots: persistence needs at least 2")

    by_service: dict[str, dict[str, ServiceSummary]] = {}
    for (snap, svc), summary in summaries.items():
        by_service.setdefault(svc, {})[snap] = summary

    membership_counts: dict[tuple[str, ...], int] = {}
    tree_persistent = 0
    char_persistent = 0
    for svc, per_snap in by_service.items():
        pattern = tuple(sorted(per_snap))
        membership_counts[pattern] = membership_counts.get(pattern, 0) + 1
        if len(per_snap) == len(snapshots):
            profiles = {s.tree_profile for s in per_snap.values()}
            if len(profiles) == 1:
                tree_persistent += 1
            if len({s.char_count for s in per_snap.values()}) == 1:
                char_persistent += 1

    band_fraction: dict[str, float] = {}
    for snap in snapshots:
        in_snap = [s for (sn, _), s in summaries.items() if sn == snap]
        hits = sum(1 for s in in_snap if BAND_LO <= s.lcratio <= BAND_HI)
        band_fraction[snap] = hits / len(in_snap)

    return PersistenceReport(
        snapshots=snapshots,
        membership_counts=membership_counts,
        tree_persistent_count=tree_persistent,
        char_persistent_count=char_persistent,
        band_fraction_per_snapshot=band_fraction,
    )


def write_summary_csv(summaries: Mapping[tuple[str, str], ServiceSummary], fh) -> None:
    """Write the summary table as CSV (service,snapshot,tree_height,chars,links,lcratio)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SUMMARY_CSV_HEADER)
    for (snap, svc) in sorted(summaries, key=lambda k: (k[1], k[0])):
        s = summaries[(snap, svc)]
        writer.writerow(
            [s.service_id, s.snapshot_id, s.tree_height, s.char_count, s.link_count, repr(s.lcratio)]
        )
