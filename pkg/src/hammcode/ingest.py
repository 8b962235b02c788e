"""Offline corpus construction from catalog and search-log exports.

Two TSV inputs drive the build. The catalog export lists raw identifier
codes with the item and its sales; the query log lists queries that led
to a click or purchase of an item, with an engagement count. Codes are
normalized, deduplicated to the best-selling item, restricted to 7+
characters, and joined with their top-3 queries by engagement.

File contracts (UTF-8, tab-separated, LF line endings):

    catalog.tsv    header "code\\titem_id\\tsales"
    query_log.tsv  header "item_id\\tquery\\tengagement"

Sales and engagement are base-10 non-negative integers. Malformed data
lines are skipped and counted; more than 1% malformed aborts the load.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .codec import EmptyCodeError, normalize
from .index import MIN_CODE_LEN, AssociatedQuery, CodeRecord

CATALOG_HEADER = "code\titem_id\tsales"
QUERY_LOG_HEADER = "item_id\tquery\tengagement"
MALFORMED_FRACTION_CAP = 0.01
TOP_QUERIES_PER_CODE = 3


class IngestError(Exception):
    """Base class for corpus-load failures."""


class HeaderMismatchError(IngestError):
    """The file's header line does not match the TSV contract."""


class TooManyMalformedError(IngestError):
    """More than the tolerated fraction of data lines were malformed."""


@dataclass(frozen=True)
class CatalogRow:
    raw_code: str
    item_id: str
    sales: int


@dataclass(frozen=True)
class QueryLogRow:
    item_id: str
    query_text: str
    engagement: int


@dataclass
class IngestStats:
    """Row-level accounting surfaced by the build command."""

    catalog_rows: int = 0
    query_rows: int = 0
    malformed_lines: int = 0
    unnormalizable_codes: int = 0
    short_codes: int = 0
    merged_duplicates: int = 0
    orphan_queries: int = 0


_COUNT_MAX = 2**64 - 1  # snapshot format stores counts as u64
_FIELD_BYTES_MAX = 65535  # snapshot format length prefixes are u16


def _nonneg_int(text: str) -> int | None:
    if text.isascii() and text.isdigit():
        value = int(text)
        if value <= _COUNT_MAX:
            return value
    return None


def _field_fits(text: str) -> bool:
    return len(text.encode("utf-8")) <= _FIELD_BYTES_MAX


def _load_tsv(path: str | Path, header: str) -> tuple[list[list[str]], int, int]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != header:
        raise HeaderMismatchError(f"{path}: expected header {header!r}")
    rows = []
    malformed = 0
    for line in lines[1:]:
        cols = line.split("\t")
        if len(cols) != 3:
            malformed += 1
            continue
        rows.append(cols)
    return rows, malformed, len(lines) - 1


def _check_malformed(path: str | Path, malformed: int, data_lines: int) -> None:
    if data_lines and malformed > MALFORMED_FRACTION_CAP * data_lines:
        raise TooManyMalformedError(
            f"{path}: {malformed} of {data_lines} data lines malformed"
        )


def load_catalog(path: str | Path, stats: IngestStats | None = None) -> list[CatalogRow]:
    """Parse a catalog export; malformed lines are counted, not fatal."""
    stats = stats if stats is not None else IngestStats()
    raw_rows, malformed, data_lines = _load_tsv(path, CATALOG_HEADER)
    rows = []
    for code, item_id, sales_text in raw_rows:
        sales = _nonneg_int(sales_text)
        if not item_id or sales is None or not _field_fits(item_id):
            malformed += 1
            continue
        rows.append(CatalogRow(code, item_id, sales))
    _check_malformed(path, malformed, data_lines)
    stats.malformed_lines += malformed
    stats.catalog_rows += len(rows)
    return rows


def load_query_log(path: str | Path, stats: IngestStats | None = None) -> list[QueryLogRow]:
    """Parse a query-log export; malformed lines are counted, not fatal."""
    stats = stats if stats is not None else IngestStats()
    raw_rows, malformed, data_lines = _load_tsv(path, QUERY_LOG_HEADER)
    rows = []
    for item_id, query_text, engagement_text in raw_rows:
        engagement = _nonneg_int(engagement_text)
        query_text = query_text.strip()
        if not item_id or not query_text or engagement is None:
            malformed += 1
            continue
        if not _field_fits(query_text):
            malformed += 1
            continue
        rows.append(QueryLogRow(item_id, query_text, engagement))
    _check_malformed(path, malformed, data_lines)
    stats.malformed_lines += malformed
    stats.query_rows += len(rows)
    return rows


def select_items(
    rows: Iterable[CatalogRow], stats: IngestStats | None = None
) -> dict[str, tuple[str, int]]:
    """Pick one item per normalized code: highest sales, then lowest item_id.

    Codes that normalize to nothing or fall below the 7-character floor
    are dropped and counted. The outcome is independent of row order.
    """
    stats = stats if stats is not None else IngestStats()
    selected: dict[str, tuple[str, int]] = {}
    for row in rows:
        try:
            code = normalize(row.raw_code)
        except EmptyCodeError:
            stats.unnormalizable_codes += 1
            continue
        if len(code) < MIN_CODE_LEN:
            stats.short_codes += 1
            continue
        current = selected.get(code)
        if current is None:
            selected[code] = (row.item_id, row.sales)
            continue
        stats.merged_duplicates += 1
        item_id, sales = current
        if row.sales > sales or (row.sales == sales and row.item_id < item_id):
            selected[code] = (row.item_id, row.sales)
    return selected


def attach_queries(
    items: dict[str, tuple[str, int]],
    logs: Iterable[QueryLogRow],
    stats: IngestStats | None = None,
) -> list[tuple[str, CodeRecord]]:
    """Join each selected item with its top-3 queries by engagement.

    Duplicate query texts for an item merge by summing engagement; ties
    sort by text. Items with no logged queries are still emitted; they
    serve as Hamming neighbors even without suggestions. Output is
    sorted by code so downstream snapshots are reproducible regardless
    of input row order.
    """
    stats = stats if stats is not None else IngestStats()
    wanted = {item_id for item_id, _ in items.values()}
    per_item: dict[str, dict[str, int]] = {}
    for row in logs:
        if row.item_id not in wanted:
            stats.orphan_queries += 1
            continue
        counts = per_item.setdefault(row.item_id, {})
        merged = counts.get(row.query_text, 0) + row.engagement
        counts[row.query_text] = min(merged, _COUNT_MAX)  # saturate at the u64 format bound

    out = []
    for code in sorted(items):
        item_id, _sales = items[code]
        counts = per_item.get(item_id, {})
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        queries = tuple(
            AssociatedQuery(text, engagement)
            for text, engagement in ranked[:TOP_QUERIES_PER_CODE]
        )
        out.append((code, CodeRecord(code, item_id, queries)))
    return out


def build_corpus(
    catalog_path: str | Path,
    query_log_path: str | Path,
    stats: IngestStats | None = None,
) -> list[tuple[str, CodeRecord]]:
    """Full offline job: load both exports and emit index-ready records."""
    stats = stats if stats is not None else IngestStats()
    catalog = load_catalog(catalog_path, stats)
    logs = load_query_log(query_log_path, stats)
    items = select_items(catalog, stats)
    return attach_queries(items, logs, stats)
