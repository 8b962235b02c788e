"""Hamming-space index over packed identifier keys.

The index is an immutable snapshot: a dense array of 120-bit keys, a
parallel array of records, and optionally a multi-index hash structure
for sublinear radius queries. Queries never mutate a snapshot; the
service layer replaces whole snapshots atomically.

Snapshot wire format (all integers little-endian):

    magic          4 bytes  "HMX1"
    version        u16      currently 1
    flags          u16      bit 0: rebuild the MIH structure on load
    record_count   u64
    charset_hash   u64      FNV-1a fingerprint of the symbol table
    keys           record_count * 16 bytes (low u64, high u64)
    records        per record:
                     canonical_code  u8 length + ASCII bytes
                     item_id         u16 length + UTF-8 bytes
                     query_count     u8
                     per query:      u16 length + UTF-8 bytes, engagement u64
    crc            u32      CRC32 of all preceding bytes

The MIH structure itself is never persisted; it is rebuilt on load when
the flag bit is set.
"""

from __future__ import annotations

import itertools
import math
import struct
import time
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .codec import KEY_BITS, charset_hash, encode

MAGIC = b"HMX1"
FORMAT_VERSION = 1
FLAG_MIH = 1
MIN_CODE_LEN = 7

_MASK64 = (1 << 64) - 1
_HEADER = struct.Struct("<4sHHQQ")


class SnapshotError(Exception):
    """Base class for snapshot build and I/O failures."""


class ShortCodeError(SnapshotError, ValueError):
    """A code below the 7-character index floor reached the index."""


class DuplicateCodeError(SnapshotError):
    """The same normalized code appeared twice in the build input."""


class CorruptSnapshotError(SnapshotError):
    """The byte stream is not a well-formed snapshot."""


class CharsetMismatchError(SnapshotError):
    """The snapshot was built against a different symbol table."""


class MihMissingError(SnapshotError):
    """A MIH query hit a snapshot built without the MIH structure."""


class Neighbor(NamedTuple):
    ordinal: int
    distance: int


@dataclass(frozen=True)
class AssociatedQuery:
    text: str
    engagement: int


@dataclass(frozen=True)
class CodeRecord:
    """Index value: the canonical code, its item, and its top queries."""

    canonical_code: str
    item_id: str
    queries: tuple[AssociatedQuery, ...] = ()

    def __post_init__(self) -> None:
        if len(self.canonical_code) < MIN_CODE_LEN:
            raise ShortCodeError(
                f"canonical code must have at least {MIN_CODE_LEN} characters"
            )
        if len(self.queries) > 3:
            raise ValueError("a record carries at most 3 queries")
        texts = [q.text for q in self.queries]
        if len(set(texts)) != len(texts):
            raise ValueError("record queries must have distinct texts")
        if any(q.engagement < 0 for q in self.queries):
            raise ValueError("engagement counts must be non-negative")


@dataclass(frozen=True)
class BuildMeta:
    record_count: int
    charset_hash: int
    collisions: int = 0
    built_at: float | None = None


@dataclass(frozen=True)
class MihStructure:
    """Per-substring hash tables for pigeonhole radius search.

    The 120 key bits are split into m contiguous equal substrings; table
    j maps each occupied substring value to the ordinals holding it.
    """

    m: int
    tables: tuple[dict[int, np.ndarray], ...]
    table_keys: tuple[np.ndarray, ...]

    @property
    def bits_per_substring(self) -> int:
        return KEY_BITS // self.m


@dataclass(frozen=True)
class IndexSnapshot:
    """Immutable (key -> record) store; all query paths are read-only."""

    keys_lo: np.ndarray
    keys_hi: np.ndarray
    records: tuple[CodeRecord, ...]
    meta: BuildMeta
    mih: MihStructure | None = None

    def __len__(self) -> int:
        return len(self.records)

    def key_at(self, ordinal: int) -> int:
        return int(self.keys_lo[ordinal]) | (int(self.keys_hi[ordinal]) << 64)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def build(
    records: Iterable[tuple[str, CodeRecord]],
    with_mih: bool = False,
    mih_substrings: int = 4,
) -> IndexSnapshot:
    """Build a snapshot from (normalized code, record) pairs.

    Keys keep the input order. Codes must be unique and at least 7
    characters; distinct codes that collide after 20-character
    truncation keep the first record, and the collision is counted in
    the build metadata.
    """
    seen_codes: set[str] = set()
    key_to_ordinal: dict[int, int] = {}
    lo_words: list[int] = []
    hi_words: list[int] = []
    kept: list[CodeRecord] = []
    collisions = 0
    for code, record in records:
        if len(code) < MIN_CODE_LEN:
            raise ShortCodeError(f"code {code!r} is shorter than {MIN_CODE_LEN} characters")
        if len(code) > 255:
            raise SnapshotError(f"code {code!r} exceeds the 255-character snapshot limit")
        if code in seen_codes:
            raise DuplicateCodeError(f"duplicate code {code!r}")
        seen_codes.add(code)
        key = encode(code)
        if key in key_to_ordinal:
            collisions += 1
            continue
        key_to_ordinal[key] = len(kept)
        lo_words.append(key & _MASK64)
        hi_words.append(key >> 64)
        kept.append(record)

    keys_lo = _freeze(np.array(lo_words, dtype=np.uint64))
    keys_hi = _freeze(np.array(hi_words, dtype=np.uint64))
    meta = BuildMeta(
        record_count=len(kept),
        charset_hash=charset_hash(),
        collisions=collisions,
        built_at=time.time(),
    )
    mih = _build_mih(keys_lo, keys_hi, mih_substrings) if with_mih else None
    return IndexSnapshot(keys_lo, keys_hi, tuple(kept), meta, mih)


def _build_mih(keys_lo: np.ndarray, keys_hi: np.ndarray, m: int) -> MihStructure:
    if KEY_BITS % m != 0:
        raise ValueError(f"substring count must divide {KEY_BITS}")
    bits = KEY_BITS // m
    mask = (1 << bits) - 1
    buckets: list[dict[int, list[int]]] = [{} for _ in range(m)]
    for ordinal in range(len(keys_lo)):
        key = int(keys_lo[ordinal]) | (int(keys_hi[ordinal]) << 64)
        for j in range(m):
            sub = (key >> (bits * j)) & mask
            buckets[j].setdefault(sub, []).append(ordinal)
    tables = tuple(
        {sub: np.array(ordinals, dtype=np.int64) for sub, ordinals in table.items()}
        for table in buckets
    )
    table_keys = tuple(
        _freeze(np.fromiter(table.keys(), dtype=np.uint64, count=len(table)))
        for table in tables
    )
    return MihStructure(m=m, tables=tables, table_keys=table_keys)


def _distances(snapshot: IndexSnapshot, query: int) -> np.ndarray:
    if not 0 <= query < (1 << KEY_BITS):
        raise ValueError(f"query key must be a non-negative {KEY_BITS}-bit value")
    qlo = np.uint64(query & _MASK64)
    qhi = np.uint64(query >> 64)
    return np.bitwise_count(snapshot.keys_lo ^ qlo) + np.bitwise_count(snapshot.keys_hi ^ qhi)


def knn(snapshot: IndexSnapshot, query: int, k: int) -> list[Neighbor]:
    """Exact top-k under Hamming distance via a linear scan.

    Returns min(k, record_count) neighbors in ascending distance order;
    equal distances are ordered by ascending ordinal.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(snapshot)
    if n == 0:
        return []
    dists = _distances(snapshot, query)
    if k >= n:
        order = np.argsort(dists, kind="stable")
        return [Neighbor(int(i), int(dists[i])) for i in order]
    kth = np.partition(dists, k - 1)[k - 1]
    cand = np.flatnonzero(dists <= kth)
    order = np.argsort(dists[cand], kind="stable")
    top = cand[order[:k]]
    return [Neighbor(int(i), int(dists[i])) for i in top]


def radius(snapshot: IndexSnapshot, query: int, r: int) -> list[Neighbor]:
    """All neighbors within Hamming distance r, in ordinal order."""
    if not 0 <= r <= KEY_BITS:
        raise ValueError(f"radius must be in [0, {KEY_BITS}]")
    if len(snapshot) == 0:
        return []
    dists = _distances(snapshot, query)
    hits = np.flatnonzero(dists <= r)
    return [Neighbor(int(i), int(dists[i])) for i in hits]


def _ball_size(bits: int, r: int) -> int:
    return sum(math.comb(bits, i) for i in range(r + 1))


def _enumerate_ball(center: int, bits: int, r: int) -> Iterable[int]:
    for flips in range(r + 1):
        for positions in itertools.combinations(range(bits), flips):
            value = center
            for p in positions:
                value ^= 1 << p
            yield value


def mih_radius(snapshot: IndexSnapshot, query: int, r: int) -> list[Neighbor]:
    """Radius query through the MIH structure; equals radius() exactly.

    Pigeonhole bound: a key within distance r of the query is within
    floor(r/m) of it on at least one of the m substrings. Each table is
    probed for substring values inside that smaller ball, either by
    enumerating the ball or, when the ball outgrows the table, by
    scanning the occupied substring values; candidates are then verified
    against the full distance.
    """
    if snapshot.mih is None:
        raise MihMissingError("snapshot was built without the MIH structure")
    if not 0 <= r <= KEY_BITS:
        raise ValueError(f"radius must be in [0, {KEY_BITS}]")
    if not 0 <= query < (1 << KEY_BITS):
        raise ValueError(f"query key must be a non-negative {KEY_BITS}-bit value")
    mih = snapshot.mih
    bits = mih.bits_per_substring
    mask = (1 << bits) - 1
    sub_r = r // mih.m

    candidate_lists: list[np.ndarray] = []
    for j in range(mih.m):
        sub_query = (query >> (bits * j)) & mask
        table = mih.tables[j]
        occupied = mih.table_keys[j]
        if _ball_size(bits, sub_r) <= len(occupied):
            for value in _enumerate_ball(sub_query, bits, sub_r):
                posting = table.get(value)
                if posting is not None:
                    candidate_lists.append(posting)
        else:
            near = np.bitwise_count(occupied ^ np.uint64(sub_query)) <= sub_r
            for value in occupied[near]:
                candidate_lists.append(table[int(value)])

    if not candidate_lists:
        return []
    cands = np.unique(np.concatenate(candidate_lists))
    qlo = np.uint64(query & _MASK64)
    qhi = np.uint64(query >> 64)
    dists = np.bitwise_count(snapshot.keys_lo[cands] ^ qlo) + np.bitwise_count(
        snapshot.keys_hi[cands] ^ qhi
    )
    keep = dists <= r
    return [Neighbor(int(i), int(d)) for i, d in zip(cands[keep], dists[keep])]


def dumps(snapshot: IndexSnapshot) -> bytes:
    """Serialize to the snapshot wire format."""
    flags = FLAG_MIH if snapshot.mih is not None else 0
    parts = [
        _HEADER.pack(MAGIC, FORMAT_VERSION, flags, len(snapshot), snapshot.meta.charset_hash)
    ]
    if len(snapshot):
        interleaved = np.column_stack((snapshot.keys_lo, snapshot.keys_hi)).astype("<u8")
        parts.append(interleaved.tobytes())
    for record in snapshot.records:
        code = record.canonical_code.encode("ascii")
        item = record.item_id.encode("utf-8")
        parts.append(struct.pack("<B", len(code)) + code)
        parts.append(struct.pack("<H", len(item)) + item)
        parts.append(struct.pack("<B", len(record.queries)))
        for q in record.queries:
            text = q.text.encode("utf-8")
            parts.append(struct.pack("<H", len(text)) + text)
            parts.append(struct.pack("<Q", q.engagement))
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CorruptSnapshotError("record section ends prematurely")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


def loads(data: bytes) -> IndexSnapshot:
    """Parse a snapshot byte stream; the CRC is checked first."""
    if len(data) < _HEADER.size + 4:
        raise CorruptSnapshotError("stream shorter than the fixed header")
    (stored_crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(data[:-4]) != stored_crc:
        raise CorruptSnapshotError("CRC mismatch")
    magic, version, flags, count, table_hash = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CorruptSnapshotError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CorruptSnapshotError(f"unsupported format version {version}")
    if table_hash != charset_hash():
        raise CharsetMismatchError(
            "snapshot was built with a different symbol table "
            f"(file {table_hash:#018x}, runtime {charset_hash():#018x})"
        )

    reader = _Reader(data[: -4])
    reader.pos = _HEADER.size
    key_bytes = reader.take(count * 16)
    if count:
        interleaved = np.frombuffer(key_bytes, dtype="<u8").reshape(count, 2)
        keys_lo = _freeze(interleaved[:, 0].astype(np.uint64))
        keys_hi = _freeze(interleaved[:, 1].astype(np.uint64))
    else:
        keys_lo = _freeze(np.array([], dtype=np.uint64))
        keys_hi = _freeze(np.array([], dtype=np.uint64))

    records = []
    try:
        for _ in range(count):
            code = reader.take(reader.u8()).decode("ascii")
            item_id = reader.take(reader.u16()).decode("utf-8")
            queries = []
            for _ in range(reader.u8()):
                text = reader.take(reader.u16()).decode("utf-8")
                queries.append(AssociatedQuery(text, reader.u64()))
            records.append(CodeRecord(code, item_id, tuple(queries)))
    except (UnicodeDecodeError, ValueError) as exc:
        raise CorruptSnapshotError(f"invalid record section: {exc}") from exc
    if reader.pos != len(reader.data):
        raise CorruptSnapshotError("trailing bytes after the record section")

    meta = BuildMeta(record_count=count, charset_hash=table_hash)
    mih = _build_mih(keys_lo, keys_hi, 4) if flags & FLAG_MIH else None
    return IndexSnapshot(keys_lo, keys_hi, tuple(records), meta, mih)


def save(snapshot: IndexSnapshot, path: str | Path) -> None:
    Path(path).write_bytes(dumps(snapshot))


def load(path: str | Path) -> IndexSnapshot:
    return loads(Path(path).read_bytes())
