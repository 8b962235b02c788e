"""Edit-distance refinement of Hamming candidates.

Hamming distance on the packed keys punishes insertions and deletions
hard (every slot after the edit shifts), so the candidate list is
re-checked with Levenshtein distance on the full canonical codes.
Candidates within the edit budget survive; everything else is dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from .index import CodeRecord, IndexSnapshot, Neighbor


@dataclass(frozen=True)
class RerankConfig:
    """Edit filter settings.

    top_n caps how many Hamming neighbors enter the filter. max_edit of
    2 covers one typo plus one formatting change without flooding the
    output. band_width widens the banded computation past max_edit when
    callers want exact distances in that range; None means max_edit.
    """

    top_n: int = 100
    max_edit: int = 2
    band_width: int | None = None

    def __post_init__(self) -> None:
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")
        if self.max_edit < 0:
            raise ValueError("max_edit must be >= 0")
        if self.band_width is not None and self.band_width < self.max_edit:
            raise ValueError("band_width must be >= max_edit")


@dataclass(frozen=True)
class RankedCandidate:
    neighbor: "Neighbor"
    edit_distance: int
    record: "CodeRecord"


def levenshtein(a: str, b: str) -> int:
    """Minimum insertions, deletions, and substitutions turning a into b."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(cur[j - 1] + 1, prev[j] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def levenshtein_bounded(a: str, b: str, bound: int) -> int | None:
    """Exact distance when it is <= bound, else None.

    Banded dynamic programming: only the diagonal band of width
    2*bound + 1 can hold values <= bound, and the whole band exceeding
    the bound ends the computation early.
    """
    if bound < 0:
        raise ValueError("bound must be >= 0")
    la, lb = len(a), len(b)
    if abs(la - lb) > bound:
        return None
    if la == 0:
        return lb
    if bound == 0:
        return 0 if a == b else None

    inf = bound + 1
    prev = [j if j <= bound else inf for j in range(lb + 1)]
    for i in range(1, la + 1):
        lo = max(1, i - bound)
        hi = min(lb, i + bound)
        cur = [inf] * (lb + 1)
        if i <= bound:
            cur[0] = i
        row_min = cur[0] if lo == 1 else inf
        for j in range(lo, hi + 1):
            best = min(cur[j - 1] + 1, prev[j] + 1, prev[j - 1] + (a[i - 1] != b[j - 1]))
            if best < inf:
                cur[j] = best
                if best < row_min:
                    row_min = best
        if row_min > bound:
            return None
        prev = cur
    return prev[lb] if prev[lb] <= bound else None


def filter(
    query_code: str,
    neighbors: Sequence["Neighbor"],
    snapshot: "IndexSnapshot",
    cfg: RerankConfig = RerankConfig(),
) -> list[RankedCandidate]:
    """Keep the Hamming candidates within the edit budget.

    Examines the first top_n neighbors (knn order: distance, then
    ordinal), compares the query code against each record's full
    canonical code, and returns survivors sorted by
    (edit distance, Hamming distance, ordinal).
    """
    bound = cfg.band_width if cfg.band_width is not None else cfg.max_edit
    survivors = []
    for neighbor in neighbors[: cfg.top_n]:
        record = snapshot.records[neighbor.ordinal]
        dist = levenshtein_bounded(query_code, record.canonical_code, bound)
        if dist is not None and dist <= cfg.max_edit:
            survivors.append(RankedCandidate(neighbor, dist, record))
    survivors.sort(key=lambda c: (c.edit_distance, c.neighbor.distance, c.neighbor.ordinal))
    return survivors
