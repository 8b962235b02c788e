"""Related-query aggregation over the surviving candidates.

Every query attached to a surviving candidate's record becomes a
suggestion candidate. Suggestions are scored by a weighted blend of
code proximity (edit distance, normalized by code length) and
engagement (log-scaled against the largest count in the batch),
deduplicated case-insensitively, and capped at the configured count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .codec import EmptyCodeError, normalize
from .rerank import RankedCandidate


@dataclass(frozen=True)
class ScoreConfig:
    """Blend weights; both terms live in [0, 1] and the weights sum to 1.

    Proximity dominates by default: a near-identical code with a rarely
    clicked query should outrank a distant code with a popular one.
    """

    w_proximity: float = 0.6
    w_frequency: float = 0.4
    max_suggestions: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.w_proximity <= 1.0 or not 0.0 <= self.w_frequency <= 1.0:
            raise ValueError("weights must be in [0, 1]")
        if abs(self.w_proximity + self.w_frequency - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if self.max_suggestions < 1:
            raise ValueError("max_suggestions must be >= 1")


@dataclass(frozen=True)
class Suggestion:
    query_text: str
    score: float
    source_code: str
    hamming: int
    edit: int
    engagement: int


def proximity(query_code: str, candidate: RankedCandidate) -> float:
    """1 minus the edit distance as a fraction of the longer code."""
    longest = max(len(query_code), len(candidate.record.canonical_code))
    return 1.0 - candidate.edit_distance / longest


def freq_norm(engagement: int, max_engagement_in_batch: int) -> float:
    """Log-scaled engagement relative to the batch maximum; 0 when the batch is empty."""
    if max_engagement_in_batch == 0:
        return 0.0
    return math.log1p(engagement) / math.log1p(max_engagement_in_batch)


def aggregate(
    query_code: str,
    candidates: Sequence[RankedCandidate],
    cfg: ScoreConfig = ScoreConfig(),
) -> list[Suggestion]:
    """Pool, score, dedupe, and rank the candidates' associated queries.

    Suggestions whose normalized text equals the query code are dropped
    (repeating the user's own input adds nothing). Case-folded duplicate
    texts keep the best-scoring instance; the final order is score
    descending with ties broken by text. Engagement normalization is
    batch-local: the maximum is taken over the pooled suggestions of
    this call, so scores stay comparable within one response.
    """
    pool: list[tuple[str, int, RankedCandidate]] = []
    for candidate in candidates:
        for q in candidate.record.queries:
            try:
                if normalize(q.text) == query_code:
                    continue
            except EmptyCodeError:
                pass
            pool.append((q.text, q.engagement, candidate))
    if not pool:
        return []

    max_engagement = max(engagement for _, engagement, _ in pool)
    scored = []
    for text, engagement, candidate in pool:
        score = cfg.w_proximity * proximity(query_code, candidate) + cfg.w_frequency * freq_norm(
            engagement, max_engagement
        )
        scored.append(
            Suggestion(
                query_text=text,
                score=score,
                source_code=candidate.record.canonical_code,
                hamming=candidate.neighbor.distance,
                edit=candidate.edit_distance,
                engagement=engagement,
            )
        )

    # Dedupe on case-folded text; the winner is chosen by content alone
    # so permuting the candidate list cannot change the outcome.
    best: dict[str, Suggestion] = {}
    for s in scored:
        key = s.query_text.casefold()
        cur = best.get(key)
        if cur is None or _rank_key(s) < _rank_key(cur):
            best[key] = s

    final = sorted(best.values(), key=lambda s: (-s.score, s.query_text))
    return final[: cfg.max_suggestions]


def _rank_key(s: Suggestion) -> tuple:
    return (-s.score, s.edit, s.hamming, s.source_code, s.query_text)
