"""Entry gate: decide whether a query looks like an identifier code.

Queries that pass enter the Hamming retrieval pipeline; queries that
fail are flagged for the caller's fallback retrieval stack. The rule is
token-based: pick the longest whitespace-delimited token made mostly of
charset characters, then require a minimum length and a mix of digits
and letters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .codec import CHAR_TO_VALUE, DIGITS, LETTERS


class GateReason(enum.Enum):
    ACCEPTED = "accepted"
    NO_TOKENS = "no-tokens"
    LOW_CHARSET_RATIO = "low-charset-ratio"
    TOO_SHORT = "too-short"
    NO_DIGIT = "no-digit"
    NO_LETTER = "no-letter"


@dataclass(frozen=True)
class GateConfig:
    """Thresholds for the identifier-query predicate.

    min_token_len is one below the 7-character index floor by default so
    a single-deletion typo of an indexable code still enters the
    pipeline; the edit-distance stage recovers the match.
    """

    min_token_len: int = 6
    require_digit: bool = True
    require_letter: bool = True
    min_charset_ratio: float = 0.9

    def __post_init__(self) -> None:
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")
        if not 0.0 <= self.min_charset_ratio <= 1.0:
            raise ValueError("min_charset_ratio must be in [0, 1]")


@dataclass(frozen=True)
class GateDecision:
    accepted: bool
    candidate_code: str | None
    reason: GateReason


def gate(query: str, cfg: GateConfig = GateConfig()) -> GateDecision:
    """Classify a raw query; deterministic for identical inputs.

    Tokenizes the uppercased query on whitespace and selects the longest
    token whose in-charset character fraction meets min_charset_ratio
    (leftmost wins a length tie). The selected token, stripped of
    out-of-charset characters, must reach min_token_len and satisfy the
    digit/letter requirements; it becomes the candidate code.
    """
    tokens = query.upper().split()
    if not tokens:
        return GateDecision(False, None, GateReason.NO_TOKENS)

    best = None
    best_len = -1
    for token in tokens:
        in_charset = sum(ch in CHAR_TO_VALUE for ch in token)
        if in_charset < cfg.min_charset_ratio * len(token):
            continue
        if len(token) > best_len:
            best = token
            best_len = len(token)
    if best is None:
        return GateDecision(False, None, GateReason.LOW_CHARSET_RATIO)

    candidate = "".join(ch for ch in best if ch in CHAR_TO_VALUE)
    if len(candidate) < cfg.min_token_len:
        return GateDecision(False, None, GateReason.TOO_SHORT)
    if cfg.require_digit and not any(ch in DIGITS for ch in candidate):
        return GateDecision(False, None, GateReason.NO_DIGIT)
    if cfg.require_letter and not any(ch in LETTERS for ch in candidate):
        return GateDecision(False, None, GateReason.NO_LETTER)
    return GateDecision(True, candidate, GateReason.ACCEPTED)
