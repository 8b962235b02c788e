import pytest
from hypothesis import given, strategies as st

from hammcode.codec import SYMBOLS
from hammcode.gate import GateConfig, GateReason, gate

queries = st.text(
    alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=40
)


def rule_walk(query: str, cfg: GateConfig):
    """Spell out the decision rule step by step, independently."""
    tokens = query.upper().split()
    eligible = []
    for pos, token in enumerate(tokens):
        inside = sum(1 for ch in token if ch in SYMBOLS)
        if inside >= cfg.min_charset_ratio * len(token):
            eligible.append((len(token), -pos, token))
    if not eligible:
        return None
    _, _, best = max(eligible)
    candidate = "".join(ch for ch in best if ch in SYMBOLS)
    if len(candidate) < cfg.min_token_len:
        return None
    if cfg.require_digit and not any(ch.isdigit() for ch in candidate):
        return None
    if cfg.require_letter and not any("A" <= ch <= "Z" for ch in candidate):
        return None
    return candidate


def test_plain_identifier_accepted():
    decision = gate("S3221QS")
    assert decision.accepted
    assert decision.candidate_code == "S3221QS"
    assert decision.reason is GateReason.ACCEPTED


def test_natural_language_rejected():
    decision = gate("dell monitor")
    assert not decision.accepted
    assert decision.candidate_code is None
    assert decision.reason is GateReason.NO_DIGIT


def test_mixed_query_extracts_code():
    decision = gate("wh-1000xm4 headphones")
    assert decision.accepted
    assert decision.candidate_code == "WH-1000XM4"


@pytest.mark.parametrize(
    "query, reason",
    [
        ("", GateReason.NO_TOKENS),
        ("   ", GateReason.NO_TOKENS),
        ("!!! ???", GateReason.LOW_CHARSET_RATIO),
        ("ab1", GateReason.TOO_SHORT),
        ("123456789", GateReason.NO_LETTER),
        ("abcdefgh", GateReason.NO_DIGIT),
    ],
)
def test_rejection_reasons(query, reason):
    decision = gate(query)
    assert not decision.accepted
    assert decision.reason is reason


def test_equal_length_tie_goes_left():
    # Both tokens are 10 charset characters; the left one is selected.
    decision = gate("headphones wh-1000xm4")
    assert not decision.accepted
    assert decision.reason is GateReason.NO_DIGIT


def test_charset_ratio_excludes_noisy_tokens():
    # "s3221qs!!!!" is 7/11 in-charset, below the 0.9 default, so the
    # shorter clean token wins.
    decision = gate("s3221qs!!!! ab12cd")
    assert decision.accepted
    assert decision.candidate_code == "AB12CD"


@given(queries)
def test_agrees_with_rule_walk(query):
    cfg = GateConfig()
    decision = gate(query, cfg)
    expected = rule_walk(query, cfg)
    if expected is None:
        assert not decision.accepted
    else:
        assert decision.accepted
        assert decision.candidate_code == expected


@given(queries)
def test_idempotent_on_accepted_candidate(query):
    decision = gate(query)
    if decision.accepted:
        again = gate(decision.candidate_code)
        assert again.accepted
        assert again.candidate_code == decision.candidate_code


@given(queries, st.integers(1, 12), st.integers(0, 8))
def test_monotone_in_min_token_len(query, base_len, bump):
    lo = gate(query, GateConfig(min_token_len=base_len))
    hi = gate(query, GateConfig(min_token_len=base_len + bump))
    if hi.accepted:
        assert lo.accepted


@given(queries)
def test_deterministic(query):
    assert gate(query) == gate(query)


def test_config_validation():
    with pytest.raises(ValueError):
        GateConfig(min_token_len=0)
    with pytest.raises(ValueError):
        GateConfig(min_charset_ratio=1.5)
