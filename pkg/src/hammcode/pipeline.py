"""Online suggestion pipeline: gate, encode, retrieve, filter, aggregate.

This is the composition root for a single query. Every stage is a pure
function over an immutable snapshot, so the pipeline itself is pure and
safe under arbitrary concurrency; per-stage wall times are reported in
the response for latency accounting.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import codec, index, rerank, suggest
from .gate import GateConfig, gate
from .rerank import RankedCandidate, RerankConfig
from .suggest import ScoreConfig, Suggestion

CONFIG_ENV_VAR = "HAMMCODE_CONFIG"


@dataclass(frozen=True)
class PipelineConfig:
    """All online-path knobs plus the snapshot location.

    k may exceed rerank.top_n or vice versa; the filter always examines
    min(k, top_n) candidates. Defaults retrieve 50 and filter up to 100,
    so nothing retrieved is ever wasted.
    """

    gate: GateConfig = field(default_factory=GateConfig)
    k: int = 50
    rerank: RerankConfig = field(default_factory=RerankConfig)
    score: ScoreConfig = field(default_factory=ScoreConfig)
    snapshot_path: str | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class StageTimings:
    """Microseconds spent per stage; total is measured around the whole call."""

    gate: int = 0
    encode: int = 0
    knn: int = 0
    filter: int = 0
    aggregate: int = 0
    total: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "gate": self.gate,
            "encode": self.encode,
            "knn": self.knn,
            "filter": self.filter,
            "aggregate": self.aggregate,
        }


@dataclass(frozen=True)
class SuggestResponse:
    """Outcome of one query.

    fallback mirrors the gate: when true the caller should route the
    query to its regular retrieval stack. candidates carries the
    edit-filtered neighbors so offline evaluation can check retrieval
    hits through this same public path.
    """

    gated: bool
    fallback: bool
    suggestions: list[Suggestion]
    timings: StageTimings
    candidate_code: str | None = None
    candidates: list[RankedCandidate] = field(default_factory=list)


def run_suggest(
    query: str, cfg: PipelineConfig, snapshot: index.IndexSnapshot
) -> SuggestResponse:
    """Run the full online path for one query against one snapshot."""
    t_start = time.perf_counter_ns()

    t0 = time.perf_counter_ns()
    decision = gate(query, cfg.gate)
    t_gate = time.perf_counter_ns() - t0
    if not decision.accepted:
        total = time.perf_counter_ns() - t_start
        return SuggestResponse(
            gated=False,
            fallback=True,
            suggestions=[],
            timings=StageTimings(gate=t_gate // 1000, total=total // 1000),
        )
    code = decision.candidate_code

    t0 = time.perf_counter_ns()
    key = codec.encode(code)
    t_encode = time.perf_counter_ns() - t0

    t0 = time.perf_counter_ns()
    neighbors = index.knn(snapshot, key, cfg.k)
    t_knn = time.perf_counter_ns() - t0

    t0 = time.perf_counter_ns()
    survivors = rerank.filter(code, neighbors, snapshot, cfg.rerank)
    t_filter = time.perf_counter_ns() - t0

    t0 = time.perf_counter_ns()
    suggestions = suggest.aggregate(code, survivors, cfg.score)
    t_aggregate = time.perf_counter_ns() - t0

    total = time.perf_counter_ns() - t_start
    return SuggestResponse(
        gated=True,
        fallback=False,
        suggestions=suggestions,
        timings=StageTimings(
            gate=t_gate // 1000,
            encode=t_encode // 1000,
            knn=t_knn // 1000,
            filter=t_filter // 1000,
            aggregate=t_aggregate // 1000,
            total=total // 1000,
        ),
        candidate_code=code,
        candidates=survivors,
    )


def response_payload(response: SuggestResponse, with_timings: bool = True) -> dict:
    """JSON-ready view of a response, matching the HTTP schema."""
    payload = {
        "gated": response.gated,
        "fallback": response.fallback,
        "suggestions": [
            {
                "query": s.query_text,
                "score": s.score,
                "source_code": s.source_code,
                "hamming": s.hamming,
                "edit": s.edit,
                "engagement": s.engagement,
            }
            for s in response.suggestions
        ],
    }
    if with_timings:
        payload["timings_us"] = response.timings.as_dict()
    return payload


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Build a PipelineConfig from a JSON file.

    Resolution order: explicit path, then the HAMMCODE_CONFIG
    environment variable, then library defaults. Missing sections and
    fields fall back to their defaults.
    """
    if path is None:
        env = os.environ.get(CONFIG_ENV_VAR)
        if env:
            path = env
    if path is None:
        return PipelineConfig()
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> PipelineConfig:
    base = PipelineConfig()
    gate_cfg = replace(GateConfig(), **raw.get("gate", {}))
    rerank_cfg = replace(RerankConfig(), **raw.get("rerank", {}))
    score_cfg = replace(ScoreConfig(), **raw.get("score", {}))
    return PipelineConfig(
        gate=gate_cfg,
        k=raw.get("k", base.k),
        rerank=rerank_cfg,
        score=score_cfg,
        snapshot_path=raw.get("snapshot_path"),
    )
