"""Training-free retrieval and related-query suggestion for identifier codes.

Identifier strings (part numbers, SKUs, model codes) break conventional
lexical and embedding retrieval: they rarely repeat, tokenize
unpredictably, and a one-character typo loses the match. This package
packs each code into a fixed 120-bit key, retrieves nearest neighbors
by Hamming distance with an exact linear scan (optionally accelerated
by multi-index hashing), repairs insertions and deletions with a
Levenshtein filter, and surfaces the top related queries of the
surviving codes.
"""

from .codec import (
    BinaryCode,
    CodecError,
    EmptyCodeError,
    MalformedCodeError,
    decode,
    encode,
    hamming,
    normalize,
)
from .gate import GateConfig, GateDecision, GateReason, gate
from .index import (
    AssociatedQuery,
    CodeRecord,
    CorruptSnapshotError,
    CharsetMismatchError,
    IndexSnapshot,
    Neighbor,
    SnapshotError,
    build,
    knn,
    load,
    mih_radius,
    radius,
    save,
)
from .pipeline import PipelineConfig, SuggestResponse, load_config, run_suggest
from .rerank import RankedCandidate, RerankConfig, levenshtein, levenshtein_bounded
from .suggest import ScoreConfig, Suggestion, aggregate

__version__ = "0.1.0"

__all__ = [
    "AssociatedQuery",
    "BinaryCode",
    "CharsetMismatchError",
    "CodeRecord",
    "CodecError",
    "CorruptSnapshotError",
    "EmptyCodeError",
    "GateConfig",
    "GateDecision",
    "GateReason",
    "IndexSnapshot",
    "MalformedCodeError",
    "Neighbor",
    "PipelineConfig",
    "RankedCandidate",
    "RerankConfig",
    "ScoreConfig",
    "SnapshotError",
    "SuggestResponse",
    "Suggestion",
    "aggregate",
    "build",
    "decode",
    "encode",
    "gate",
    "hamming",
    "knn",
    "levenshtein",
    "levenshtein_bounded",
    "load",
    "load_config",
    "mih_radius",
    "normalize",
    "radius",
    "run_suggest",
    "save",
]
