"""Offline evaluation: synthetic catalogs, perturbed queries, recall.

Online traffic experiments are not reproducible at a desk, so this
harness measures the mechanical analog: generate a catalog, perturb
known codes the way users mistype them (typos, dropped characters,
stripped punctuation), run each perturbed query through the public
pipeline, and score how often the true source code is recovered.

A retrieval hit means the true code appears among the edit-filtered
survivors; recall@1 requires it to be ranked first. Coverage counts the
gated queries that produced at least one suggestion. Everything is
seeded and deterministic.
"""

from __future__ import annotations

import dataclasses
import random
import time
from dataclasses import dataclass

from .codec import DIGITS, LETTERS, PUNCTUATION, SYMBOLS
from .index import AssociatedQuery, CodeRecord, IndexSnapshot
from .pipeline import PipelineConfig, run_suggest

PERTURBATION_KINDS = ("substitute", "insert", "delete", "transpose", "strip_punctuation")

_QUERY_TEMPLATES = (
    "{code} monitor",
    "{code} replacement",
    "buy {code}",
)
_MAX_PERTURBATION_COUNT = 3
MIN_PERTURBABLE_LEN = 7


class InapplicablePerturbationError(ValueError):
    """The requested edit cannot be applied to this code."""


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str
    count: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if not 1 <= self.count <= _MAX_PERTURBATION_COUNT:
            raise ValueError(f"count must be in [1, {_MAX_PERTURBATION_COUNT}]")


@dataclass(frozen=True)
class FamilyStructure:
    """Grouped code generation: members share all but a few positions.

    Each group picks one base code and a fixed set of 1-3 positions;
    variants differ from the base only at those positions, mirroring how
    product families vary a size or feature digit.
    """

    group_size: int = 4
    varied_positions: int = 2

    def __post_init__(self) -> None:
        if self.group_size < 2:
            raise ValueError("group_size must be >= 2")
        if not 1 <= self.varied_positions <= 3:
            raise ValueError("varied_positions must be in [1, 3]")


@dataclass(frozen=True)
class EvalRow:
    kind: str
    count: int
    queries: int
    skipped: int
    gated: int
    recall_at_1: float
    recall_at_k: float
    mrr: float
    coverage: float
    mean_latency_us: float
    catalog_size: int
    k: int
    max_edit: int


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]

    def to_dict(self) -> dict:
        return {"rows": [dataclasses.asdict(row) for row in self.rows]}


def _random_code(rng: random.Random, min_len: int, max_len: int, punct_rate: float) -> str:
    """Identifier-shaped code: at least two letters and two digits."""
    n = rng.randint(min_len, max_len)
    chars = [rng.choice(LETTERS), rng.choice(LETTERS), rng.choice(DIGITS), rng.choice(DIGITS)]
    pool = LETTERS + DIGITS
    for _ in range(n - 4):
        if rng.random() < punct_rate:
            chars.append(rng.choice(PUNCTUATION))
        else:
            chars.append(rng.choice(pool))
    rng.shuffle(chars)
    return "".join(chars)


def _synthetic_queries(rng: random.Random, code: str) -> tuple[AssociatedQuery, ...]:
    n = rng.choices((0, 1, 2, 3), weights=(15, 35, 30, 20))[0]
    queries = []
    for template in rng.sample(_QUERY_TEMPLATES, n):
        # Pareto tail exercises the log normalization across magnitudes.
        engagement = int(rng.paretovariate(1.16) * 3)
        queries.append(AssociatedQuery(template.format(code=code.lower()), engagement))
    return tuple(queries)


def gen_catalog(
    n: int,
    length_range: tuple[int, int] = (8, 14),
    family_structure: FamilyStructure | None = None,
    seed: int = 0,
    punct_rate: float = 0.08,
) -> list[tuple[str, CodeRecord]]:
    """Deterministic synthetic catalog of n unique codes with queries.

    Plain mode draws independent codes. Family mode emits groups whose
    members share all but 1-3 character positions, so nearest neighbors
    in key space reproduce the clustered structure of real part-number
    families.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    min_len, max_len = length_range
    if min_len < 7 or max_len > 20 or min_len > max_len:
        raise ValueError("length_range must lie within [7, 20]")
    rng = random.Random(seed)
    codes: list[str] = []
    seen: set[str] = set()

    def admit(code: str) -> bool:
        if code in seen:
            return False
        seen.add(code)
        codes.append(code)
        return True

    if family_structure is None:
        while len(codes) < n:
            admit(_random_code(rng, min_len, max_len, punct_rate))
    else:
        fam = family_structure
        while len(codes) < n:
            base = _random_code(rng, min_len, max_len, punct_rate)
            if not admit(base):
                continue
            positions = rng.sample(range(len(base)), rng.randint(1, fam.varied_positions))
            members = 1
            attempts = 0
            while members < fam.group_size and len(codes) < n and attempts < 20:
                attempts += 1
                variant = list(base)
                for p in positions:
                    variant[p] = rng.choice(SYMBOLS.replace(base[p], ""))
                if admit("".join(variant)):
                    members += 1

    out = []
    for i, code in enumerate(codes):
        record = CodeRecord(code, f"item-{i:07d}", _synthetic_queries(rng, code))
        out.append((code, record))
    return out


def perturb(code: str, spec: PerturbationSpec) -> str:
    """Apply seeded random edits of one kind to a code.

    substitute/insert/delete/transpose apply ``count`` single-character
    edits at seeded positions; strip_punctuation removes every
    punctuation mark in one pass regardless of count. Raises
    InapplicablePerturbationError when the code offers no valid edit
    site (no punctuation to strip, or no unequal adjacent pair to
    transpose).
    """
    if len(code) < MIN_PERTURBABLE_LEN:
        raise ValueError(f"code must have at least {MIN_PERTURBABLE_LEN} characters")
    rng = random.Random(spec.seed)
    chars = list(code)
    if spec.kind == "strip_punctuation":
        stripped = [ch for ch in chars if ch not in PUNCTUATION]
        if len(stripped) == len(chars):
            raise InapplicablePerturbationError(f"{code!r} has no punctuation to strip")
        return "".join(stripped)
    for _ in range(spec.count):
        if spec.kind == "substitute":
            p = rng.randrange(len(chars))
            chars[p] = rng.choice(SYMBOLS.replace(chars[p], ""))
        elif spec.kind == "insert":
            p = rng.randrange(len(chars) + 1)
            chars.insert(p, rng.choice(SYMBOLS))
        elif spec.kind == "delete":
            del chars[rng.randrange(len(chars))]
        elif spec.kind == "transpose":
            sites = [i for i in range(len(chars) - 1) if chars[i] != chars[i + 1]]
            if not sites:
                raise InapplicablePerturbationError(f"{code!r} has no transposable pair")
            p = rng.choice(sites)
            chars[p], chars[p + 1] = chars[p + 1], chars[p]
    return "".join(chars)


def run_eval(
    snapshot: IndexSnapshot,
    specs: list[PerturbationSpec],
    queries_per_spec: int,
    cfg: PipelineConfig,
) -> EvalReport:
    """Score the pipeline on perturbed queries drawn from the snapshot.

    Uses the public run_suggest path, so every number reflects served
    behavior including the gate: a perturbed query the gate rejects is a
    retrieval miss. Deterministic for fixed spec seeds.
    """
    if len(snapshot) == 0:
        raise ValueError("cannot evaluate an empty snapshot")
    rows = []
    for spec in specs:
        rng = random.Random(spec.seed)
        picks = rng.choices(range(len(snapshot)), k=queries_per_spec)
        hits_at_1 = 0
        hits_at_k = 0
        mrr_sum = 0.0
        gated = 0
        covered = 0
        skipped = 0
        latency_ns = 0
        for ordinal in picks:
            true_code = snapshot.records[ordinal].canonical_code
            sample_seed = rng.getrandbits(63)
            try:
                query = perturb(true_code, dataclasses.replace(spec, seed=sample_seed))
            except InapplicablePerturbationError:
                skipped += 1
                continue
            t0 = time.perf_counter_ns()
            response = run_suggest(query, cfg, snapshot)
            latency_ns += time.perf_counter_ns() - t0
            if not response.gated:
                continue
            gated += 1
            if response.suggestions:
                covered += 1
            for rank, candidate in enumerate(response.candidates, 1):
                if candidate.record.canonical_code == true_code:
                    hits_at_k += 1
                    mrr_sum += 1.0 / rank
                    if rank == 1:
                        hits_at_1 += 1
                    break
        scored = queries_per_spec - skipped
        rows.append(
            EvalRow(
                kind=spec.kind,
                count=spec.count,
                queries=scored,
                skipped=skipped,
                gated=gated,
                recall_at_1=hits_at_1 / scored if scored else 0.0,
                recall_at_k=hits_at_k / scored if scored else 0.0,
                mrr=mrr_sum / scored if scored else 0.0,
                coverage=covered / gated if gated else 0.0,
                mean_latency_us=latency_ns / scored / 1000 if scored else 0.0,
                catalog_size=len(snapshot),
                k=cfg.k,
                max_edit=cfg.rerank.max_edit,
            )
        )
    return EvalReport(rows=tuple(rows))


def render_table(report: EvalReport) -> str:
    """Fixed-width table for terminal output."""
    header = (
        f"{'kind':<18}{'count':>6}{'queries':>9}{'gated':>7}{'recall@1':>10}"
        f"{'recall@k':>10}{'mrr':>8}{'coverage':>10}{'mean_us':>10}"
    )
    lines = [header, "-" * len(header)]
    for row in report.rows:
        lines.append(
            f"{row.kind:<18}{row.count:>6}{row.queries:>9}{row.gated:>7}"
            f"{row.recall_at_1:>10.3f}{row.recall_at_k:>10.3f}{row.mrr:>8.3f}"
            f"{row.coverage:>10.3f}{row.mean_latency_us:>10.1f}"
        )
    return "\n".join(lines)
