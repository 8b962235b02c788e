"""Command-line interface: build, query, serve, eval, bench, inspect."""

from __future__ import annotations

import dataclasses
import json
import statistics
import sys
import time
from pathlib import Path

import click

from . import evaluation, index, ingest
from .codec import encode
from .pipeline import PipelineConfig, load_config, response_payload, run_suggest
from .service import serve as run_service


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load_snapshot(path: str) -> index.IndexSnapshot:
    try:
        return index.load(path)
    except (OSError, index.SnapshotError) as exc:
        _fail(str(exc))


def pipeline_options(fn):
    """Flags shared by the query-serving commands; they override the config file."""
    options = [
        click.option("--config", "config_path", type=click.Path(), default=None,
                     help="JSON pipeline configuration file."),
        click.option("--k", type=int, default=None, help="Neighbors to retrieve."),
        click.option("--top-n", type=int, default=None, help="Candidates entering the edit filter."),
        click.option("--max-edit", type=int, default=None, help="Edit-distance budget."),
        click.option("--min-token-len", type=int, default=None, help="Gate length floor."),
        click.option("--max-suggestions", type=int, default=None, help="Suggestion cap."),
        click.option("--w-proximity", type=float, default=None, help="Proximity weight."),
        click.option("--w-frequency", type=float, default=None, help="Engagement weight."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _resolve_config(config_path, k, top_n, max_edit, min_token_len,
                    max_suggestions, w_proximity, w_frequency) -> PipelineConfig:
    try:
        cfg = load_config(config_path)
    except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        _fail(f"cannot load config: {exc}")
    if k is not None:
        cfg = dataclasses.replace(cfg, k=k)
    rerank_cfg = cfg.rerank
    if top_n is not None:
        rerank_cfg = dataclasses.replace(rerank_cfg, top_n=top_n)
    if max_edit is not None:
        rerank_cfg = dataclasses.replace(rerank_cfg, max_edit=max_edit)
    gate_cfg = cfg.gate
    if min_token_len is not None:
        gate_cfg = dataclasses.replace(gate_cfg, min_token_len=min_token_len)
    score_cfg = cfg.score
    if max_suggestions is not None:
        score_cfg = dataclasses.replace(score_cfg, max_suggestions=max_suggestions)
    if w_proximity is not None:
        score_cfg = dataclasses.replace(score_cfg, w_proximity=w_proximity)
    if w_frequency is not None:
        score_cfg = dataclasses.replace(score_cfg, w_frequency=w_frequency)
    return dataclasses.replace(cfg, gate=gate_cfg, rerank=rerank_cfg, score=score_cfg)


@click.group()
def main() -> None:
    """Hamming-space retrieval and suggestions for identifier queries."""


@main.command()
@click.option("--catalog", required=True, type=click.Path(), help="catalog.tsv export.")
@click.option("--query-log", required=True, type=click.Path(), help="query_log.tsv export.")
@click.option("--out", required=True, type=click.Path(), help="Snapshot file to write.")
@click.option("--mih/--no-mih", default=False, help="Flag the snapshot for MIH rebuild on load.")
def build(catalog: str, query_log: str, out: str, mih: bool) -> None:
    """Build an index snapshot from catalog and query-log exports."""
    stats = ingest.IngestStats()
    try:
        corpus = ingest.build_corpus(catalog, query_log, stats)
        snapshot = index.build(corpus, with_mih=mih)
        index.save(snapshot, out)
    except (OSError, ingest.IngestError, index.SnapshotError) as exc:
        _fail(str(exc))
    click.echo(f"records indexed:      {len(snapshot)}")
    click.echo(f"truncation collisions: {snapshot.meta.collisions}")
    click.echo(f"catalog rows:         {stats.catalog_rows}")
    click.echo(f"query rows:           {stats.query_rows}")
    click.echo(f"malformed lines:      {stats.malformed_lines}")
    click.echo(f"unnormalizable codes: {stats.unnormalizable_codes}")
    click.echo(f"short codes dropped:  {stats.short_codes}")
    click.echo(f"orphan query rows:    {stats.orphan_queries}")
    click.echo(f"snapshot:             {out}")


@main.command()
@click.argument("text")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@click.option("--timings", "with_timings", is_flag=True,
              help="Include per-stage timings (non-deterministic output).")
@pipeline_options
def query(text: str, snapshot_path: str, as_json: bool, with_timings: bool, **cfg_flags) -> None:
    """Run one query against a snapshot and print the suggestions."""
    cfg = _resolve_config(**cfg_flags)
    snapshot = _load_snapshot(snapshot_path)
    response = run_suggest(text, cfg, snapshot)
    if as_json:
        payload = response_payload(response, with_timings=with_timings)
        click.echo(json.dumps(payload, sort_keys=True, separators=(",", ":")))
        return
    if response.fallback:
        click.echo("fallback: query is not an identifier; route to the baseline stack")
        return
    click.echo(f"candidate code: {response.candidate_code}")
    if not response.suggestions:
        click.echo("no suggestions")
    for s in response.suggestions:
        click.echo(
            f"  {s.score:6.3f}  {s.query_text}  "
            f"[code {s.source_code}, hamming {s.hamming}, edit {s.edit}, engagement {s.engagement}]"
        )
    if with_timings:
        t = response.timings
        click.echo(
            f"timings_us: gate={t.gate} encode={t.encode} knn={t.knn} "
            f"filter={t.filter} aggregate={t.aggregate} total={t.total}"
        )


@main.command()
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
@pipeline_options
def serve(snapshot_path: str, host: str, port: int, **cfg_flags) -> None:
    """Serve the suggestion API over HTTP."""
    cfg = _resolve_config(**cfg_flags)
    cfg = dataclasses.replace(cfg, snapshot_path=snapshot_path)
    try:
        run_service(cfg, host=host, port=port)
    except (OSError, index.SnapshotError) as exc:
        _fail(str(exc))


@main.command(name="eval")
@click.option("--snapshot", "snapshot_path", type=click.Path(), default=None,
              help="Evaluate an existing snapshot instead of a synthetic catalog.")
@click.option("--catalog-size", default=10000, show_default=True, type=int)
@click.option("--family/--no-family", default=False, help="Generate family-structured codes.")
@click.option("--kinds", default="substitute,insert,delete,transpose,strip_punctuation",
              show_default=True, help="Comma-separated perturbation kinds.")
@click.option("--count", default=1, show_default=True, type=int, help="Edits per query.")
@click.option("--queries", default=500, show_default=True, type=int, help="Queries per kind.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the report as JSON.")
@pipeline_options
def eval_command(snapshot_path, catalog_size, family, kinds, count, queries, seed,
                 out_path, **cfg_flags) -> None:
    """Measure recall and coverage under seeded query perturbations."""
    cfg = _resolve_config(**cfg_flags)
    if snapshot_path is not None:
        snapshot = _load_snapshot(snapshot_path)
    else:
        family_structure = evaluation.FamilyStructure() if family else None
        records = evaluation.gen_catalog(catalog_size, family_structure=family_structure,
                                         seed=seed)
        snapshot = index.build(records)
    try:
        specs = [
            evaluation.PerturbationSpec(kind.strip(), count=count, seed=seed + i)
            for i, kind in enumerate(kinds.split(","))
        ]
    except ValueError as exc:
        _fail(str(exc))
    report = evaluation.run_eval(snapshot, specs, queries, cfg)
    click.echo(evaluation.render_table(report))
    if out_path:
        Path(out_path).write_text(json.dumps(report.to_dict(), indent=2) + "\n",
                                  encoding="utf-8")
        click.echo(f"report written to {out_path}")


@main.command()
@click.option("--snapshot", "snapshot_path", type=click.Path(), default=None,
              help="Benchmark an existing snapshot; default generates one.")
@click.option("--catalog-size", default=100000, show_default=True, type=int)
@click.option("--queries", default=200, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@pipeline_options
def bench(snapshot_path, catalog_size, queries, seed, **cfg_flags) -> None:
    """Measure retrieval and end-to-end latency."""
    cfg = _resolve_config(**cfg_flags)
    if snapshot_path is not None:
        snapshot = _load_snapshot(snapshot_path)
    else:
        click.echo(f"generating {catalog_size} synthetic records...")
        snapshot = index.build(evaluation.gen_catalog(catalog_size, seed=seed))
    if len(snapshot) == 0:
        _fail("snapshot is empty")

    probe_codes = [snapshot.records[i % len(snapshot)].canonical_code for i in range(queries)]

    knn_times = []
    for code in probe_codes:
        key = encode(code)
        t0 = time.perf_counter()
        index.knn(snapshot, key, cfg.k)
        knn_times.append((time.perf_counter() - t0) * 1000)

    e2e_times = []
    for code in probe_codes:
        t0 = time.perf_counter()
        run_suggest(code, cfg, snapshot)
        e2e_times.append((time.perf_counter() - t0) * 1000)

    def summary(label: str, times: list[float]) -> None:
        times = sorted(times)
        p50 = statistics.median(times)
        p99 = times[min(len(times) - 1, int(len(times) * 0.99))]
        click.echo(
            f"{label}: mean {statistics.fmean(times):.2f} ms, "
            f"p50 {p50:.2f} ms, p99 {p99:.2f} ms, max {times[-1]:.2f} ms"
        )

    click.echo(f"records: {len(snapshot)}, k: {cfg.k}, queries: {queries}")
    summary("knn scan   ", knn_times)
    summary("end-to-end ", e2e_times)


@main.command()
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path())
def inspect(snapshot_path: str) -> None:
    """Print snapshot statistics."""
    try:
        data = Path(snapshot_path).read_bytes()
        snapshot = index.loads(data)
    except (OSError, index.SnapshotError) as exc:
        _fail(str(exc))
    with_queries = sum(1 for r in snapshot.records if r.queries)
    click.echo(f"file:          {snapshot_path} ({len(data)} bytes)")
    click.echo(f"record_count:  {len(snapshot)}")
    click.echo(f"charset_hash:  {snapshot.meta.charset_hash:#018x}")
    click.echo(f"mih:           {'enabled' if snapshot.mih is not None else 'disabled'}")
    click.echo(f"with queries:  {with_queries}")
    if len(snapshot):
        lengths = [len(r.canonical_code) for r in snapshot.records]
        click.echo(f"code length:   min {min(lengths)}, max {max(lengths)}")


if __name__ == "__main__":
    main()
