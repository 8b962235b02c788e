import json
import random
from pathlib import Path

import pytest
from click.testing import CliRunner

from hammcode import index
from hammcode.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def built_snapshot(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "fixture.hmx"
    result = CliRunner().invoke(main, [
        "build",
        "--catalog", str(FIXTURES / "catalog.tsv"),
        "--query-log", str(FIXTURES / "query_log.tsv"),
        "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    return out


class TestBuild:
    def test_reports_record_count(self, runner, tmp_path):
        out = tmp_path / "snap.hmx"
        result = runner.invoke(main, [
            "build",
            "--catalog", str(FIXTURES / "catalog.tsv"),
            "--query-log", str(FIXTURES / "query_log.tsv"),
            "--out", str(out),
        ])
        assert result.exit_code == 0
        assert "records indexed:      8" in result.output
        assert out.exists()
        assert len(index.load(out)) == 8

    def test_missing_catalog_fails_cleanly(self, runner, tmp_path):
        result = runner.invoke(main, [
            "build",
            "--catalog", str(tmp_path / "nope.tsv"),
            "--query-log", str(FIXTURES / "query_log.tsv"),
            "--out", str(tmp_path / "snap.hmx"),
        ])
        assert result.exit_code == 1
        assert "error:" in result.output

    def test_garbage_input_fails_cleanly(self, runner, tmp_path):
        bad = tmp_path / "garbage.tsv"
        bad.write_bytes(b"\x00\x01\x02 binary trash")
        result = runner.invoke(main, [
            "build",
            "--catalog", str(bad),
            "--query-log", str(FIXTURES / "query_log.tsv"),
            "--out", str(tmp_path / "snap.hmx"),
        ])
        assert result.exit_code == 1


class TestQuery:
    def test_human_readable(self, runner, built_snapshot):
        result = runner.invoke(main, ["query", "s3221qs", "--snapshot", str(built_snapshot)])
        assert result.exit_code == 0
        assert "candidate code: S3221QS" in result.output
        assert "dell 32 inch monitor" in result.output

    def test_fallback_exits_zero(self, runner, built_snapshot):
        result = runner.invoke(main, ["query", "dell monitor", "--snapshot", str(built_snapshot)])
        assert result.exit_code == 0
        assert "fallback" in result.output

    def test_json_output(self, runner, built_snapshot):
        result = runner.invoke(main, [
            "query", "s3221qs", "--snapshot", str(built_snapshot), "--json",
        ])
        assert result.exit_code == 0
        body = json.loads(result.output)
        assert body["gated"] is True
        assert "timings_us" not in body  # deterministic by default
        assert body["suggestions"][0]["query"] == "dell 32 inch monitor"

    def test_json_with_timings(self, runner, built_snapshot):
        result = runner.invoke(main, [
            "query", "s3221qs", "--snapshot", str(built_snapshot), "--json", "--timings",
        ])
        body = json.loads(result.output)
        assert set(body["timings_us"]) == {"gate", "encode", "knn", "filter", "aggregate"}

    def test_flag_overrides(self, runner, built_snapshot):
        result = runner.invoke(main, [
            "query", "s3221qs", "--snapshot", str(built_snapshot),
            "--json", "--max-suggestions", "1",
        ])
        body = json.loads(result.output)
        assert len(body["suggestions"]) == 1

    def test_config_file(self, runner, built_snapshot, tmp_path):
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps({"score": {"max_suggestions": 2}}), encoding="utf-8")
        result = runner.invoke(main, [
            "query", "s3221qs", "--snapshot", str(built_snapshot),
            "--json", "--config", str(cfg),
        ])
        body = json.loads(result.output)
        assert len(body["suggestions"]) == 2

    def test_missing_snapshot_fails_cleanly(self, runner, tmp_path):
        result = runner.invoke(main, [
            "query", "s3221qs", "--snapshot", str(tmp_path / "missing.hmx"),
        ])
        assert result.exit_code == 1


class TestInspect:
    def test_matches_build_output(self, runner, built_snapshot):
        result = runner.invoke(main, ["inspect", "--snapshot", str(built_snapshot)])
        assert result.exit_code == 0
        assert "record_count:  8" in result.output

    def test_corrupt_snapshot_fails_cleanly(self, runner, tmp_path):
        bad = tmp_path / "bad.hmx"
        bad.write_bytes(b"not a snapshot at all")
        result = runner.invoke(main, ["inspect", "--snapshot", str(bad)])
        assert result.exit_code == 1
        assert "error:" in result.output


class TestEval:
    def test_writes_report(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(main, [
            "eval", "--catalog-size", "200", "--queries", "30",
            "--kinds", "substitute,delete", "--seed", "3", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert "substitute" in result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        assert {row["kind"] for row in report["rows"]} == {"substitute", "delete"}

    def test_rejects_unknown_kind(self, runner):
        result = runner.invoke(main, [
            "eval", "--catalog-size", "50", "--queries", "5", "--kinds", "scramble",
        ])
        assert result.exit_code == 1

    def test_eval_existing_snapshot(self, runner, built_snapshot):
        result = runner.invoke(main, [
            "eval", "--snapshot", str(built_snapshot),
            "--kinds", "substitute", "--queries", "10",
        ])
        assert result.exit_code == 0, result.output


class TestServe:
    def test_bad_snapshot_fails_before_binding(self, runner, tmp_path):
        bad = tmp_path / "corrupt.hmx"
        bad.write_bytes(b"definitely not a snapshot")
        result = runner.invoke(main, ["serve", "--snapshot", str(bad), "--port", "1"])
        assert result.exit_code == 1
        assert "error:" in result.output


class TestBench:
    def test_reports_latency(self, runner):
        result = runner.invoke(main, [
            "bench", "--catalog-size", "500", "--queries", "20",
        ])
        assert result.exit_code == 0, result.output
        assert "knn scan" in result.output
        assert "end-to-end" in result.output


class TestDeterminism:
    def test_build_and_query_reproducible(self, runner, tmp_path):
        outputs = []
        snapshots = []
        for run in range(2):
            out = tmp_path / f"snap{run}.hmx"
            build = runner.invoke(main, [
                "build",
                "--catalog", str(FIXTURES / "catalog.tsv"),
                "--query-log", str(FIXTURES / "query_log.tsv"),
                "--out", str(out),
            ])
            assert build.exit_code == 0
            snapshots.append(out.read_bytes())
            query = runner.invoke(main, [
                "query", "s3221qs", "--snapshot", str(out), "--json",
            ])
            outputs.append(query.output)
        assert snapshots[0] == snapshots[1]
        assert outputs[0] == outputs[1]

    def test_permuted_rows_identical_snapshot(self, runner, tmp_path):
        def permuted_copy(src, dest, seed):
            lines = Path(src).read_text(encoding="utf-8").splitlines()
            body = lines[1:]
            random.Random(seed).shuffle(body)
            dest.write_text("\n".join([lines[0]] + body) + "\n", encoding="utf-8")

        results = []
        for run in range(2):
            catalog = tmp_path / f"catalog{run}.tsv"
            log = tmp_path / f"log{run}.tsv"
            permuted_copy(FIXTURES / "catalog.tsv", catalog, seed=run * 17)
            permuted_copy(FIXTURES / "query_log.tsv", log, seed=run * 31)
            out = tmp_path / f"snap{run}.hmx"
            build = runner.invoke(main, [
                "build", "--catalog", str(catalog), "--query-log", str(log),
                "--out", str(out),
            ])
            assert build.exit_code == 0
            query = runner.invoke(main, [
                "query", "s3221qs", "--snapshot", str(out), "--json",
            ])
            results.append((out.read_bytes(), query.output))
        assert results[0] == results[1]
