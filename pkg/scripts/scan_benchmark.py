#!/usr/bin/env python3
"""Linear-scan throughput versus catalog size.

The scan is two XOR + popcount word operations per key; this measures
how that scales from ten thousand keys to a million, for the retrieval
stage alone and for the full pipeline.

    python scripts/scan_benchmark.py --sizes 10000 100000 1000000
"""

import argparse
import random
import statistics
import time

from hammcode import codec, index
from hammcode.evaluation import gen_catalog
from hammcode.pipeline import PipelineConfig, run_suggest


def bench_size(n: int, queries: int, seed: int) -> None:
    snapshot = index.build(gen_catalog(n, seed=seed))
    rng = random.Random(seed + 1)
    codes = [snapshot.records[rng.randrange(n)].canonical_code for _ in range(queries)]

    keys = [codec.encode(c) for c in codes]
    index.knn(snapshot, keys[0], 50)  # warm up
    knn_ms = []
    for key in keys:
        t0 = time.perf_counter()
        index.knn(snapshot, key, 50)
        knn_ms.append((time.perf_counter() - t0) * 1000)

    cfg = PipelineConfig()
    e2e_ms = []
    for code in codes:
        t0 = time.perf_counter()
        run_suggest(code, cfg, snapshot)
        e2e_ms.append((time.perf_counter() - t0) * 1000)

    print(
        f"{n:>10,} keys | knn mean {statistics.fmean(knn_ms):7.2f} ms "
        f"max {max(knn_ms):7.2f} ms | suggest mean {statistics.fmean(e2e_ms):7.2f} ms "
        f"max {max(e2e_ms):7.2f} ms"
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[10_000, 100_000, 1_000_000])
    parser.add_argument("--queries", type=int, default=50)
    parser.add_argument("--seed", type=int, default=3)
    args = parser.parse_args()
    for n in args.sizes:
        bench_size(n, args.queries, args.seed)


if __name__ == "__main__":
    main()
