#!/usr/bin/env python3
"""Sweep the edit budget across perturbation kinds on a synthetic catalog.

Shows what each stage buys: substitutions survive on Hamming alone,
while insertions and deletions need the edit filter's budget.

    python scripts/recall_sweep.py --catalog-size 20000 --queries 400
"""

import argparse
import dataclasses

from hammcode import index
from hammcode.evaluation import (
    FamilyStructure,
    PerturbationSpec,
    gen_catalog,
    render_table,
    run_eval,
)
from hammcode.pipeline import PipelineConfig
from hammcode.rerank import RerankConfig


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--catalog-size", type=int, default=20000)
    parser.add_argument("--queries", type=int, default=400)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--family", action="store_true", help="family-structured codes")
    parser.add_argument("--max-edits", type=int, nargs="+", default=[0, 1, 2, 3])
    args = parser.parse_args()

    family = FamilyStructure() if args.family else None
    print(f"generating catalog: n={args.catalog_size} family={bool(family)} seed={args.seed}")
    snapshot = index.build(gen_catalog(args.catalog_size, family_structure=family,
                                       seed=args.seed))

    specs = [
        PerturbationSpec(kind, count=1, seed=args.seed + i)
        for i, kind in enumerate(
            ("substitute", "insert", "delete", "transpose", "strip_punctuation")
        )
    ]
    for max_edit in args.max_edits:
        cfg = dataclasses.replace(PipelineConfig(), rerank=RerankConfig(max_edit=max_edit))
        report = run_eval(snapshot, specs, args.queries, cfg)
        print(f"\n=== max_edit = {max_edit} ===")
        print(render_table(report))


if __name__ == "__main__":
    main()
