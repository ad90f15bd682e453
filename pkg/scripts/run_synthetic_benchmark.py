"""End-to-end experiment on the seeded synthetic benchmark.

Runs every tracing variant over the benchmark links and prints the
evaluation tables: the plain run, the run with unlinkable bugs
excluded, and the pairwise variant agreement matrices. Then trains a
commit classifier on single-variant labels, cross-validates it, and
compares three filtered runs per variant: no filter, the trained model
as input filter, and the oracle filter that keeps exactly the commits
labeled good (the precision ceiling any learned filter can approach).
"""

from __future__ import annotations

import argparse

import numpy as np

from szzset.classifier import (
    FEATURE_NAMES,
    MODEL_BOOSTING,
    MODEL_KINDS,
    SAMPLER_KINDS,
    CvSpec,
    SamplerSpec,
    cross_validate,
    feature_importance,
    filtered_evaluation,
    filtered_to_table,
    label_commits,
    make_input_filter,
    oracle_filter_bound,
    train,
    training_rows,
)
from szzset.classifier.labeling import SCHEME_SINGLE
from szzset.commitsets import aggregate
from szzset.evaluation import OVERLAP_KINDS, evaluate, overlap, overlap_to_csv, reports_to_table
from szzset.ingest import dataset_linkability
from szzset.synthetic import make_benchmark
from szzset.variants import ALL_VARIANTS, parse_variant


def variant_outputs(history, dataset, variants):
    return {
        variant: {
            rec.bug_id: aggregate(
                history,
                dataset.index,
                dataset.index.get(rec.fixing_set),
                variant,
            )
            for rec in dataset.records
        }
        for variant in variants
    }


def banner(title: str) -> None:
    print()
    print(f"== {title} ==")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7, help="benchmark seed")
    parser.add_argument("--n-links", type=int, default=20, help="benchmark link count")
    parser.add_argument("--model-kind", choices=MODEL_KINDS, default=MODEL_BOOSTING)
    parser.add_argument("--sampler", choices=SAMPLER_KINDS, default="none")
    parser.add_argument("--cost-sensitive", action="store_true")
    parser.add_argument("--label-variant", default="B", help="variant whose links label the commits")
    parser.add_argument("--threshold", type=float, default=0.5, help="acceptance score cutoff")
    parser.add_argument("--model-seed", type=int, default=0)
    args = parser.parse_args(argv)

    bench = make_benchmark(seed=args.seed, n_links=args.n_links)
    history, dataset = bench.history, bench.dataset
    outputs = variant_outputs(history, dataset, ALL_VARIANTS)

    banner(f"benchmark seed={args.seed} n_links={args.n_links}")
    reports = [evaluate(dataset, outputs[v]) for v in ALL_VARIANTS]
    print(reports_to_table(reports))

    banner("with unlinkable bugs excluded")
    linkability = dataset_linkability(history, dataset)
    excluded = [
        evaluate(dataset, outputs[v], exclude_unlinkable=True, linkability=linkability)
        for v in ALL_VARIANTS
    ]
    print(reports_to_table(excluded))

    banner("pairwise variant agreement")
    for kind in OVERLAP_KINDS:
        print(overlap_to_csv(overlap(reports, kind)))

    label_variant = parse_variant(args.label_variant)
    labels = label_commits(
        dataset,
        {label_variant: outputs[label_variant]},
        SCHEME_SINGLE,
        variant=label_variant,
    )
    X, y, keys = training_rows(history, dataset, labels)
    banner(
        f"classifier: {args.model_kind} on {len(keys)} commits "
        f"({int(y.sum())} good / {int(len(y) - y.sum())} bad)"
    )
    sampler = SamplerSpec(kind=args.sampler, seed=args.model_seed)
    model = train(
        X,
        y,
        args.model_kind,
        sampler=sampler,
        cost_sensitive=args.cost_sensitive,
        seed=args.model_seed,
        threshold=args.threshold,
    )
    print(f"converged: {model.converged}")
    importance = feature_importance(model)
    if importance is not None:
        ranked = sorted(zip(FEATURE_NAMES, importance), key=lambda kv: -kv[1])
        for name, weight in ranked:
            print(f"  {name:<16} {weight:.3f}")

    spec = CvSpec(kind="k_fold", splits=5, seed=args.model_seed)
    report = cross_validate(
        X,
        y,
        args.model_kind,
        spec=spec,
        sampler=sampler,
        cost_sensitive=args.cost_sensitive,
        seed=args.model_seed,
        threshold=args.threshold,
    )
    agg = report.aggregate()
    print("5-fold cv: " + "  ".join(f"{k}={agg[k]:.3f}" for k in sorted(agg)))

    banner("model as input filter")
    accept = make_input_filter(model)
    print(filtered_to_table(filtered_evaluation(history, dataset, v, accept) for v in ALL_VARIANTS))

    banner("oracle filter (precision ceiling)")
    print(filtered_to_table(oracle_filter_bound(history, dataset, v) for v in ALL_VARIANTS))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
