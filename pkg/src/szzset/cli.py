"""Command line front end.

Subcommands: blame (trace one fixing commit), run (variants + evaluation),
adapt (commit-level links to a set-granularity dataset), train / predict
(the linker-quality classifier), and overlap (pairwise variant agreement).

Exit codes: 0 on success, 2 on usage errors (argparse), 3 on data errors,
4 when a provider or repository backend fails. Every JSON document the CLI
writes embeds a sha256 hash of the invocation's configuration and contains
no timestamps, so reruns with the same inputs are byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from .blame import MODE_PLAIN, MODES, blame_lines, parse_skip_file
from .classifier import (
    CvSpec,
    MODEL_KINDS,
    SCHEME_ALL_VARIANTS,
    SCHEME_SINGLE,
    SamplerSpec,
    SAMPLER_KINDS,
    cross_validate,
    extract_features,
    filtered_evaluation,
    filtered_to_dict,
    filtered_to_table,
    label_commits,
    load_model,
    make_input_filter,
    save_model,
    train,
    training_rows,
)
from .commitsets import aggregate, load_dataset, save_dataset
from .errors import BackendUnavailable, ProviderUnreachable, SzzError
from .evaluation import (
    OVERLAP_KINDS,
    evaluate,
    overlap,
    overlap_to_csv,
    report_to_dict,
    reports_to_csv,
    reports_to_table,
    select_perspective,
)
from .history import load_history
from .ingest import (
    HttpProvider,
    RecordedResponseProvider,
    adapt_commit_links,
    dataset_linkability,
    load_commit_links,
)
from .variants import ALL_VARIANTS, DEFAULT_REFACTORING_THRESHOLD, Variant, parse_variant

_VARIANT_CHOICES = ",".join(v.value for v in ALL_VARIANTS)


_OUTPUT_KEYS = frozenset({"func", "json", "csv", "out", "tally_json", "save_cache"})


def config_hash(args: argparse.Namespace) -> str:
    """Fingerprint of the invocation's inputs and parameters.

    Output destinations are excluded: the same analysis written to a
    different file stays byte-identical.
    """
    cfg = {
        k: str(v) if isinstance(v, Path) else v
        for k, v in vars(args).items()
        if k not in _OUTPUT_KEYS
    }
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def _parse_variants(text: str) -> list[Variant]:
    return [parse_variant(part.strip()) for part in text.split(",") if part.strip()]


def _skip_list(args) -> frozenset[str]:
    if getattr(args, "skip_file", None):
        return parse_skip_file(args.skip_file)
    return frozenset()


def _write_json(path: str, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# --- blame ----------------------------------------------------------------------


def cmd_blame(args) -> int:
    history = load_history(args.history)
    result = blame_lines(
        history,
        args.commit,
        mode=args.mode,
        skip_list=_skip_list(args),
        refactoring_threshold=args.refactoring_threshold,
    )
    refs = sorted(result.origin_map, key=lambda r: (r.path, r.line_no))
    for ref in refs:
        origin = result.origin_map[ref] or "untraceable"
        print(f"{ref.path}:{ref.line_no}: {ref.text} -> {origin}")
    return 0


# --- run ------------------------------------------------------------------------


def _variant_outputs(history, dataset, variants, skip_list, threshold):
    return {
        variant: {
            rec.bug_id: aggregate(
                history,
                dataset.index,
                dataset.index.get(rec.fixing_set),
                variant,
                skip_list=skip_list,
                refactoring_threshold=threshold,
            )
            for rec in dataset.records
        }
        for variant in variants
    }


def cmd_run(args) -> int:
    history = load_history(args.history)
    dataset = select_perspective(load_dataset(args.dataset), args.perspective)
    variants = _parse_variants(args.variants)
    skip_list = _skip_list(args)
    linkability = None
    if args.exclude_unlinkable:
        linkability = dataset_linkability(history, dataset)

    if args.filter_model:
        accept = make_input_filter(load_model(args.filter_model))
        runs = [
            filtered_evaluation(
                history,
                dataset,
                variant,
                accept,
                skip_list=skip_list,
                refactoring_threshold=args.refactoring_threshold,
                perspective=args.perspective,
            )
            for variant in variants
        ]
        print(filtered_to_table(runs), end="")
        if args.json:
            _write_json(
                args.json,
                {
                    "config_sha256": config_hash(args),
                    "filtered_runs": [filtered_to_dict(r) for r in runs],
                },
            )
        return 0

    outputs = _variant_outputs(
        history, dataset, variants, skip_list, args.refactoring_threshold
    )
    reports = [
        evaluate(
            dataset,
            outputs[variant],
            args.perspective,
            exclude_unlinkable=args.exclude_unlinkable,
            linkability=linkability,
        )
        for variant in variants
    ]
    print(reports_to_table(reports), end="")
    if args.json:
        _write_json(
            args.json,
            {
                "config_sha256": config_hash(args),
                "reports": [report_to_dict(r) for r in reports],
            },
        )
    if args.csv:
        Path(args.csv).write_text(reports_to_csv(reports))
    return 0


# --- adapt ----------------------------------------------------------------------


def cmd_adapt(args) -> int:
    links = load_commit_links(args.links)
    if args.cache:
        provider = RecordedResponseProvider.from_file(args.cache)
    else:
        provider = HttpProvider(args.endpoint, timeout=args.timeout)
    dataset, tally = adapt_commit_links(links, provider)
    save_dataset(dataset, args.out)
    if args.endpoint and args.save_cache:
        provider.save_cache(args.save_cache)
    print(f"kept {len(dataset.records)} of {len(links)} links")
    for status in sorted(tally):
        print(f"{status} {tally[status]}")
    if args.tally_json:
        _write_json(
            args.tally_json,
            {
                "config_sha256": config_hash(args),
                "total": len(links),
                "kept": len(dataset.records),
                "discarded": tally,
            },
        )
    return 0


# --- train / predict --------------------------------------------------------------


def _labeled_rows(history, dataset, args):
    if args.scheme == SCHEME_SINGLE:
        variants = [parse_variant(args.variant)]
    else:
        variants = list(ALL_VARIANTS)
    skip_list = _skip_list(args)
    provenance = _variant_outputs(
        history, dataset, variants, skip_list, args.refactoring_threshold
    )
    labels = label_commits(
        dataset,
        provenance,
        args.scheme,
        variant=variants[0] if args.scheme == SCHEME_SINGLE else None,
    )
    return training_rows(history, dataset, labels)


def cmd_train(args) -> int:
    history = load_history(args.history)
    dataset = load_dataset(args.dataset)
    X, y, keys = _labeled_rows(history, dataset, args)
    sampler = SamplerSpec(kind=args.sampler, k_neighbors=args.k_neighbors, seed=args.seed)
    model = train(
        X,
        y,
        args.model_kind,
        sampler=sampler,
        cost_sensitive=args.cost_sensitive,
        seed=args.seed,
        threshold=args.threshold,
    )
    save_model(model, args.out)
    good = int(y.sum())
    print(f"trained {args.model_kind} on {len(y)} commits ({good} good, {len(y) - good} bad)")
    print(f"converged {model.converged}")
    print(f"saved {args.out}")
    print(f"config {config_hash(args)}")
    if args.cv:
        spec = CvSpec(kind=args.cv, splits=args.splits, repeats=args.repeats, seed=args.seed)
        report = cross_validate(
            X,
            y,
            args.model_kind,
            spec,
            sampler=sampler,
            cost_sensitive=args.cost_sensitive,
            seed=args.seed,
            threshold=args.threshold,
        )
        agg = report.aggregate()
        parts = ", ".join(f"{k} {agg[k]:.3f}" for k in sorted(agg))
        print(f"cv[{args.cv} x{len(report.splits)}] {parts}")
    return 0


def cmd_predict(args) -> int:
    history = load_history(args.history)
    dataset = load_dataset(args.dataset)
    model = load_model(args.model)
    lines = ["bug_id,commit,score,accepted"]
    for rec in dataset.records:
        cs = dataset.index.get(rec.fixing_set)
        for commit_id in cs.commits:
            row = extract_features(history, cs, commit_id).as_array()
            score = float(model.scores(row.reshape(1, -1))[0])
            accepted = int(score >= model.threshold)
            lines.append(f"{rec.bug_id},{commit_id},{score:.6f},{accepted}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return 0


# --- overlap --------------------------------------------------------------------


def cmd_overlap(args) -> int:
    history = load_history(args.history)
    dataset = select_perspective(load_dataset(args.dataset), args.perspective)
    variants = _parse_variants(args.variants)
    if len(variants) < 2:
        raise SzzError("overlap needs at least two variants")
    skip_list = _skip_list(args)
    outputs = _variant_outputs(
        history, dataset, variants, skip_list, args.refactoring_threshold
    )
    reports = [evaluate(dataset, outputs[v], args.perspective) for v in variants]
    kinds = OVERLAP_KINDS if args.kind == "all" else (args.kind,)
    blocks = [overlap_to_csv(overlap(reports, kind)) for kind in kinds]
    text = "\n".join(blocks)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return 0


# --- parser ----------------------------------------------------------------------


def _add_history_arg(p):
    p.add_argument("history", help="history fixture (.json) or git repository path")


def _add_tracing_args(p):
    p.add_argument("--skip-file", help="newline-separated commit ids the X variant skips")
    p.add_argument(
        "--refactoring-threshold",
        type=int,
        default=DEFAULT_REFACTORING_THRESHOLD,
        help="diff size above which graph tracing treats a commit as refactoring",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="szzset",
        description="SZZ variants over commit-sets, with evaluation and linker filtering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("blame", help="trace one fixing commit's deleted lines")
    _add_history_arg(p)
    p.add_argument("commit", help="fixing commit id")
    p.add_argument("--mode", choices=MODES, default=MODE_PLAIN)
    _add_tracing_args(p)
    p.set_defaults(func=cmd_blame)

    p = sub.add_parser("run", help="run variants over a dataset and evaluate")
    _add_history_arg(p)
    p.add_argument("dataset", help="link dataset (.jsonl)")
    p.add_argument("--variants", default=_VARIANT_CHOICES, help="comma-separated variant ids")
    p.add_argument("--perspective", default="P1", help="P1, P2 or P3")
    p.add_argument("--exclude-unlinkable", action="store_true")
    p.add_argument("--filter-model", help="trained model that gates fixing commits")
    p.add_argument("--json", help="write evaluation reports to this JSON file")
    p.add_argument("--csv", help="write the summary table to this CSV file")
    _add_tracing_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("adapt", help="resolve commit-level links into a set dataset")
    p.add_argument("links", help="commit-level links (.csv)")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--cache", help="recorded provider responses (.json)")
    group.add_argument("--endpoint", help="live provider URL")
    p.add_argument("--timeout", type=float, default=10.0)
    p.add_argument("--save-cache", help="record live responses to this file")
    p.add_argument("--out", required=True, help="dataset output path (.jsonl)")
    p.add_argument("--tally-json", help="write the discard tally to this JSON file")
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("train", help="train a linker-quality classifier")
    _add_history_arg(p)
    p.add_argument("dataset", help="link dataset (.jsonl)")
    p.add_argument("--model-kind", choices=MODEL_KINDS, required=True)
    p.add_argument("--out", required=True, help="model output path (.json)")
    p.add_argument(
        "--scheme", choices=(SCHEME_SINGLE, SCHEME_ALL_VARIANTS), default=SCHEME_SINGLE
    )
    p.add_argument("--variant", help="labeling variant for the single scheme")
    p.add_argument("--sampler", choices=SAMPLER_KINDS, default="none")
    p.add_argument("--k-neighbors", type=int, default=5)
    p.add_argument("--cost-sensitive", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--cv", choices=("shuffle_split", "k_fold", "repeated_k_fold"))
    p.add_argument("--splits", type=int, default=10)
    p.add_argument("--repeats", type=int, default=1)
    _add_tracing_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score every fixing commit with a trained model")
    _add_history_arg(p)
    p.add_argument("dataset", help="link dataset (.jsonl)")
    p.add_argument("model", help="trained model (.json)")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("overlap", help="pairwise variant agreement matrices")
    _add_history_arg(p)
    p.add_argument("dataset", help="link dataset (.jsonl)")
    p.add_argument("--variants", default=_VARIANT_CHOICES)
    p.add_argument("--perspective", default="P1")
    p.add_argument("--kind", choices=OVERLAP_KINDS + ("all",), default="all")
    p.add_argument("--out", help="CSV output path (default stdout)")
    _add_tracing_args(p)
    p.set_defaults(func=cmd_overlap)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "scheme", None) == SCHEME_SINGLE and args.command == "train":
        if not args.variant:
            parser.error("--scheme single requires --variant")
    try:
        return args.func(args)
    except (ProviderUnreachable, BackendUnavailable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SzzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
