"""Classifier-gated tracing: drop likely-bad fixing commits before SZZ runs.

A filtered run reports two metric blocks over the same outputs. The
ground-truth block scores against every link; the without-bad-linkers
block rescores against only the links whose fixing set survived the
filter. Identified, correct, and precision are shared between the blocks
(a fully discarded set contributes nothing to either), recall and F1 are
not, because the surviving subset has fewer relevant sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable

from ..commitsets import CommitSet, LinkDataset, aggregate
from ..evaluation import EvalReport, Perspective, evaluate, report_to_dict
from ..history import CommitId, RepositoryHistory
from ..variants import DEFAULT_REFACTORING_THRESHOLD, Variant, parse_variant
from .features import extract_features
from .labeling import GOOD, LabelMap, label_single
from .models import TrainedModel

AcceptFn = Callable[[RepositoryHistory, CommitSet, CommitId], bool]


def make_input_filter(model: TrainedModel) -> AcceptFn:
    """Accept a commit when the model scores it at or above its threshold."""

    def accept(history: RepositoryHistory, commit_set: CommitSet, commit_id: CommitId) -> bool:
        row = extract_features(history, commit_set, commit_id).as_array()
        return bool(model.scores(row.reshape(1, -1))[0] >= model.threshold)

    return accept


@dataclass
class FilteredRun:
    variant: Variant
    discarded_sets: int
    n_links: int
    discarded_bug_ids: tuple[str, ...]
    ground_truth: EvalReport
    without_bad_linkers: EvalReport


def _run_filtered(
    history: RepositoryHistory,
    dataset: LinkDataset,
    variant: Variant,
    filter_for,
    skip_list: frozenset[CommitId],
    refactoring_threshold: int,
    perspective: str | Perspective,
) -> FilteredRun:
    outputs = {}
    discarded: list[str] = []
    for rec in dataset.records:
        fixing = dataset.index.get(rec.fixing_set)
        input_filter = filter_for(rec, fixing)
        if not any(input_filter(c) for c in fixing.commits):
            discarded.append(rec.bug_id)
        outputs[rec.bug_id] = aggregate(
            history,
            dataset.index,
            fixing,
            variant,
            skip_list=skip_list,
            input_filter=input_filter,
            refactoring_threshold=refactoring_threshold,
        )
    ground_truth = evaluate(dataset, outputs, perspective)
    dropped = set(discarded)
    surviving = [rec for rec in dataset.records if rec.bug_id not in dropped]
    sub = LinkDataset(records=surviving, index=dataset.index)
    without_bad = evaluate(
        sub, {rec.bug_id: outputs[rec.bug_id] for rec in surviving}, perspective
    )
    return FilteredRun(
        variant=variant,
        discarded_sets=len(discarded),
        n_links=len(dataset.records),
        discarded_bug_ids=tuple(discarded),
        ground_truth=ground_truth,
        without_bad_linkers=without_bad,
    )


def filtered_evaluation(
    history: RepositoryHistory,
    dataset: LinkDataset,
    variant: str | Variant,
    accept: AcceptFn,
    skip_list: frozenset[CommitId] = frozenset(),
    refactoring_threshold: int = DEFAULT_REFACTORING_THRESHOLD,
    perspective: str | Perspective = Perspective.P1,
) -> FilteredRun:
    variant = parse_variant(variant)

    def filter_for(rec, fixing: CommitSet):
        return lambda commit_id: accept(history, fixing, commit_id)

    return _run_filtered(
        history, dataset, variant, filter_for, skip_list, refactoring_threshold, perspective
    )


def oracle_filter_bound(
    history: RepositoryHistory,
    dataset: LinkDataset,
    variant: str | Variant,
    skip_list: frozenset[CommitId] = frozenset(),
    refactoring_threshold: int = DEFAULT_REFACTORING_THRESHOLD,
    perspective: str | Perspective = Perspective.P1,
) -> FilteredRun:
    """Rerun the variant keeping only provably good linker commits.

    Labels come from the unfiltered run itself, so this is the ceiling a
    perfect classifier could reach. Variants that keep a single candidate
    per commit hit precision 1.0 here: each kept commit contributes
    exactly its one true set.
    """
    variant = parse_variant(variant)
    outputs = {
        rec.bug_id: aggregate(
            history,
            dataset.index,
            dataset.index.get(rec.fixing_set),
            variant,
            skip_list=skip_list,
            refactoring_threshold=refactoring_threshold,
        )
        for rec in dataset.records
    }
    labels: LabelMap = label_single(dataset, outputs, variant)

    def filter_for(rec, fixing: CommitSet):
        return lambda commit_id: labels[(rec.bug_id, commit_id)] == GOOD

    return _run_filtered(
        history, dataset, variant, filter_for, skip_list, refactoring_threshold, perspective
    )


# --- rendering -------------------------------------------------------------------


def filtered_to_dict(run: FilteredRun) -> dict:
    return {
        "variant": run.variant.value,
        "n_links": run.n_links,
        "discarded_sets": run.discarded_sets,
        "discarded_bug_ids": sorted(run.discarded_bug_ids),
        "ground_truth": report_to_dict(run.ground_truth),
        "without_bad_linkers": report_to_dict(run.without_bad_linkers),
    }


def filtered_to_json(runs: Iterable[FilteredRun]) -> str:
    return json.dumps([filtered_to_dict(r) for r in runs], indent=2, sort_keys=True) + "\n"


FILTERED_COLUMNS = (
    "Variant",
    "Identified",
    "Correct",
    "Discarded",
    "GT Prec.",
    "GT Rec.",
    "GT F1",
    "WBL Prec.",
    "WBL Rec.",
    "WBL F1",
)


def filtered_to_table(runs: Iterable[FilteredRun]) -> str:
    rows = [FILTERED_COLUMNS]
    for run in runs:
        gt = run.ground_truth
        wbl = run.without_bad_linkers
        rows.append(
            (
                run.variant.value,
                f"{gt.identified:,}",
                f"{gt.correct:,}",
                f"{run.discarded_sets}/{run.n_links}",
                f"{gt.precision:.2f}",
                f"{gt.recall:.2f}",
                f"{gt.f1:.2f}",
                f"{wbl.precision:.2f}",
                f"{wbl.recall:.2f}",
                f"{wbl.f1:.2f}",
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(FILTERED_COLUMNS))]
    lines = []
    for n, row in enumerate(rows):
        lines.append("  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)))
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
