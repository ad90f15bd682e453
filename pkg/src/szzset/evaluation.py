"""Scoring aggregated candidates against ground-truth link datasets.

Counts are pooled across links (micro-averaging): identified is the total
number of candidate sets returned, correct the total of those that appear
in the truth, relevant the total of true inducing sets. Precision and
recall are ratios of the pooled counts, F1 their harmonic mean, and the
per-link Jaccard distance 1 - |T ∩ P| / |T ∪ P| measures dispersion
between the true and predicted sets (0 when both are empty).

Three evaluation perspectives share this algebra. P1 scores every link of
a benchmark as-is. P2 restricts to links whose fixing and inducing sets
are all singletons, recasting the task at single-commit granularity. P3
is P1 applied to an external benchmark whose links are natively at set
granularity; it exists as a distinct id so reports say which reading they
came from.

Pairwise variant agreement pools (link id, set id) pairs of one outcome
kind per variant and takes Jaccard similarity between variants. A variant
with no items of the kind yields undefined cells, emitted as absent.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from .commitsets import AggregatedCandidates, LinkDataset, LinkRecord
from .errors import CoverageGap, MismatchedFixingSet, PerspectiveViolation
from .ingest import LinkabilityFlags
from .variants import Variant


class Perspective(Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"


def parse_perspective(name: str | Perspective) -> Perspective:
    if isinstance(name, Perspective):
        return name
    try:
        return Perspective(name.upper())
    except ValueError:
        raise PerspectiveViolation(f"unknown perspective {name!r}") from None


@dataclass(frozen=True)
class LinkScore:
    """Per-link outcome sets and dispersion."""

    bug_id: str
    true_positive: frozenset[str]
    false_positive: frozenset[str]
    false_negative: frozenset[str]
    jaccard_distance: float


@dataclass
class EvalReport:
    variant: Variant | None
    perspective: Perspective
    n_links: int
    excluded_links: int
    identified: int
    correct: int
    relevant: int
    precision: float
    recall: float
    f1: float
    avg_jaccard_distance: float
    per_link: list[LinkScore] = field(default_factory=list)


def score_link(truth: LinkRecord, predicted: AggregatedCandidates) -> LinkScore:
    if truth.fixing_set != predicted.fixing_set:
        raise MismatchedFixingSet(
            f"{truth.bug_id}: truth fixes {truth.fixing_set}, "
            f"prediction fixes {predicted.fixing_set}"
        )
    truth_sets = frozenset(truth.inducing_sets)
    pred_sets = predicted.candidate_sets
    tp = pred_sets & truth_sets
    union = pred_sets | truth_sets
    return LinkScore(
        bug_id=truth.bug_id,
        true_positive=tp,
        false_positive=pred_sets - truth_sets,
        false_negative=truth_sets - pred_sets,
        jaccard_distance=0.0 if not union else 1.0 - len(tp) / len(union),
    )


def _is_singleton_link(dataset: LinkDataset, rec: LinkRecord) -> bool:
    if len(dataset.index.get(rec.fixing_set).commits) != 1:
        return False
    return all(len(dataset.index.get(s).commits) == 1 for s in rec.inducing_sets)


def select_perspective(dataset: LinkDataset, perspective: str | Perspective) -> LinkDataset:
    """The sub-dataset a perspective evaluates; P1 and P3 take every link."""
    perspective = parse_perspective(perspective)
    if perspective is not Perspective.P2:
        return dataset
    records = [rec for rec in dataset.records if _is_singleton_link(dataset, rec)]
    return LinkDataset(records=records, index=dataset.index)


def evaluate(
    dataset: LinkDataset,
    outputs: Mapping[str, AggregatedCandidates],
    perspective: str | Perspective = Perspective.P1,
    exclude_unlinkable: bool = False,
    linkability: Mapping[str, LinkabilityFlags] | None = None,
) -> EvalReport:
    """Score one variant's outputs (keyed by bug id) over a whole dataset.

    exclude_unlinkable drops links flagged ghost_fix, extrinsic, or
    no_shared_files before pooling; retained links score exactly as they
    would without the exclusion. Links absent from the flag map are kept.
    """
    perspective = parse_perspective(perspective)
    missing = [rec.bug_id for rec in dataset.records if rec.bug_id not in outputs]
    if missing:
        raise CoverageGap(f"no output for links: {', '.join(sorted(missing))}")
    if perspective is Perspective.P2:
        for rec in dataset.records:
            if not _is_singleton_link(dataset, rec):
                raise PerspectiveViolation(
                    f"{rec.bug_id}: non-singleton sets under {perspective.value}"
                )
    variants = {outputs[rec.bug_id].variant for rec in dataset.records}
    if len(variants) > 1:
        raise ValueError(f"outputs mix variants: {sorted(v.value for v in variants)}")

    if exclude_unlinkable:
        if linkability is None:
            raise ValueError("exclude_unlinkable requires a linkability flag map")
        retained = [
            rec
            for rec in dataset.records
            if rec.bug_id not in linkability or linkability[rec.bug_id].linkable()
        ]
    else:
        retained = list(dataset.records)

    per_link = [score_link(rec, outputs[rec.bug_id]) for rec in retained]
    identified = sum(len(outputs[rec.bug_id].candidate_sets) for rec in retained)
    correct = sum(len(score.true_positive) for score in per_link)
    relevant = sum(len(rec.inducing_sets) for rec in retained)
    precision = correct / identified if identified else 0.0
    recall = correct / relevant if relevant else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    avg_jd = (
        sum(score.jaccard_distance for score in per_link) / len(per_link)
        if per_link
        else 0.0
    )
    return EvalReport(
        variant=next(iter(variants)) if variants else None,
        perspective=perspective,
        n_links=len(retained),
        excluded_links=len(dataset.records) - len(retained),
        identified=identified,
        correct=correct,
        relevant=relevant,
        precision=precision,
        recall=recall,
        f1=f1,
        avg_jaccard_distance=avg_jd,
        per_link=per_link,
    )


# --- pairwise variant agreement ----------------------------------------------


OVERLAP_KINDS = ("true_positive", "false_positive", "false_negative")


@dataclass
class OverlapMatrix:
    """Jaccard agreement between variants on one outcome kind.

    Cells hold both orderings plus the diagonal; pairs where neither
    variant produced an item of the kind are absent.
    """

    kind: str
    variants: tuple[Variant, ...]
    cells: dict[tuple[Variant, Variant], float]


def _pooled_items(report: EvalReport, kind: str) -> frozenset[tuple[str, str]]:
    return frozenset(
        (score.bug_id, set_id)
        for score in report.per_link
        for set_id in getattr(score, kind)
    )


def overlap(reports: Sequence[EvalReport], kind: str) -> OverlapMatrix:
    if kind not in OVERLAP_KINDS:
        raise ValueError(f"unknown overlap kind {kind!r}")
    if len(reports) < 2:
        raise ValueError("overlap needs at least two variants")
    variants = tuple(r.variant for r in reports)
    if len(set(variants)) != len(variants):
        raise ValueError("overlap reports must come from distinct variants")
    link_ids = {frozenset(score.bug_id for score in r.per_link) for r in reports}
    if len(link_ids) != 1:
        raise ValueError("overlap reports must cover the same links")
    items = {r.variant: _pooled_items(r, kind) for r in reports}
    cells: dict[tuple[Variant, Variant], float] = {}
    for v in variants:
        for w in variants:
            union = items[v] | items[w]
            if not union:
                continue
            cells[(v, w)] = len(items[v] & items[w]) / len(union)
    return OverlapMatrix(kind=kind, variants=variants, cells=cells)


# --- report emission -----------------------------------------------------------


def report_to_dict(report: EvalReport) -> dict:
    return {
        "variant": report.variant.value if report.variant else None,
        "perspective": report.perspective.value,
        "n_links": report.n_links,
        "excluded_links": report.excluded_links,
        "identified": report.identified,
        "correct": report.correct,
        "relevant": report.relevant,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "avg_jaccard_distance": report.avg_jaccard_distance,
        "per_link": [
            {
                "bug_id": score.bug_id,
                "true_positive": sorted(score.true_positive),
                "false_positive": sorted(score.false_positive),
                "false_negative": sorted(score.false_negative),
                "jaccard_distance": score.jaccard_distance,
            }
            for score in report.per_link
        ],
    }


def reports_to_json(reports: Sequence[EvalReport]) -> str:
    return json.dumps([report_to_dict(r) for r in reports], sort_keys=True, indent=2) + "\n"


SUMMARY_COLUMNS = (
    "variant",
    "n_links",
    "excluded_links",
    "identified",
    "correct",
    "relevant",
    "precision",
    "recall",
    "f1",
    "avg_jaccard_distance",
)


def reports_to_csv(reports: Sequence[EvalReport]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(SUMMARY_COLUMNS)
    for r in reports:
        row = report_to_dict(r)
        writer.writerow([row[c] for c in SUMMARY_COLUMNS])
    return out.getvalue()


def reports_to_table(reports: Sequence[EvalReport]) -> str:
    """Aligned text table, one row per variant."""
    headers = ("Variant", "Identified", "Correct", "Rec.", "Prec.", "F1", "avg JD")
    rows = [
        (
            r.variant.value if r.variant else "-",
            f"{r.identified:,}",
            f"{r.correct:,}",
            f"{r.recall:.2f}",
            f"{r.precision:.2f}",
            f"{r.f1:.2f}",
            f"{r.avg_jaccard_distance:.2f}",
        )
        for r in reports
    ]
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in rows)) if rows else len(headers[i])
        for i in range(len(headers))
    ]

    def fmt(cells):
        return "  ".join(c.rjust(widths[i]) for i, c in enumerate(cells)).rstrip()

    lines = [fmt(headers), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines) + "\n"


def overlap_to_csv(matrix: OverlapMatrix) -> str:
    """Square CSV with variant labels; undefined cells stay empty."""
    out = io.StringIO()
    writer = csv.writer(out)
    names = [v.value for v in matrix.variants]
    writer.writerow([matrix.kind] + names)
    for v in matrix.variants:
        row = [v.value]
        for w in matrix.variants:
            cell = matrix.cells.get((v, w))
            row.append("" if cell is None else f"{cell:.4f}")
        writer.writerow(row)
    return out.getvalue()
