"""Labeling fixing commits as good or bad linkers.

A commit is a good linker for a link when at least one candidate set it
contributed belongs to the link's true inducing sets. Single-variant
labeling judges commits by one variant's provenance. All-variants labeling
keeps only commits the five variants agree on: good under every variant,
or bad under every variant; the rest are excluded from training.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..commitsets import AggregatedCandidates, CommitSet, LinkDataset
from ..errors import MissingProvenance
from ..history import CommitId, RepositoryHistory
from ..variants import ALL_VARIANTS, Variant
from .features import extract_features

GOOD = "good"
BAD = "bad"
EXCLUDED = "excluded"

SCHEME_SINGLE = "single"
SCHEME_ALL_VARIANTS = "all_variants"

LabelMap = dict[tuple[str, CommitId], str]


def _link_outputs(
    outputs: Mapping[str, AggregatedCandidates], bug_id: str, variant: Variant
) -> AggregatedCandidates:
    try:
        agg = outputs[bug_id]
    except KeyError:
        raise MissingProvenance(f"no {variant.value} output for {bug_id}") from None
    if agg.candidate_sets and not agg.contributing:
        raise MissingProvenance(f"{bug_id}: {variant.value} output lacks provenance")
    return agg


def label_single(
    dataset: LinkDataset, outputs: Mapping[str, AggregatedCandidates], variant: Variant
) -> LabelMap:
    labels: LabelMap = {}
    for rec in dataset.records:
        agg = _link_outputs(outputs, rec.bug_id, variant)
        truth = set(rec.inducing_sets)
        for commit_id in dataset.index.get(rec.fixing_set).commits:
            hit = agg.sets_contributed_by(commit_id) & truth
            labels[(rec.bug_id, commit_id)] = GOOD if hit else BAD
    return labels


def label_all_variants(
    dataset: LinkDataset,
    provenance: Mapping[Variant, Mapping[str, AggregatedCandidates]],
) -> LabelMap:
    per_variant = []
    for variant in ALL_VARIANTS:
        if variant not in provenance:
            raise MissingProvenance(f"no provenance for variant {variant.value}")
        per_variant.append(label_single(dataset, provenance[variant], variant))
    labels: LabelMap = {}
    for key in per_variant[0]:
        verdicts = {m[key] for m in per_variant}
        labels[key] = verdicts.pop() if len(verdicts) == 1 else EXCLUDED
    return labels


def label_commits(
    dataset: LinkDataset,
    provenance: Mapping[Variant, Mapping[str, AggregatedCandidates]],
    scheme: str,
    variant: Variant | None = None,
) -> LabelMap:
    if scheme == SCHEME_SINGLE:
        if variant is None:
            raise ValueError("single-variant labeling needs a variant")
        if variant not in provenance:
            raise MissingProvenance(f"no provenance for variant {variant.value}")
        return label_single(dataset, provenance[variant], variant)
    if scheme == SCHEME_ALL_VARIANTS:
        return label_all_variants(dataset, provenance)
    raise ValueError(f"unknown labeling scheme {scheme!r}")


def training_rows(
    history: RepositoryHistory, dataset: LinkDataset, labels: LabelMap
) -> tuple[np.ndarray, np.ndarray, list[tuple[str, CommitId]]]:
    """Feature matrix and 0/1 targets for every good or bad labeled commit.

    Excluded commits are dropped. Keys come back in dataset order so rows
    are reproducible.
    """
    keys: list[tuple[str, CommitId]] = []
    rows = []
    targets = []
    sets: dict[str, CommitSet] = {}
    for rec in dataset.records:
        cs = sets.setdefault(rec.fixing_set, dataset.index.get(rec.fixing_set))
        for commit_id in cs.commits:
            label = labels.get((rec.bug_id, commit_id))
            if label not in (GOOD, BAD):
                continue
            keys.append((rec.bug_id, commit_id))
            rows.append(extract_features(history, cs, commit_id).as_array())
            targets.append(1.0 if label == GOOD else 0.0)
    if not rows:
        return np.empty((0, 8)), np.empty((0,)), keys
    return np.stack(rows), np.array(targets), keys
