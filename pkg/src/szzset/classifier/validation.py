"""Cross-validation and threshold metrics for the commit classifiers.

Three split strategies: shuffle_split draws independent random 80/20
partitions, k_fold partitions the rows exactly once, repeated_k_fold
reruns k_fold with derived seeds. Every split retrains from scratch via
train(), so the scaler and sampler never see test rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TooFewRows
from .models import TrainedModel, train
from .sampling import SamplerSpec

CV_SHUFFLE_SPLIT = "shuffle_split"
CV_K_FOLD = "k_fold"
CV_REPEATED_K_FOLD = "repeated_k_fold"

CV_KINDS = (CV_SHUFFLE_SPLIT, CV_K_FOLD, CV_REPEATED_K_FOLD)


@dataclass(frozen=True)
class CvSpec:
    kind: str = CV_SHUFFLE_SPLIT
    splits: int = 10
    repeats: int = 1
    seed: int = 0
    test_fraction: float = 0.2

    def __post_init__(self):
        if self.kind not in CV_KINDS:
            raise ValueError(f"unknown cv kind {self.kind!r}")
        if self.splits < 2:
            raise ValueError("splits must be at least 2")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")


@dataclass(frozen=True)
class SplitMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    auc: float
    confusion: tuple[int, int, int, int]  # (tn, fp, fn, tp)


@dataclass
class CvReport:
    spec: CvSpec
    splits: list[SplitMetrics] = field(default_factory=list)

    def aggregate(self) -> dict[str, float]:
        """Mean over splits; AUC via nanmean since single-class folds are NaN."""
        out = {}
        for name in ("precision", "recall", "f1", "accuracy"):
            out[name] = float(np.mean([getattr(s, name) for s in self.splits]))
        aucs = np.array([s.auc for s in self.splits])
        out["auc"] = float(np.nanmean(aucs)) if not np.all(np.isnan(aucs)) else float("nan")
        return out


def auc_score(labels: np.ndarray, scores: np.ndarray) -> float:
    """Area under the ROC curve by the rank statistic.

    Average ranks handle score ties (each tied pair counts 0.5). Returns
    NaN when only one class is present.
    """
    labels = np.asarray(labels, dtype=float)
    scores = np.asarray(scores, dtype=float)
    n_pos = int((labels == 1).sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_sum = float(ranks[labels == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def split_metrics(labels: np.ndarray, predictions: np.ndarray, scores: np.ndarray) -> SplitMetrics:
    labels = np.asarray(labels, dtype=int)
    predictions = np.asarray(predictions, dtype=int)
    tp = int(((labels == 1) & (predictions == 1)).sum())
    fp = int(((labels == 0) & (predictions == 1)).sum())
    fn = int(((labels == 1) & (predictions == 0)).sum())
    tn = int(((labels == 0) & (predictions == 0)).sum())
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = (tp + tn) / len(labels) if len(labels) else 0.0
    return SplitMetrics(
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=accuracy,
        auc=auc_score(labels, scores),
        confusion=(tn, fp, fn, tp),
    )


def _shuffle_split_indices(n: int, spec: CvSpec, rng: np.random.Generator):
    n_test = max(1, round(n * spec.test_fraction))
    for _ in range(spec.splits):
        perm = rng.permutation(n)
        yield perm[n_test:], perm[:n_test]


def _k_fold_indices(n: int, splits: int, rng: np.random.Generator):
    perm = rng.permutation(n)
    for fold in np.array_split(perm, splits):
        yield np.setdiff1d(perm, fold, assume_unique=True), fold


def _split_plan(n: int, spec: CvSpec):
    rng = np.random.default_rng(spec.seed)
    if spec.kind == CV_SHUFFLE_SPLIT:
        yield from _shuffle_split_indices(n, spec, rng)
    elif spec.kind == CV_K_FOLD:
        yield from _k_fold_indices(n, spec.splits, rng)
    else:
        for repeat in range(spec.repeats):
            yield from _k_fold_indices(n, spec.splits, np.random.default_rng(spec.seed + repeat))


def cross_validate(
    X: np.ndarray,
    y: np.ndarray,
    kind: str,
    spec: CvSpec = CvSpec(),
    sampler: SamplerSpec = SamplerSpec(),
    cost_sensitive: bool = False,
    seed: int = 0,
    threshold: float = 0.5,
    hyper: dict | None = None,
) -> CvReport:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) < 2 * spec.splits:
        raise TooFewRows(f"{len(y)} rows cannot support {spec.splits} splits")
    report = CvReport(spec=spec)
    for train_idx, test_idx in _split_plan(len(y), spec):
        model = train(
            X[train_idx],
            y[train_idx],
            kind,
            sampler=sampler,
            cost_sensitive=cost_sensitive,
            seed=seed,
            threshold=threshold,
            hyper=hyper,
        )
        scores = model.scores(X[test_idx])
        predictions = (scores >= model.threshold).astype(int)
        report.splits.append(split_metrics(y[test_idx], predictions, scores))
    return report


def holdout_evaluate(model: TrainedModel, X: np.ndarray, y: np.ndarray) -> SplitMetrics:
    """Score a fitted model on held-out rows (its own scaler, no refit)."""
    scores = model.scores(np.asarray(X, dtype=float))
    predictions = (scores >= model.threshold).astype(int)
    return split_metrics(np.asarray(y), predictions, scores)
