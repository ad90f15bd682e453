"""Class rebalancing applied to training rows only.

Random oversampling duplicates minority rows, random undersampling drops
majority rows, and smote interpolates new minority rows between existing
neighbors: x + t * (nn - x) with t uniform in [0, 1] and nn one of the k
nearest minority neighbors by Euclidean distance. All three leave an
already balanced input unchanged and produce an exactly balanced output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientMinority

SAMPLER_NONE = "none"
SAMPLER_OVER = "random_over"
SAMPLER_UNDER = "random_under"
SAMPLER_SMOTE = "smote"

SAMPLER_KINDS = (SAMPLER_NONE, SAMPLER_OVER, SAMPLER_UNDER, SAMPLER_SMOTE)


@dataclass(frozen=True)
class SamplerSpec:
    kind: str = SAMPLER_NONE
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be positive")


def _class_split(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(minority indices, majority indices); ties keep class 1 as minority."""
    ones = np.flatnonzero(y == 1)
    zeros = np.flatnonzero(y == 0)
    if len(ones) <= len(zeros):
        return ones, zeros
    return zeros, ones


def resample(
    X: np.ndarray, y: np.ndarray, spec: SamplerSpec
) -> tuple[np.ndarray, np.ndarray]:
    if spec.kind == SAMPLER_NONE:
        return X, y
    minority, majority = _class_split(y)
    if len(minority) == len(majority):
        return X, y
    rng = np.random.default_rng(spec.seed)
    if spec.kind == SAMPLER_OVER:
        if len(minority) == 0:
            raise InsufficientMinority("oversampling needs at least one minority row")
        extra = rng.choice(minority, size=len(majority) - len(minority), replace=True)
        keep = np.concatenate([np.arange(len(y)), extra])
        return X[keep], y[keep]
    if spec.kind == SAMPLER_UNDER:
        if len(minority) == 0:
            raise InsufficientMinority("undersampling needs at least one minority row")
        kept_majority = rng.choice(majority, size=len(minority), replace=False)
        keep = np.sort(np.concatenate([minority, kept_majority]))
        return X[keep], y[keep]
    # smote
    if len(minority) < 2:
        raise InsufficientMinority("smote needs at least two minority rows")
    k = min(spec.k_neighbors, len(minority) - 1)
    seeds = rng.choice(minority, size=len(majority) - len(minority), replace=True)
    minority_rows = X[minority]
    synthetic = np.empty((len(seeds), X.shape[1]))
    for i, idx in enumerate(seeds):
        x = X[idx]
        dist = np.linalg.norm(minority_rows - x, axis=1)
        dist[minority == idx] = np.inf
        neighbors = np.argsort(dist, kind="stable")[:k]
        nn = minority_rows[rng.choice(neighbors)]
        t = rng.uniform()
        synthetic[i] = x + t * (nn - x)
    X2 = np.concatenate([X, synthetic])
    y2 = np.concatenate([y, np.full(len(seeds), y[minority[0]])])
    return X2, y2
