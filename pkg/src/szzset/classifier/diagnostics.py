"""Dataset and model introspection: rank correlations, PCA, importances."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateData
from .models import (
    MODEL_BAYES,
    MODEL_BOOSTING,
    MODEL_FOREST,
    MODEL_LOGISTIC,
    MODEL_SVM,
    MODEL_TREE,
    Scaler,
    TrainedModel,
    _tree_gains,
)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_values = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_values[j + 1] == sorted_values[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: np.ndarray, y: np.ndarray) -> float:
    """Spearman's rho: Pearson correlation of average ranks.

    NaN when either side has zero rank variance (a constant column has no
    monotone relationship to speak of).
    """
    rx = _average_ranks(np.asarray(x, dtype=float))
    ry = _average_ranks(np.asarray(y, dtype=float))
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = np.sqrt((dx * dx).sum() * (dy * dy).sum())
    if denom == 0:
        return float("nan")
    return float((dx * dy).sum() / denom)


def spearman_matrix(X: np.ndarray) -> np.ndarray:
    """Pairwise Spearman correlations between feature columns."""
    X = np.asarray(X, dtype=float)
    if len(X) < 3:
        raise DegenerateData("correlation needs at least 3 rows")
    d = X.shape[1]
    ranks = np.column_stack([_average_ranks(X[:, j]) for j in range(d)])
    out = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            di = ranks[:, i] - ranks[:, i].mean()
            dj = ranks[:, j] - ranks[:, j].mean()
            denom = np.sqrt((di * di).sum() * (dj * dj).sum())
            rho = float("nan") if denom == 0 else float((di * dj).sum() / denom)
            out[i, j] = rho
            out[j, i] = rho
    return out


def pca(X: np.ndarray) -> dict:
    """Principal components of the standardized feature matrix.

    Returns components (rows, sorted by decreasing variance), the
    explained variance per component, and the explained variance ratio,
    which sums to 1.
    """
    X = np.asarray(X, dtype=float)
    if len(X) < 3:
        raise DegenerateData("pca needs at least 3 rows")
    Z = Scaler.fit(X).transform(X)
    cov = np.cov(Z, rowvar=False, ddof=0)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    total = float(eigenvalues.sum())
    if total == 0:
        raise DegenerateData("all features are constant")
    return {
        "components": eigenvectors[:, order].T,
        "explained_variance": eigenvalues,
        "explained_variance_ratio": eigenvalues / total,
    }


def feature_importance(model: TrainedModel) -> np.ndarray | None:
    """Per-feature importance scores summing to 1, or None.

    Tree models report normalized split gain; linear models report
    normalized absolute coefficients; naive bayes has no comparable
    notion, so it reports None.
    """
    d = len(model.feature_names)
    if model.kind == MODEL_BAYES:
        return None
    if model.kind in (MODEL_LOGISTIC, MODEL_SVM):
        raw = np.abs(np.array(model.params["coef"], dtype=float))
    elif model.kind == MODEL_TREE:
        raw = np.zeros(d)
        _tree_gains(model.params["tree"], raw)
    elif model.kind in (MODEL_FOREST, MODEL_BOOSTING):
        raw = np.zeros(d)
        for tree in model.params["trees"]:
            _tree_gains(tree, raw)
    else:
        raise ValueError(f"unknown model kind {model.kind!r}")
    total = raw.sum()
    if total == 0:
        return np.full(d, 1.0 / d)
    return raw / total
