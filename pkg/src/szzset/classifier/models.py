"""Native binary classifiers over numpy, trained deterministically.

Six model kinds share one TrainedModel wrapper: raw features go in, the
stored scaler standardizes them, the model emits a score in [0, 1], and a
fixed threshold turns scores into labels. Trees are stored as plain dicts
(feature, threshold, gain, children) so every fitted model serializes to
JSON without custom encoding.

Training never raises on slow convergence: models that hit their
iteration cap come back with converged=False.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DegenerateData
from .features import FEATURE_NAMES
from .sampling import SamplerSpec, resample

MODEL_LOGISTIC = "logistic_regression"
MODEL_TREE = "decision_tree"
MODEL_FOREST = "random_forest"
MODEL_BOOSTING = "gradient_boosting"
MODEL_BAYES = "naive_bayes"
MODEL_SVM = "linear_svm"

MODEL_KINDS = (
    MODEL_LOGISTIC,
    MODEL_TREE,
    MODEL_FOREST,
    MODEL_BOOSTING,
    MODEL_BAYES,
    MODEL_SVM,
)

SCHEMA_VERSION = 1


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class Scaler:
    """Per-feature standardization; zero-variance features map to 0."""

    mean: np.ndarray
    std: np.ndarray
    degenerate: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> Scaler:
        X = np.asarray(X, dtype=float)
        std = X.std(axis=0)
        return cls(mean=X.mean(axis=0), std=std, degenerate=std == 0)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        safe = np.where(self.degenerate, 1.0, self.std)
        Z = (X - self.mean) / safe
        Z[:, self.degenerate] = 0.0
        return Z

    def to_json(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "degenerate": self.degenerate.astype(int).tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> Scaler:
        return cls(
            mean=np.array(obj["mean"], dtype=float),
            std=np.array(obj["std"], dtype=float),
            degenerate=np.array(obj["degenerate"], dtype=bool),
        )


def class_weight_map(y: np.ndarray, cost_sensitive: bool) -> dict[int, float]:
    """w_c = N / (2 * N_c): both classes pull with equal total weight."""
    if not cost_sensitive:
        return {0: 1.0, 1: 1.0}
    n = len(y)
    n_pos = int((y == 1).sum())
    n_neg = n - n_pos
    return {0: n / (2.0 * n_neg), 1: n / (2.0 * n_pos)}


# --- decision trees (shared by DT, RF, GB) ------------------------------------


def _impurity_terms(classification: bool, w, wt, wtt):
    # classification: gini from weighted positive mass; regression: SSE
    if classification:
        frac = wt / w
        return w * (1.0 - frac * frac - (1.0 - frac) * (1.0 - frac))
    return wtt - wt * wt / w


def _best_split(Z, t, sw, feature_ids, min_leaf, classification):
    """(gain, feature, threshold) of the best split, or None.

    Gain is the weighted impurity decrease (gini mass for classification,
    SSE for regression). Ties resolve to the lowest feature index and then
    the lowest threshold, so growth is deterministic.
    """
    n = len(t)
    total_w = sw.sum()
    wt_all = float((sw * t).sum())
    wtt_all = float((sw * t * t).sum())
    parent = _impurity_terms(classification, total_w, wt_all, wtt_all)
    best = None
    for f in feature_ids:
        order = np.argsort(Z[:, f], kind="stable")
        v = Z[order, f]
        w = sw[order]
        wt = w * t[order]
        cuts = np.flatnonzero(v[1:] != v[:-1])
        if len(cuts) == 0:
            continue
        counts = cuts + 1
        ok = (counts >= min_leaf) & (n - counts >= min_leaf)
        cuts = cuts[ok]
        if len(cuts) == 0:
            continue
        cw = np.cumsum(w)[cuts]
        cwt = np.cumsum(wt)[cuts]
        cwtt = np.cumsum(wt * t[order])[cuts]
        rw = total_w - cw
        rwt = wt_all - cwt
        rwtt = wtt_all - cwtt
        child = _impurity_terms(classification, cw, cwt, cwtt) + _impurity_terms(
            classification, rw, rwt, rwtt
        )
        gains = parent - child
        i = int(np.argmax(gains))
        gain = float(gains[i])
        threshold = float((v[cuts[i]] + v[cuts[i] + 1]) / 2.0)
        if best is None or gain > best[0] + 1e-12:
            best = (gain, f, threshold)
    return best


def _leaf(t, sw) -> dict:
    return {"value": float((sw * t).sum() / sw.sum()), "n": int(len(t))}


def _grow_tree(
    Z,
    t,
    sw,
    depth,
    max_depth,
    min_split,
    min_leaf,
    classification,
    rng=None,
    max_features=None,
):
    if (
        (max_depth is not None and depth >= max_depth)
        or len(t) < min_split
        or np.all(t == t[0])
    ):
        return _leaf(t, sw)
    d = Z.shape[1]
    if max_features is not None and max_features < d and rng is not None:
        feature_ids = np.sort(rng.choice(d, size=max_features, replace=False))
    else:
        feature_ids = range(d)
    split = _best_split(Z, t, sw, feature_ids, min_leaf, classification)
    if split is None or split[0] <= 1e-12:
        return _leaf(t, sw)
    gain, f, threshold = split
    left = Z[:, f] <= threshold
    return {
        "feature": int(f),
        "threshold": threshold,
        "gain": gain,
        "left": _grow_tree(
            Z[left], t[left], sw[left], depth + 1, max_depth, min_split, min_leaf,
            classification, rng, max_features,
        ),
        "right": _grow_tree(
            Z[~left], t[~left], sw[~left], depth + 1, max_depth, min_split, min_leaf,
            classification, rng, max_features,
        ),
    }


def _tree_values(node: dict, Z: np.ndarray) -> np.ndarray:
    out = np.empty(len(Z))
    stack = [(node, np.arange(len(Z)))]
    while stack:
        cur, idx = stack.pop()
        if "feature" not in cur:
            out[idx] = cur["value"]
            continue
        left = Z[idx, cur["feature"]] <= cur["threshold"]
        stack.append((cur["left"], idx[left]))
        stack.append((cur["right"], idx[~left]))
    return out


def _leaf_partition(node: dict, Z: np.ndarray):
    """Yield (leaf dict, row indices) pairs covering every row."""
    stack = [(node, np.arange(len(Z)))]
    while stack:
        cur, idx = stack.pop()
        if "feature" not in cur:
            yield cur, idx
            continue
        left = Z[idx, cur["feature"]] <= cur["threshold"]
        stack.append((cur["left"], idx[left]))
        stack.append((cur["right"], idx[~left]))


def _tree_gains(node: dict, acc: np.ndarray) -> None:
    if "feature" in node:
        acc[node["feature"]] += node["gain"]
        _tree_gains(node["left"], acc)
        _tree_gains(node["right"], acc)


# --- fitters -------------------------------------------------------------------


def _fit_logistic(Z, y, sw, hyper, rng):
    max_iter = hyper.get("max_iter", 2000)
    lr = hyper.get("learning_rate", 0.5)
    tol = hyper.get("tol", 1e-7)
    Xb = np.hstack([Z, np.ones((len(Z), 1))])
    w = np.zeros(Xb.shape[1])
    wsum = sw.sum()
    converged = False
    for _ in range(max_iter):
        p = _sigmoid(Xb @ w)
        grad = Xb.T @ (sw * (p - y)) / wsum
        w -= lr * grad
        if float(np.abs(grad).max()) < tol:
            converged = True
            break
    return {"coef": w[:-1].tolist(), "intercept": float(w[-1])}, converged


def _fit_tree(Z, y, sw, hyper, rng):
    tree = _grow_tree(
        Z, y, sw,
        depth=0,
        max_depth=hyper.get("max_depth"),
        min_split=hyper.get("min_samples_split", 2),
        min_leaf=hyper.get("min_samples_leaf", 1),
        classification=True,
    )
    return {"tree": tree}, True


def _fit_forest(Z, y, sw, hyper, rng):
    n_estimators = hyper.get("n_estimators", 50)
    max_depth = hyper.get("max_depth")
    d = Z.shape[1]
    max_features = hyper.get("max_features", max(1, math.ceil(math.sqrt(d))))
    trees = []
    for _ in range(n_estimators):
        boot = rng.integers(0, len(y), size=len(y))
        trees.append(
            _grow_tree(
                Z[boot], y[boot], sw[boot],
                depth=0,
                max_depth=max_depth,
                min_split=hyper.get("min_samples_split", 2),
                min_leaf=hyper.get("min_samples_leaf", 1),
                classification=True,
                rng=rng,
                max_features=max_features,
            )
        )
    return {"trees": trees}, True


def _fit_boosting(Z, y, sw, hyper, rng):
    rounds = hyper.get("rounds", 100)
    lr = hyper.get("learning_rate", 0.1)
    depth = hyper.get("max_depth", 3)
    pos = float((sw * y).sum())
    neg = float(sw.sum()) - pos
    f0 = math.log(pos / neg)
    F = np.full(len(y), f0)
    trees = []
    for _ in range(rounds):
        p = _sigmoid(F)
        residual = y - p
        tree = _grow_tree(
            Z, residual, sw,
            depth=0,
            max_depth=depth,
            min_split=hyper.get("min_samples_split", 2),
            min_leaf=hyper.get("min_samples_leaf", 1),
            classification=False,
        )
        # one Newton step per leaf on the logistic loss
        hess = p * (1.0 - p)
        for leaf, idx in _leaf_partition(tree, Z):
            num = float((sw[idx] * residual[idx]).sum())
            den = float((sw[idx] * hess[idx]).sum())
            leaf["value"] = num / max(den, 1e-12)
        F = F + lr * _tree_values(tree, Z)
        trees.append(tree)
    return {"f0": f0, "learning_rate": lr, "trees": trees}, True


def _fit_bayes(Z, y, sw, hyper, rng):
    smoothing = hyper.get("var_smoothing", 1e-9)
    global_var = float(Z.var(axis=0).max())
    eps = smoothing * max(global_var, 1.0)
    params = {"classes": [0, 1], "priors": [], "mean": [], "var": []}
    wsum = sw.sum()
    for cls in (0, 1):
        mask = y == cls
        w = sw[mask]
        cw = w.sum()
        mean = (w[:, None] * Z[mask]).sum(axis=0) / cw
        var = (w[:, None] * (Z[mask] - mean) ** 2).sum(axis=0) / cw + eps
        params["priors"].append(float(cw / wsum))
        params["mean"].append(mean.tolist())
        params["var"].append(var.tolist())
    return params, True


def _fit_svm(Z, y, sw, hyper, rng):
    max_iter = hyper.get("max_iter", 2000)
    lr = hyper.get("learning_rate", 0.1)
    lam = hyper.get("l2", 1e-3)
    tol = hyper.get("tol", 1e-7)
    t = 2.0 * y - 1.0
    w = np.zeros(Z.shape[1])
    b = 0.0
    wsum = sw.sum()
    converged = False
    for _ in range(max_iter):
        margins = t * (Z @ w + b)
        viol = margins < 1.0
        pull = sw[viol] * t[viol]
        grad_w = lam * w - Z[viol].T @ pull / wsum
        grad_b = -float(pull.sum()) / wsum
        w -= lr * grad_w
        b -= lr * grad_b
        if max(float(np.abs(grad_w).max()), abs(grad_b)) < tol:
            converged = True
            break
    return {"coef": w.tolist(), "intercept": float(b)}, converged


_FITTERS = {
    MODEL_LOGISTIC: _fit_logistic,
    MODEL_TREE: _fit_tree,
    MODEL_FOREST: _fit_forest,
    MODEL_BOOSTING: _fit_boosting,
    MODEL_BAYES: _fit_bayes,
    MODEL_SVM: _fit_svm,
}


# --- scoring ---------------------------------------------------------------------


def _score_logistic(params, Z):
    return _sigmoid(Z @ np.array(params["coef"]) + params["intercept"])


def _score_tree(params, Z):
    return _tree_values(params["tree"], Z)


def _score_forest(params, Z):
    return np.mean([_tree_values(tree, Z) for tree in params["trees"]], axis=0)


def _score_boosting(params, Z):
    F = np.full(len(Z), params["f0"])
    for tree in params["trees"]:
        F = F + params["learning_rate"] * _tree_values(tree, Z)
    return _sigmoid(F)


def _score_bayes(params, Z):
    log_post = np.empty((len(Z), 2))
    for i in range(2):
        mean = np.array(params["mean"][i])
        var = np.array(params["var"][i])
        ll = -0.5 * (np.log(2 * np.pi * var) + (Z - mean) ** 2 / var).sum(axis=1)
        log_post[:, i] = math.log(params["priors"][i]) + ll
    shift = log_post.max(axis=1, keepdims=True)
    post = np.exp(log_post - shift)
    return post[:, 1] / post.sum(axis=1)


def _score_svm(params, Z):
    return _sigmoid(Z @ np.array(params["coef"]) + params["intercept"])


_SCORERS = {
    MODEL_LOGISTIC: _score_logistic,
    MODEL_TREE: _score_tree,
    MODEL_FOREST: _score_forest,
    MODEL_BOOSTING: _score_boosting,
    MODEL_BAYES: _score_bayes,
    MODEL_SVM: _score_svm,
}


# --- training and the fitted wrapper ----------------------------------------------


@dataclass
class TrainedModel:
    kind: str
    scaler: Scaler
    params: dict
    threshold: float
    class_weights: dict[int, float]
    seed: int
    converged: bool
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def scores(self, X: np.ndarray) -> np.ndarray:
        return _SCORERS[self.kind](self.params, self.scaler.transform(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.scores(X) >= self.threshold).astype(int)


def train(
    X: np.ndarray,
    y: np.ndarray,
    kind: str,
    sampler: SamplerSpec = SamplerSpec(),
    cost_sensitive: bool = False,
    seed: int = 0,
    threshold: float = 0.5,
    hyper: dict | None = None,
) -> TrainedModel:
    """Scale, resample the training rows, weight classes, fit.

    The scaler is fit on the raw training rows; the sampler runs on the
    scaled rows; class weights are computed after sampling. Everything is
    a deterministic function of (data, kind, sampler, seed).
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(np.unique(y)) < 2:
        raise DegenerateData("training rows contain a single class")
    scaler = Scaler.fit(X)
    Z, y2 = resample(scaler.transform(X), y, sampler)
    weights = class_weight_map(y2, cost_sensitive)
    sw = np.where(y2 == 1, weights[1], weights[0])
    rng = np.random.default_rng(seed)
    params, converged = _FITTERS[kind](Z, y2, sw, hyper or {}, rng)
    return TrainedModel(
        kind=kind,
        scaler=scaler,
        params=params,
        threshold=threshold,
        class_weights=weights,
        seed=seed,
        converged=converged,
    )


# --- persistence --------------------------------------------------------------------


def model_to_json(model: TrainedModel) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": model.kind,
        "scaler": model.scaler.to_json(),
        "params": model.params,
        "threshold": model.threshold,
        "class_weights": {str(k): v for k, v in model.class_weights.items()},
        "seed": model.seed,
        "converged": model.converged,
        "feature_names": list(model.feature_names),
    }
    return json.dumps(doc, sort_keys=True) + "\n"


def model_from_json(text: str) -> TrainedModel:
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported model schema {doc.get('schema_version')!r}")
    return TrainedModel(
        kind=doc["kind"],
        scaler=Scaler.from_json(doc["scaler"]),
        params=doc["params"],
        threshold=doc["threshold"],
        class_weights={int(k): v for k, v in doc["class_weights"].items()},
        seed=doc["seed"],
        converged=doc["converged"],
        feature_names=tuple(doc["feature_names"]),
    )


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model))


def load_model(path: str | Path) -> TrainedModel:
    return model_from_json(Path(path).read_text())
