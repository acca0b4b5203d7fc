"""Exact k-nearest-neighbour classifiers: two-class vote and one-class novelty."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import (
    ContainsFall,
    DimensionMismatch,
    EmptyTrainingSet,
    InsufficientData,
    KTooLarge,
    MissingClass,
)
from ..records import FeatureSet, Label
from ._common import Metric, as_feature_set, chunked_distances, query_matrix, sorted_by_id

__all__ = [
    "KnnModel",
    "OneClassKnnModel",
    "ThresholdRule",
    "knn_train",
    "knn_predict",
    "ocknn_train",
    "ocknn_predict",
    "ocknn_score",
    "loo_scores",
    "youden_threshold",
]


def _validate(fs: FeatureSet, k: int) -> None:
    if len(fs) == 0:
        raise EmptyTrainingSet("no training data")
    if not np.all(np.isfinite(fs.X)):
        raise ValueError("training vectors must be finite")
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")


@dataclass(frozen=True)
class KnnModel:
    """Lazy two-class kNN. Training rows are stored sorted by id, so the
    distance tie-break "smaller id first" is a stable sort on row index."""

    X: np.ndarray
    labels: np.ndarray
    ids: tuple
    k: int = 1
    metric: Metric = Metric.EUCLIDEAN

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.X.shape[0]


def knn_train(data, k: int = 1, metric=Metric.EUCLIDEAN) -> KnnModel:
    fs = as_feature_set(data)
    _validate(fs, k)
    if k % 2 == 0:
        raise ValueError("two-class kNN needs an odd k so votes cannot tie")
    if k > len(fs):
        raise KTooLarge(f"k={k} exceeds the {len(fs)} training vectors")
    present = set(np.unique(fs.labels).tolist())
    if present != {Label.ADL, Label.FALL}:
        raise MissingClass(f"two-class kNN needs both labels, got {sorted(Label(l).name for l in present)}")
    fs = sorted_by_id(fs)
    return KnnModel(fs.X, fs.labels, fs.ids, int(k), Metric.parse(metric))


def knn_neighbors(model: KnnModel, x) -> np.ndarray:
    """Row indices of the k nearest training vectors for each query."""
    Q, _ = query_matrix(x, model.dim)
    out = np.empty((Q.shape[0], model.k), dtype=np.intp)
    for start, D in chunked_distances(Q, model.X, model.metric):
        out[start : start + D.shape[0]] = np.argsort(D, axis=1, kind="stable")[:, : model.k]
    return out


def knn_predict(model: KnnModel, x):
    """Majority label among the k nearest neighbours.

    ``x`` may be one vector (returns a :class:`Label`) or an ``(m, d)``
    matrix (returns an int8 label array).
    """
    _, single = query_matrix(x, model.dim)
    nn = knn_neighbors(model, x)
    falls = model.labels[nn].sum(axis=1)
    pred = (2 * falls > model.k).astype(np.int8)
    return Label(int(pred[0])) if single else pred


# ---------------------------------------------------------------------------
# one-class
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdRule:
    kind: str = "percentile"
    p: float = 95.0

    def __post_init__(self):
        if self.kind not in ("percentile", "youden"):
            raise ValueError(f"unknown threshold rule {self.kind!r}")
        if self.kind == "percentile" and not 0 <= self.p <= 100:
            raise ValueError("percentile must lie in [0, 100]")

    @classmethod
    def parse(cls, text) -> "ThresholdRule":
        if isinstance(text, cls):
            return text
        s = str(text).strip().lower()
        if s == "youden":
            return cls("youden")
        if s.startswith("percentile"):
            _, _, p = s.partition(":")
            return cls("percentile", float(p) if p else 95.0)
        raise ValueError(f"cannot parse threshold rule {text!r}")

    def __str__(self):
        return "youden" if self.kind == "youden" else f"percentile:{self.p:g}"


@dataclass(frozen=True)
class OneClassKnnModel:
    X: np.ndarray
    ids: tuple
    k: int
    threshold: float
    rule: ThresholdRule
    metric: Metric = Metric.EUCLIDEAN

    @property
    def dim(self) -> int:
        return self.X.shape[1]


def _mean_k_smallest(D: np.ndarray, k: int) -> np.ndarray:
    return np.partition(D, k - 1, axis=1)[:, :k].mean(axis=1)


def loo_scores(X: np.ndarray, k: int, metric=Metric.EUCLIDEAN) -> np.ndarray:
    """Leave-one-out novelty score of every training row.

    Only the row itself is excluded; exact duplicates of it still count as
    neighbours at distance zero.
    """
    metric = Metric.parse(metric)
    scores = np.empty(X.shape[0])
    for start, D in chunked_distances(X, X, metric):
        rows = np.arange(D.shape[0])
        D[rows, start + rows] = np.inf
        scores[start : start + D.shape[0]] = _mean_k_smallest(D, k)
    return scores


def youden_threshold(scores: np.ndarray, labels: np.ndarray) -> float:
    """Threshold maximising SE + SP - 1 for the rule "FALL iff score > t".

    Candidates are the distinct validation scores; the returned value sits
    halfway to the next larger score. Ties keep the smallest candidate.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    is_fall = labels == Label.FALL
    n_fall, n_adl = is_fall.sum(), (~is_fall).sum()
    if n_fall == 0 or n_adl == 0:
        raise MissingClass("the Youden rule needs ADL and FALL validation scores")
    cand = np.unique(scores)
    # for each candidate t: SE = #fall above t / n_fall, SP = #adl at-or-below t / n_adl
    fall_sorted = np.sort(scores[is_fall])
    adl_sorted = np.sort(scores[~is_fall])
    se = (n_fall - np.searchsorted(fall_sorted, cand, side="right")) / n_fall
    sp = np.searchsorted(adl_sorted, cand, side="right") / n_adl
    best = int(np.argmax(se + sp - 1.0))
    theta = cand[best] if best + 1 == len(cand) else 0.5 * (cand[best] + cand[best + 1])
    return float(theta) if theta > 0 else float(np.nextafter(0.0, 1.0))


def ocknn_train(
    adl,
    k: int = 1,
    rule=ThresholdRule(),
    metric=Metric.EUCLIDEAN,
    validation=None,
) -> OneClassKnnModel:
    """Fit a one-class kNN novelty detector on ADL vectors only.

    The score of a vector is its mean distance to the k nearest training
    vectors. ``percentile:p`` sets the threshold to the p-th percentile of
    the leave-one-out training scores; ``youden`` needs a labeled
    ``validation`` set and maximises SE + SP - 1 on it.
    """
    fs = as_feature_set(adl)
    _validate(fs, k)
    if np.any(fs.labels == Label.FALL):
        raise ContainsFall("one-class training data must be ADL only")
    if len(fs) < k + 1:
        raise InsufficientData(f"need at least k+1={k + 1} ADL vectors, got {len(fs)}")
    rule = ThresholdRule.parse(rule)
    metric = Metric.parse(metric)
    fs = sorted_by_id(fs)
    if rule.kind == "percentile":
        theta = float(np.percentile(loo_scores(fs.X, k, metric), rule.p))
    else:
        if validation is None:
            raise InsufficientData("the Youden rule needs a labeled validation set")
        val = as_feature_set(validation)
        if val.X.shape[1] != fs.X.shape[1]:
            raise DimensionMismatch("validation vectors differ in dimension from training vectors")
        partial = OneClassKnnModel(fs.X, fs.ids, int(k), 1.0, rule, metric)
        theta = youden_threshold(ocknn_score(partial, val.X), val.labels)
    if not theta > 0:
        # all LOO distances zero (duplicate-only training set)
        theta = float(np.nextafter(0.0, 1.0))
    return OneClassKnnModel(fs.X, fs.ids, int(k), theta, rule, metric)


def ocknn_score(model: OneClassKnnModel, x) -> np.ndarray:
    Q, single = query_matrix(x, model.dim)
    scores = np.empty(Q.shape[0])
    for start, D in chunked_distances(Q, model.X, model.metric):
        scores[start : start + D.shape[0]] = _mean_k_smallest(D, model.k)
    return scores[0] if single else scores


def ocknn_predict(model: OneClassKnnModel, x):
    """FALL iff the novelty score strictly exceeds the threshold."""
    _, single = query_matrix(x, model.dim)
    pred = (np.atleast_1d(ocknn_score(model, x)) > model.threshold).astype(np.int8)
    return Label(int(pred[0])) if single else pred
