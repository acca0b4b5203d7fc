"""Train/predict bundles consumed by cross-validation and the CLI."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..records import FeatureSet, Label
from ._common import Metric
from .knn import ThresholdRule, knn_predict, knn_train, ocknn_predict, ocknn_train
from .svm import KernelKind, SvmKind, svm_predict, svm_train

__all__ = ["ClassifierKind", "Pipeline", "make_pipeline", "Standardizer"]


class ClassifierKind(str, enum.Enum):
    KNN2 = "knn2"
    KNN1 = "knn1"
    SVM2 = "svm2"
    SVM1 = "svm1"

    @classmethod
    def parse(cls, value) -> "ClassifierKind":
        return value if isinstance(value, cls) else cls(str(value).strip().lower())

    @property
    def one_class(self) -> bool:
        return self in (ClassifierKind.KNN1, ClassifierKind.SVM1)


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        sd = X.std(axis=0)
        return cls(X.mean(axis=0), np.where(sd > 0, sd, 1.0))

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale


@dataclass(frozen=True)
class Pipeline:
    """``train(FeatureSet) -> model`` and ``predict(model, X) -> int8 labels``.

    For one-class pipelines ``train`` still receives the full training part;
    it fits on the ADL rows only (FALL rows, if used at all, only pick the
    threshold of the Youden rule).
    """

    kind: ClassifierKind
    train: Callable[[FeatureSet], Any]
    predict: Callable[[Any, np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)

    @property
    def one_class(self) -> bool:
        return self.kind.one_class


def _split_for_youden(fs: FeatureSet, seed: int, holdout: float = 0.2):
    """Hold out a slice of ADL plus every FALL row for threshold selection."""
    adl = np.flatnonzero(fs.labels == Label.ADL)
    fall = np.flatnonzero(fs.labels == Label.FALL)
    rng = np.random.Generator(np.random.PCG64(seed))
    adl = rng.permutation(adl)
    n_val = max(1, int(round(holdout * len(adl))))
    return fs.subset(np.sort(adl[n_val:])), fs.subset(np.sort(np.r_[adl[:n_val], fall]))


def make_pipeline(
    kind,
    k: int = 1,
    metric: str = "EUCLIDEAN",
    threshold_rule="percentile:95",
    standardize: bool = False,
    kernel: str = "RBF",
    C: float = 1.0,
    nu: float = 0.1,
    gamma: float | None = None,
    seed: int = 0,
) -> Pipeline:
    kind = ClassifierKind.parse(kind)
    rule = ThresholdRule.parse(threshold_rule)

    def fit_core(fs: FeatureSet):
        if kind is ClassifierKind.KNN2:
            return knn_train(fs, k=k, metric=metric)
        if kind is ClassifierKind.SVM2:
            return svm_train(fs, SvmKind.TWO_CLASS, KernelKind(kernel), C=C, gamma=gamma)
        adl = fs.subset(fs.labels == Label.ADL)
        if kind is ClassifierKind.SVM1:
            return svm_train(adl, SvmKind.ONE_CLASS, KernelKind(kernel), nu=nu, gamma=gamma)
        if rule.kind == "youden":
            fit_part, val = _split_for_youden(fs, seed)
            return ocknn_train(fit_part, k=k, rule=rule, metric=metric, validation=val)
        return ocknn_train(adl, k=k, rule=rule, metric=metric)

    def train(fs: FeatureSet):
        scaler = None
        if standardize:
            basis = fs.X[fs.labels == Label.ADL] if kind.one_class else fs.X
            scaler = Standardizer.fit(basis)
            fs = FeatureSet(scaler(fs.X), fs.labels, fs.ids)
        return scaler, fit_core(fs)

    def predict(model, X):
        scaler, core = model
        X = np.atleast_2d(X)
        if scaler is not None:
            X = scaler(X)
        if kind is ClassifierKind.KNN2:
            return knn_predict(core, X)
        if kind is ClassifierKind.KNN1:
            return ocknn_predict(core, X)
        return svm_predict(core, X)

    params = {"k": k, "metric": Metric.parse(metric).value, "threshold_rule": str(rule), "standardize": standardize}
    if kind in (ClassifierKind.SVM1, ClassifierKind.SVM2):
        params = {"kernel": kernel, "C": C, "nu": nu, "gamma": gamma, "standardize": standardize}
    return Pipeline(kind, train, predict, params)
