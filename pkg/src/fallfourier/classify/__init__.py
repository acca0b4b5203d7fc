"""Two-class and one-class kNN and SVM classifiers over feature vectors."""

from ._common import Metric, as_feature_set
from .knn import (
    KnnModel,
    OneClassKnnModel,
    ThresholdRule,
    knn_neighbors,
    knn_predict,
    knn_train,
    loo_scores,
    ocknn_predict,
    ocknn_score,
    ocknn_train,
    youden_threshold,
)
from .persist import load_model, model_from_dict, model_to_dict, save_model
from .pipelines import ClassifierKind, Pipeline, Standardizer, make_pipeline
from .svm import KernelKind, SvmKind, SvmModel, svm_decision, svm_predict, svm_train

__all__ = [
    "Metric",
    "as_feature_set",
    "KnnModel",
    "OneClassKnnModel",
    "ThresholdRule",
    "knn_neighbors",
    "knn_predict",
    "knn_train",
    "loo_scores",
    "ocknn_predict",
    "ocknn_score",
    "ocknn_train",
    "youden_threshold",
    "load_model",
    "save_model",
    "model_from_dict",
    "model_to_dict",
    "ClassifierKind",
    "Pipeline",
    "Standardizer",
    "make_pipeline",
    "KernelKind",
    "SvmKind",
    "SvmModel",
    "svm_decision",
    "svm_predict",
    "svm_train",
]
