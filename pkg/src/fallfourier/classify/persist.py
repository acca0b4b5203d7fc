"""Save/load trained models as versioned JSON text."""

from __future__ import annotations

import json

import numpy as np

from ..errors import MalformedLine
from ._common import Metric
from .knn import KnnModel, OneClassKnnModel, ThresholdRule
from .svm import KernelKind, SvmKind, SvmModel

MODEL_FORMAT_VERSION = 1


def model_to_dict(model) -> dict:
    if isinstance(model, KnnModel):
        return {
            "kind": "knn2",
            "k": model.k,
            "metric": model.metric.value,
            "ids": list(model.ids),
            "labels": model.labels.tolist(),
            "X": model.X.tolist(),
        }
    if isinstance(model, OneClassKnnModel):
        return {
            "kind": "knn1",
            "k": model.k,
            "metric": model.metric.value,
            "threshold": model.threshold,
            "rule": str(model.rule),
            "ids": list(model.ids),
            "X": model.X.tolist(),
        }
    if isinstance(model, SvmModel):
        return {
            "kind": "svm2" if model.kind is SvmKind.TWO_CLASS else "svm1",
            "kernel": model.kernel.value,
            "gamma": model.gamma,
            "C": model.C,
            "nu": model.nu,
            "rho": model.rho,
            "iterations": model.iterations,
            "gap": model.gap,
            "coef": model.coef.tolist(),
            "support_vectors": model.support_vectors.tolist(),
        }
    raise TypeError(f"cannot serialise {type(model).__name__}")


def model_from_dict(d: dict):
    kind = d["kind"]
    if kind == "knn2":
        X = np.array(d["X"], dtype=np.float64)
        return KnnModel(X, np.array(d["labels"], dtype=np.int8), tuple(d["ids"]), int(d["k"]), Metric(d["metric"]))
    if kind == "knn1":
        return OneClassKnnModel(
            np.array(d["X"], dtype=np.float64),
            tuple(d["ids"]),
            int(d["k"]),
            float(d["threshold"]),
            ThresholdRule.parse(d["rule"]),
            Metric(d["metric"]),
        )
    if kind in ("svm1", "svm2"):
        return SvmModel(
            kind=SvmKind.TWO_CLASS if kind == "svm2" else SvmKind.ONE_CLASS,
            kernel=KernelKind(d["kernel"]),
            gamma=float(d["gamma"]),
            C=float(d["C"]),
            nu=float(d["nu"]),
            support_vectors=np.array(d["support_vectors"], dtype=np.float64).reshape(len(d["coef"]), -1),
            coef=np.array(d["coef"], dtype=np.float64),
            rho=float(d["rho"]),
            iterations=int(d["iterations"]),
            gap=float(d["gap"]),
        )
    raise MalformedLine(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    doc = {"format_version": MODEL_FORMAT_VERSION, **model_to_dict(model)}
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise MalformedLine(f"{path}: unsupported model format_version {version!r}")
    return model_from_dict(doc)
