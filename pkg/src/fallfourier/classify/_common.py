from __future__ import annotations

import enum

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DimensionMismatch, EmptyTrainingSet
from ..records import FeatureSet, LabeledFeature

_CHUNK = 256


class Metric(str, enum.Enum):
    EUCLIDEAN = "EUCLIDEAN"
    MANHATTAN = "MANHATTAN"

    @classmethod
    def parse(cls, value) -> "Metric":
        return value if isinstance(value, cls) else cls(str(value).strip().upper())

    @property
    def scipy_name(self) -> str:
        return "euclidean" if self is Metric.EUCLIDEAN else "cityblock"


def as_feature_set(data) -> FeatureSet:
    """Accept a FeatureSet or any iterable of LabeledFeature."""
    if isinstance(data, FeatureSet):
        return data
    items = list(data)
    if not items:
        raise EmptyTrainingSet("no training data")
    if not all(isinstance(it, LabeledFeature) for it in items):
        raise TypeError("expected a FeatureSet or LabeledFeature items")
    dims = {it.vector.shape for it in items}
    if len(dims) != 1:
        raise DimensionMismatch(f"training vectors have shapes {sorted(dims)}")
    return FeatureSet.from_labeled(items)


def sorted_by_id(fs: FeatureSet) -> FeatureSet:
    order = sorted(range(len(fs)), key=lambda i: fs.ids[i])
    return fs.subset(np.asarray(order, dtype=np.intp))


def query_matrix(x, dim: int) -> tuple[np.ndarray, bool]:
    """Coerce a query (vector, FeatureVector-like, or matrix) to 2-D."""
    x = getattr(x, "values", getattr(x, "vector", x))
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != dim:
        raise DimensionMismatch(f"query has dimension {arr.shape[1]}, model expects {dim}")
    return arr, single


def chunked_distances(Q: np.ndarray, X: np.ndarray, metric: Metric):
    """Yield ``(start, D)`` blocks of the query-to-training distance matrix."""
    for start in range(0, Q.shape[0], _CHUNK):
        yield start, cdist(Q[start : start + _CHUNK], X, metric.scipy_name)
