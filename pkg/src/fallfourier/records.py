"""Core record types shared by every stage of the pipeline."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteValue

WINDOW_LENGTHS = (51, 128)


class Label(enum.IntEnum):
    """Binary activity label. FALL is the positive class everywhere."""

    ADL = 0
    FALL = 1

    @classmethod
    def parse(cls, value) -> "Label":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            return cls[value.strip().upper()]
        return cls(int(value))


class Source(str, enum.Enum):
    TFALL = "TFALL"
    UCIHAR = "UCIHAR"


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RawRecording:
    """One variable-length accelerometer recording from the tFall archive.

    ``samples`` is an ``(M, 4)`` array of ``(t [s], ax, ay, az [g])`` rows.
    """

    subject_id: str
    activity_tag: str
    nominal_rate_hz: float
    samples: np.ndarray
    source: Source = Source.TFALL
    label: Label = Label.ADL
    path: str = ""
    malformed_lines: int = 0

    def __post_init__(self):
        s = _frozen_array(self.samples)
        if s.ndim != 2 or s.shape[1] != 4:
            raise ValueError(f"samples must have shape (M, 4), got {s.shape}")
        if s.shape[0] < 2:
            raise ValueError("a recording needs at least two samples")
        if not np.all(np.isfinite(s)):
            raise NonFiniteValue(f"recording {self.path or self.activity_tag} has non-finite samples")
        if not np.all(np.diff(s[:, 0]) > 0):
            raise ValueError("timestamps must be strictly increasing")
        if not self.nominal_rate_hz > 0:
            raise ValueError("nominal_rate_hz must be positive")
        object.__setattr__(self, "samples", s)

    @property
    def duration(self) -> float:
        return float(self.samples[-1, 0] - self.samples[0, 0])


@dataclass(frozen=True)
class WindowRecord:
    """Fixed-length tri-axial window; ``samples`` has shape ``(N, 3)`` in g."""

    id: str
    source: Source
    label: Label
    rate_hz: float
    samples: np.ndarray
    padded: bool = False

    def __post_init__(self):
        object.__setattr__(self, "source", Source(self.source))
        object.__setattr__(self, "label", Label.parse(self.label))
        s = _frozen_array(self.samples)
        if s.ndim != 2 or s.shape[1] != 3:
            raise ValueError(f"window samples must have shape (N, 3), got {s.shape}")
        if s.shape[0] < 1:
            raise ValueError("window must contain samples")
        if not np.all(np.isfinite(s)):
            raise NonFiniteValue(f"window {self.id} has non-finite samples")
        if self.label is Label.FALL and self.source is not Source.TFALL:
            raise ValueError(f"window {self.id}: FALL windows must come from TFALL")
        if not (self.rate_hz > 0 and math.isfinite(self.rate_hz)):
            raise ValueError("rate_hz must be positive")
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "source": self.source.value,
            "label": self.label.name,
            "rate_hz": self.rate_hz,
            "padded": self.padded,
            "samples": self.samples.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WindowRecord":
        return cls(
            id=d["id"],
            source=Source(d["source"]),
            label=Label.parse(d["label"]),
            rate_hz=float(d["rate_hz"]),
            samples=d["samples"],
            padded=bool(d.get("padded", False)),
        )


@dataclass(frozen=True)
class LabeledFeature:
    vector: np.ndarray
    label: Label
    id: str

    def __post_init__(self):
        object.__setattr__(self, "vector", _frozen_array(self.vector))
        object.__setattr__(self, "label", Label.parse(self.label))
        if not np.all(np.isfinite(self.vector)):
            raise NonFiniteValue(f"feature {self.id} is not finite")


@dataclass(frozen=True)
class FeatureSet:
    """Column-stacked labeled features: ``X`` is ``(n, d)``."""

    X: np.ndarray
    labels: np.ndarray
    ids: tuple = field(default=())

    def __post_init__(self):
        X = _frozen_array(self.X)
        if X.ndim != 2:
            raise ValueError("X must be two-dimensional")
        labels = _frozen_array(self.labels, dtype=np.int8)
        if labels.shape != (X.shape[0],):
            raise ValueError("labels must have one entry per row of X")
        ids = tuple(self.ids) if self.ids else tuple(f"#{i:06d}" for i in range(len(labels)))
        if len(ids) != len(labels):
            raise ValueError("ids must have one entry per row of X")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", ids)

    def __len__(self) -> int:
        return self.X.shape[0]

    def subset(self, index) -> "FeatureSet":
        index = np.asarray(index)
        if index.dtype == bool:
            index = np.flatnonzero(index)
        return FeatureSet(self.X[index], self.labels[index], tuple(self.ids[i] for i in index))

    @classmethod
    def from_labeled(cls, items) -> "FeatureSet":
        items = list(items)
        if not items:
            return cls(np.zeros((0, 0)), np.zeros(0, dtype=np.int8), ())
        return cls(
            np.stack([np.asarray(it.vector) for it in items]),
            np.array([int(it.label) for it in items], dtype=np.int8),
            tuple(it.id for it in items),
        )

    def to_labeled(self) -> list[LabeledFeature]:
        return [LabeledFeature(x, Label(int(l)), i) for x, l, i in zip(self.X, self.labels, self.ids)]
