"""Feature extractors: raw magnitude, energy, and Fourier coefficients.

The Fourier extractor works on the acceleration magnitude series, so any
rotation of the sensor frame leaves it unchanged. It keeps the magnitudes
of DFT bins ``1 .. N//2``; the DC bin is dropped and the upper half of the
spectrum is redundant for real input.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dft import dft
from .errors import EmptyInput, MalformedLine
from .records import FeatureSet, WindowRecord

__all__ = [
    "Extractor",
    "FeatureVector",
    "MagnitudeSeries",
    "magnitude",
    "fourier_features",
    "raw_features",
    "energy_features",
    "extract",
    "feature_matrix",
    "feature_set",
    "write_feature_matrix",
    "read_feature_matrix",
]

_NORM_FLOOR = 1e-12


class Extractor(str, enum.Enum):
    RAW = "RAW"
    ENERGY = "ENERGY"
    FOURIER = "FOURIER"

    @classmethod
    def parse(cls, value) -> "Extractor":
        return value if isinstance(value, cls) else cls(str(value).strip().upper())


@dataclass(frozen=True)
class MagnitudeSeries:
    values: np.ndarray
    rate_hz: float


@dataclass(frozen=True)
class FeatureVector:
    extractor: Extractor
    values: np.ndarray
    window_len: int

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)


def _samples(windows) -> np.ndarray:
    """Stack windows (or raw ``(..., N, 3)`` arrays) into one array."""
    if isinstance(windows, WindowRecord):
        return windows.samples
    if isinstance(windows, np.ndarray):
        return windows
    windows = list(windows)
    if not windows:
        raise EmptyInput("no windows given")
    return np.stack([w.samples if isinstance(w, WindowRecord) else np.asarray(w) for w in windows])


def _magnitude(samples: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(samples * samples, axis=-1))


def _fourier(samples: np.ndarray, normalize: bool, per_axis: bool) -> np.ndarray:
    n = samples.shape[-2]
    half = n // 2
    if per_axis:
        spectrum = np.abs(dft(np.swapaxes(samples, -1, -2)))  # (..., 3, N)
        feats = spectrum[..., 1 : half + 1]
        dc = spectrum[..., :1]
        if normalize:
            feats = feats / np.where(dc < _NORM_FLOOR, n, dc)
        return feats.reshape(*feats.shape[:-2], 3 * half)
    spectrum = np.abs(dft(_magnitude(samples)))
    feats = spectrum[..., 1 : half + 1]
    if normalize:
        dc = spectrum[..., :1]
        feats = feats / np.where(dc < _NORM_FLOOR, n, dc)
    return feats


def _energy(samples: np.ndarray) -> np.ndarray:
    axes = np.sum(samples * samples, axis=-2)
    total = np.sum(axes, axis=-1, keepdims=True)
    return np.concatenate([axes, total], axis=-1)


def magnitude(window: WindowRecord) -> MagnitudeSeries:
    return MagnitudeSeries(_magnitude(window.samples), window.rate_hz)


def fourier_features(window: WindowRecord, normalize: bool = False, per_axis: bool = False) -> FeatureVector:
    """Magnitudes of the DFT of the magnitude series, bins 1 to N//2.

    With ``normalize`` every entry is divided by the DC magnitude (or by N
    when the DC term is numerically zero), which makes the vector invariant
    to a positive rescaling of the window. ``per_axis`` computes the same
    spectrum for each axis separately and concatenates them; it is not
    rotation invariant.
    """
    return FeatureVector(Extractor.FOURIER, _fourier(window.samples, normalize, per_axis), window.n)


def raw_features(window: WindowRecord) -> FeatureVector:
    return FeatureVector(Extractor.RAW, _magnitude(window.samples), window.n)


def energy_features(window: WindowRecord) -> FeatureVector:
    # [sum ax^2, sum ay^2, sum az^2, sum |a|^2]
    return FeatureVector(Extractor.ENERGY, _energy(window.samples), window.n)


def extract(window: WindowRecord, extractor, normalize: bool = False, per_axis: bool = False) -> FeatureVector:
    ex = Extractor.parse(extractor)
    if ex is Extractor.FOURIER:
        return fourier_features(window, normalize=normalize, per_axis=per_axis)
    if ex is Extractor.ENERGY:
        return energy_features(window)
    return raw_features(window)


def feature_matrix(windows, extractor, normalize: bool = False, per_axis: bool = False) -> np.ndarray:
    """Vectorised extraction: returns an ``(M, d)`` matrix, one row per window.

    Rows equal the corresponding single-window extractor output.
    """
    samples = _samples(windows)
    if samples.ndim == 2:
        samples = samples[None]
    ex = Extractor.parse(extractor)
    if ex is Extractor.FOURIER:
        return _fourier(samples, normalize, per_axis)
    if ex is Extractor.ENERGY:
        return _energy(samples)
    return _magnitude(samples)


def feature_set(windows: Sequence[WindowRecord], extractor, normalize: bool = False, per_axis: bool = False) -> FeatureSet:
    windows = list(windows)
    lengths = {w.n for w in windows}
    if len(lengths) > 1:
        raise ValueError(f"windows have mixed lengths {sorted(lengths)}")
    X = feature_matrix(windows, extractor, normalize=normalize, per_axis=per_axis)
    return FeatureSet(X, np.array([int(w.label) for w in windows], dtype=np.int8), tuple(w.id for w in windows))


def write_feature_matrix(path, X: np.ndarray, extractor, window_len: int) -> None:
    """Write one feature vector per line, preceded by a ``#`` header line."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    ex = Extractor.parse(extractor)
    with open(path, "w") as fh:
        fh.write(f"# extractor={ex.value} window_len={int(window_len)} dim={X.shape[1]} rows={X.shape[0]}\n")
        for row in X:
            fh.write(" ".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_feature_matrix(path) -> tuple[np.ndarray, Extractor, int]:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise MalformedLine(f"{path}: missing header line")
        meta = dict(tok.split("=", 1) for tok in header[1:].split())
        rows = [[float(v) for v in line.split()] for line in fh if line.strip()]
    X = np.array(rows, dtype=np.float64).reshape(len(rows), int(meta["dim"]))
    return X, Extractor.parse(meta["extractor"]), int(meta["window_len"])
