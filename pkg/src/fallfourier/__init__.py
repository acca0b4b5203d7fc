"""Fall detection from tri-axial accelerometer windows using Fourier-coefficient features."""

from .dft import dft, idft
from .errors import FallFourierError
from .features import (
    Extractor,
    FeatureVector,
    energy_features,
    feature_matrix,
    feature_set,
    fourier_features,
    magnitude,
    raw_features,
)
from .records import FeatureSet, Label, LabeledFeature, RawRecording, Source, WindowRecord

__version__ = "0.1.0"

__all__ = [
    "dft",
    "idft",
    "FallFourierError",
    "Extractor",
    "FeatureVector",
    "energy_features",
    "feature_matrix",
    "feature_set",
    "fourier_features",
    "magnitude",
    "raw_features",
    "FeatureSet",
    "Label",
    "LabeledFeature",
    "RawRecording",
    "Source",
    "WindowRecord",
]
