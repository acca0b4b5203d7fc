"""Why Fourier magnitudes: the feature ignores how the phone is held.

Builds one synthetic fall, then rotates, shifts, flips and rescales it
and prints how far the feature vector moves under each change.
"""
import numpy as np
from scipy.spatial.transform import Rotation

from fallfourier import synth
from fallfourier.features import energy_features, fourier_features

rng = np.random.default_rng(0)
fall = synth.synthesize("fall", 2, seed=1)[0]
base = fourier_features(fall).values
print(f"window {fall.id}: {fall.n} samples, {len(base)} Fourier coefficients")

variants = {
    "rotated": fall.samples @ Rotation.random(random_state=1).as_matrix().T,
    "shifted by 40": np.roll(fall.samples, 40, axis=0),
    "time-reversed": fall.samples[::-1],
}
for name, samples in variants.items():
    moved = fourier_features(fall.__class__(fall.id, fall.source, fall.label, fall.rate_hz, samples)).values
    print(f"  {name:14s} max change {np.max(np.abs(moved - base)):.1e}")

# scaling multiplies the raw vector; the normalized one stays put
scaled = fall.__class__(fall.id, fall.source, fall.label, fall.rate_hz, 3.0 * fall.samples)
print(f"  scaled x3      raw ratio {np.median(fourier_features(scaled).values / base):.6f}")
d = fourier_features(scaled, normalize=True).values - fourier_features(fall, normalize=True).values
print(f"                 normalized change {np.max(np.abs(d)):.1e}")

# the per-axis energy vector, by contrast, depends on orientation
rot = fall.__class__(fall.id, fall.source, fall.label, fall.rate_hz, variants["rotated"])
print("energy before rotation", np.round(energy_features(fall).values, 1))
print("energy after rotation ", np.round(energy_features(rot).values, 1))
