"""Synthetic accelerometer windows for dataset-free runs.

Falls follow the classic impact profile: a quiet upright phase, a short
free-fall dip, a single impact spike and a quiet lying phase with gravity
on a different body axis. ADL windows are periodic gait-like oscillations
around 1 g. Each window is rotated by a random sensor orientation.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation

from .records import Label, Source, WindowRecord

PROFILES = ("fall", "adl", "mixed")
RATE_HZ = 50.0


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _rotate(body: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    R = Rotation.random(random_state=rng).as_matrix()
    return body @ R.T


def fall_window(n: int, rng: np.random.Generator, noise: float = 0.02) -> np.ndarray:
    t = np.arange(n)
    impact = int(rng.integers(int(0.35 * n), int(0.65 * n) + 1))
    before = t < impact
    body = np.zeros((n, 3))
    body[before, 2] = 1.0
    body[~before, 1] = 1.0
    # free-fall dip over ~0.3 s before impact
    dip_len = max(2, int(0.3 * RATE_HZ))
    dip = np.clip(1.0 - (impact - t) / dip_len, 0.0, 1.0) * before
    body[:, 2] *= 1.0 - 0.7 * dip
    peak = rng.uniform(2.5, 4.0)
    width = rng.uniform(1.5, 2.5)
    spike = peak * np.exp(-0.5 * ((t - impact) / width) ** 2)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    body += spike[:, None] * direction
    body += rng.normal(scale=noise, size=body.shape)
    return _rotate(body, rng)


def adl_window(n: int, rng: np.random.Generator, noise: float = 0.02) -> np.ndarray:
    t = np.arange(n) / RATE_HZ
    f = rng.uniform(1.2, 2.5)
    amp = rng.uniform(0.1, 0.4)
    phase = rng.uniform(0, 2 * np.pi, size=3)
    body = np.zeros((n, 3))
    body[:, 2] = 1.0 + amp * np.sin(2 * np.pi * f * t + phase[0]) + 0.3 * amp * np.sin(4 * np.pi * f * t + phase[1])
    body[:, 0] = 0.5 * amp * np.sin(2 * np.pi * f * t + phase[2])
    body[:, 1] = 0.3 * amp * np.sin(np.pi * f * t + phase[1])
    body += rng.normal(scale=noise, size=body.shape)
    return _rotate(body, rng)


def synthesize(profile: str = "mixed", count: int = 500, seed: int = 0, n: int = 128, fall_fraction: float = 0.1, noise: float = 0.02) -> list[WindowRecord]:
    """Generate ``count`` labeled windows, deterministic per ``seed``.

    ``profile`` is ``fall`` (falls only), ``adl`` (ADL only) or ``mixed``
    (``round(fall_fraction * count)`` falls, the rest ADL). ADL windows
    alternate between the TFALL and UCIHAR sources so every collection
    policy can draw from them; falls are always TFALL.
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; expected one of {PROFILES}")
    if count < 2:
        raise ValueError("count must be at least 2")
    rng = _rng(seed)
    if profile == "fall":
        n_fall = count
    elif profile == "adl":
        n_fall = 0
    else:
        n_fall = int(round(fall_fraction * count))
    labels = np.array([Label.FALL] * n_fall + [Label.ADL] * (count - n_fall))
    labels = labels[rng.permutation(count)]
    out = []
    adl_seen = 0
    for i, lab in enumerate(labels):
        if lab == Label.FALL:
            samples = fall_window(n, rng, noise)
            source = Source.TFALL
        else:
            samples = adl_window(n, rng, noise)
            source = Source.TFALL if adl_seen % 2 == 0 else Source.UCIHAR
            adl_seen += 1
        out.append(WindowRecord(f"SYNTH/{profile}/{seed}/{i:06d}", source, Label(int(lab)), RATE_HZ, samples))
    return out
