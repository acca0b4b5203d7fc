import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from fallfourier.features import (
    Extractor,
    energy_features,
    extract,
    feature_matrix,
    feature_set,
    fourier_features,
    magnitude,
    raw_features,
    read_feature_matrix,
    write_feature_matrix,
)
from fallfourier.records import Label

from conftest import make_window
from oracles import naive_dft, sum_of_squares


def test_magnitude_examples():
    w = make_window([[3.0, 4.0, 0.0], [0.0, 0.0, -1.0]])
    np.testing.assert_array_equal(magnitude(w).values, [5.0, 1.0])
    assert magnitude(w).rate_hz == 50.0


def test_magnitude_rotation(window_factory):
    w = window_factory()
    R = Rotation.random(random_state=3).as_matrix()
    rotated = make_window(w.samples @ R.T)
    assert np.max(np.abs(magnitude(rotated).values - magnitude(w).values)) < 1e-12


@pytest.mark.parametrize("n", [51, 128])
def test_fourier_length_and_oracle(window_factory, n):
    w = window_factory(n)
    fv = fourier_features(w)
    assert fv.extractor is Extractor.FOURIER
    assert len(fv) == n // 2
    mag = np.sqrt(np.sum(w.samples**2, axis=1))
    expected = np.abs(naive_dft(mag))[1 : n // 2 + 1]
    np.testing.assert_allclose(fv.values, expected, rtol=1e-9, atol=1e-9)


def test_fourier_shift_and_reversal(window_factory):
    w = window_factory()
    base = fourier_features(w).values
    for s in (1, 5, 64, 127):
        shifted = make_window(np.roll(w.samples, s, axis=0))
        assert np.max(np.abs(fourier_features(shifted).values - base)) < 1e-9
    reversed_ = make_window(w.samples[::-1])
    assert np.max(np.abs(fourier_features(reversed_).values - base)) < 1e-9


def test_fourier_normalize_divides_by_dc(window_factory):
    w = window_factory(51)
    raw = fourier_features(w).values
    mag = np.sqrt(np.sum(w.samples**2, axis=1))
    np.testing.assert_allclose(fourier_features(w, normalize=True).values, raw / mag.sum(), rtol=1e-12)


def test_fourier_normalize_zero_window_falls_back_to_n():
    w = make_window(np.zeros((51, 3)))
    np.testing.assert_array_equal(fourier_features(w, normalize=True).values, np.zeros(25))


def test_per_axis_variant(window_factory):
    w = window_factory(128)
    fv = fourier_features(w, per_axis=True)
    assert len(fv) == 3 * 64
    expected = np.abs(naive_dft(w.samples[:, 1]))[1:65]
    np.testing.assert_allclose(fv.values[64:128], expected, rtol=1e-9, atol=1e-9)


def test_raw_features():
    assert np.all(raw_features(make_window(np.zeros((51, 3)))).values == 0)
    np.testing.assert_array_equal(raw_features(make_window(np.tile([3.0, 4.0, 0.0], (51, 1)))).values, np.full(51, 5.0))


def test_raw_equals_magnitude(window_factory):
    w = window_factory()
    np.testing.assert_array_equal(raw_features(w).values, magnitude(w).values)


def test_energy_features(window_factory):
    assert energy_features(make_window(np.zeros((51, 3)))).values.tolist() == [0, 0, 0, 0]
    assert energy_features(make_window(np.tile([1.0, 0.0, 0.0], (128, 1)))).values.tolist() == [128, 0, 0, 128]
    w = window_factory()
    np.testing.assert_allclose(energy_features(w).values, sum_of_squares(w.samples), rtol=1e-13)


def test_extractors_are_pure(window_factory):
    w = window_factory()
    for ex in Extractor:
        a, b = extract(w, ex), extract(w, ex)
        assert a.values.tobytes() == b.values.tobytes()


def test_feature_matrix_matches_single_window(rng):
    windows = [make_window(rng.normal(size=(51, 3)), id=f"w{i}") for i in range(6)]
    for ex in ("raw", "energy", "fourier"):
        M = feature_matrix(windows, ex)
        for row, w in zip(M, windows):
            np.testing.assert_allclose(row, extract(w, ex).values, rtol=1e-13, atol=1e-12)


def test_feature_set_labels_and_mixed_lengths(rng):
    ws = [make_window(rng.normal(size=(51, 3)), id="a"), make_window(rng.normal(size=(51, 3)), id="b", label=Label.FALL)]
    fs = feature_set(ws, "fourier")
    assert fs.X.shape == (2, 25)
    assert fs.labels.tolist() == [0, 1]
    assert fs.ids == ("a", "b")
    with pytest.raises(ValueError):
        feature_set(ws + [make_window(rng.normal(size=(128, 3)), id="c")], "fourier")


def test_feature_matrix_file_roundtrip(tmp_path, rng):
    X = rng.normal(size=(5, 64))
    path = tmp_path / "f.txt"
    write_feature_matrix(path, X, "fourier", 128)
    assert path.read_text().splitlines()[0].startswith("# extractor=FOURIER window_len=128 dim=64")
    Y, ex, n = read_feature_matrix(path)
    assert ex is Extractor.FOURIER and n == 128
    np.testing.assert_array_equal(X, Y)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), c=st.floats(0.01, 100.0), n=st.sampled_from([51, 128]))
def test_scale_covariance_and_normalized_invariance(seed, c, n):
    w = make_window(np.random.default_rng(seed).normal(size=(n, 3)))
    scaled = make_window(c * w.samples)
    base = fourier_features(w).values
    assert np.max(np.abs(fourier_features(scaled).values - c * base)) <= 1e-9 * max(1.0, c * np.max(base))
    assert np.max(np.abs(fourier_features(scaled, normalize=True).values - fourier_features(w, normalize=True).values)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([51, 128]))
def test_rotation_invariance(seed, n):
    rng = np.random.default_rng(seed)
    w = make_window(rng.normal(size=(n, 3)))
    R = Rotation.random(random_state=rng).as_matrix()
    diff = fourier_features(make_window(w.samples @ R.T)).values - fourier_features(w).values
    assert np.max(np.abs(diff)) < 1e-9
