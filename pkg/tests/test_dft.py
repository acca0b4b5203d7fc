import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fallfourier.dft import dft, idft, is_power_of_two
from fallfourier.errors import EmptyInput, NonFiniteValue

from oracles import naive_dft, naive_idft, rel_err


def test_constant_sequence_is_dc_only():
    for n in (8, 51, 128):
        c = 0.75
        X = dft(np.full(n, c))
        assert X[0] == pytest.approx(n * c, rel=1e-12)
        assert np.all(np.abs(X[1:]) < 1e-9 * n * abs(c))


def test_single_tone_line_spectrum():
    j = np.arange(16)
    X = dft(np.cos(2 * np.pi * 3 * j / 16))
    mags = np.abs(X)
    assert mags[3] == pytest.approx(8.0, abs=1e-12)
    assert mags[13] == pytest.approx(8.0, abs=1e-12)
    others = np.delete(mags, [3, 13])
    assert np.all(others < 1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 17, 51, 64, 100, 128])
def test_matches_naive_oracle(rng, n):
    x = rng.normal(size=n)
    assert rel_err(dft(x), naive_dft(x)) < 1e-9


def test_length_51_is_not_zero_padded(rng):
    x = rng.normal(size=51)
    X = dft(x)
    assert X.shape == (51,)
    assert rel_err(X, naive_dft(x)) < 1e-9
    padded = naive_dft(np.r_[x, np.zeros(13)])
    assert not np.allclose(np.abs(X[:32]), np.abs(padded[:32]))


def test_batched_rows_match_single(rng):
    x = rng.normal(size=(4, 3, 51))
    X = dft(x)
    for idx in np.ndindex(4, 3):
        np.testing.assert_allclose(X[idx], dft(x[idx]), rtol=0, atol=1e-12)


def test_complex_input_and_inverse(rng):
    x = rng.normal(size=51) + 1j * rng.normal(size=51)
    assert rel_err(dft(x), naive_dft(x)) < 1e-9
    X = naive_dft(x)
    assert rel_err(idft(X), naive_idft(X)) < 1e-9


def test_conjugate_symmetry_for_real_input(rng):
    for n in (8, 51, 128):
        X = dft(rng.normal(size=n))
        j = np.arange(1, n)
        np.testing.assert_allclose(X[n - j], np.conj(X[j]), atol=1e-10)


def test_errors():
    with pytest.raises(EmptyInput):
        dft([])
    with pytest.raises(NonFiniteValue):
        dft([1.0, np.nan])


def test_is_power_of_two():
    assert [n for n in range(1, 20) if is_power_of_two(n)] == [1, 2, 4, 8, 16]


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([8, 51, 128]).flatmap(lambda n: arrays(np.float64, n, elements=finite)))
def test_roundtrip(x):
    back = idft(dft(x))
    scale = max(np.max(np.abs(x)), 1e-300)
    assert np.max(np.abs(back - x)) / scale < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([8, 51, 128]).flatmap(lambda n: arrays(np.float64, n, elements=finite)))
def test_parseval(x):
    X = dft(x)
    energy = np.sum(x * x)
    spectral = np.sum(np.abs(X) ** 2) / len(x)
    assert abs(energy - spectral) <= 1e-9 * max(energy, 1e-300)
