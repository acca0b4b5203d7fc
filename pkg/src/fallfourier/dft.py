"""Exact-length discrete Fourier transform.

Power-of-two lengths use an iterative radix-2 Cooley-Tukey transform.
Every other length is handled by Bluestein's chirp-z algorithm, which
re-expresses the length-N transform as a circular convolution evaluated
with the radix-2 kernel, so N=51 gives the true 51-point DFT rather than a
zero-padded 64-point one.

All functions transform along the last axis and accept batched input.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import EmptyInput, NonFiniteValue

__all__ = ["dft", "idft", "is_power_of_two"]


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@lru_cache(maxsize=32)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=64)
def _twiddles(m: int) -> np.ndarray:
    w = np.exp(-2j * np.pi * np.arange(m // 2) / m)
    w.setflags(write=False)
    return w


def _fft_pow2(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    a = x[..., _bit_reversal(n)].astype(np.complex128, copy=True)
    lead = a.shape[:-1]
    m = 2
    while m <= n:
        blocks = a.reshape(*lead, n // m, m)
        even = blocks[..., : m // 2]
        odd = blocks[..., m // 2 :] * _twiddles(m)
        a = np.concatenate((even + odd, even - odd), axis=-1).reshape(*lead, n)
        m *= 2
    return a


@lru_cache(maxsize=32)
def _bluestein_plan(n: int) -> tuple[np.ndarray, np.ndarray, int]:
    # j^2 mod 2n keeps the chirp phase argument small for large j
    j = np.arange(n)
    chirp = np.exp(-1j * np.pi * ((j * j) % (2 * n)) / n)
    m = 1
    while m < 2 * n - 1:
        m *= 2
    b = np.zeros(m, dtype=np.complex128)
    b[:n] = np.conj(chirp)
    b[m - n + 1 :] = np.conj(chirp[1:][::-1])
    b_hat = _fft_pow2(b)
    chirp.setflags(write=False)
    b_hat.setflags(write=False)
    return chirp, b_hat, m


def _fft_bluestein(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    chirp, b_hat, m = _bluestein_plan(n)
    a = np.zeros(x.shape[:-1] + (m,), dtype=np.complex128)
    a[..., :n] = x * chirp
    conv = _ifft_pow2(_fft_pow2(a) * b_hat)
    return conv[..., :n] * chirp


def _ifft_pow2(x: np.ndarray) -> np.ndarray:
    return np.conj(_fft_pow2(np.conj(x))) / x.shape[-1]


def _check(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim == 0 or arr.shape[-1] == 0:
        raise EmptyInput("transform input must have at least one sample")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue("transform input contains NaN or infinity")
    return arr


def dft(x) -> np.ndarray:
    """Forward DFT, ``X[k] = sum_j x[j] * exp(-2*pi*i*j*k/N)``.

    Parameters
    ----------
    x : array_like, shape (..., N)
        Real or complex samples; the transform runs over the last axis.

    Returns
    -------
    numpy.ndarray of complex128 with the same shape as ``x``.
    """
    arr = _check(x)
    n = arr.shape[-1]
    if n == 1:
        return arr.astype(np.complex128)
    if is_power_of_two(n):
        return _fft_pow2(arr)
    return _fft_bluestein(arr)


def idft(coefficients) -> np.ndarray:
    """Inverse of :func:`dft` (includes the 1/N factor)."""
    arr = _check(coefficients)
    return np.conj(dft(np.conj(arr))) / arr.shape[-1]
