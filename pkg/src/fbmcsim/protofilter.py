"""Nyquist prototype filter: frequency coefficients and time-domain taps.

The overlap-4 design is synthesized by frequency sampling from four real
coefficients.  The length KM-1 tap vector is exactly symmetric and, zero
padded to KM, its DFT is nonzero only at the K lowest bins on each side,
which is what gives each subcarrier its narrow, fast-decaying response.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

#: frequency coefficients of the overlap-4 Nyquist design (signed convention)
_K4_COEFFS = (1.0, -0.9719598, 0.7071068, -0.2351470)


@dataclass(frozen=True)
class PrototypeFilter:
    overlap: int
    fft_size: int
    freq_coeffs: tuple
    taps: np.ndarray = field(repr=False)

    @property
    def length(self) -> int:
        return self.taps.size


def design_coeffs(overlap: int) -> np.ndarray:
    """Frequency coefficients h_0..h_{K-1} for the supported overlap factors."""
    if overlap == 4:
        return np.array(_K4_COEFFS)
    if overlap == 1:
        return np.array([1.0])
    raise ValueError(f"unsupported overlap factor {overlap}; only 1 and 4 are defined")


def nyquist_residuals(coeffs) -> tuple[float, float, float]:
    """Residuals of the three zero-ISI design identities for an overlap-4 set."""
    h = np.asarray(coeffs, dtype=float)
    if h.size != 4:
        raise ValueError("residuals are defined for the 4-coefficient design")
    r1 = h[0] + 2.0 * (h[1] + h[2] + h[3])
    r2 = h[1] ** 2 + h[3] ** 2 - 1.0
    r3 = 2.0 * h[2] ** 2 - 1.0
    return float(r1), float(r2), float(r3)


def impulse_response(coeffs, fft_size: int) -> np.ndarray:
    """Time-domain taps of length K*M - 1, peak-normalized to 1.

    taps[i] = h0 + 2 * sum_k h_k cos(2 pi k (i+1) / (K M)); the (i+1) phase
    makes the odd-length filter exactly symmetric.
    """
    if fft_size < 8 or fft_size & (fft_size - 1):
        raise ValueError("fft_size must be a power of two >= 8")
    h = np.asarray(coeffs, dtype=float)
    overlap = h.size
    n = overlap * fft_size
    # evaluate the first half and mirror so the symmetry is exact, not
    # merely within rounding of the cosine arguments
    i = np.arange(n // 2)
    half = np.full(n // 2, h[0])
    for k in range(1, overlap):
        half += 2.0 * h[k] * np.cos(2.0 * np.pi * k * (i + 1) / n)
    taps = np.concatenate([half, half[-2::-1]])
    taps /= taps[n // 2 - 1]
    return taps


@lru_cache(maxsize=None)
def design(overlap: int, fft_size: int) -> PrototypeFilter:
    coeffs = design_coeffs(overlap)
    taps = impulse_response(coeffs, fft_size)
    taps.setflags(write=False)
    return PrototypeFilter(
        overlap=overlap,
        fft_size=fft_size,
        freq_coeffs=tuple(coeffs),
        taps=taps,
    )


def frequency_response(filt: PrototypeFilter, n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Magnitude response on a uniform grid of normalized frequencies [0, 0.5].

    Returns (frequencies, magnitude_db) with 0 dB at DC.
    """
    if n_points < 64:
        raise ValueError("n_points must be >= 64")
    freqs = np.linspace(0.0, 0.5, n_points)
    i = np.arange(filt.length)
    mag = np.abs(np.exp(-2j * np.pi * np.outer(freqs, i)) @ filt.taps)
    db = 20.0 * np.log10(np.maximum(mag / mag[0], 1e-300))
    return freqs, db
