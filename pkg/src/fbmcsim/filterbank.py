"""Polyphase synthesis and analysis filter banks.

The synthesis bank applies the offset-QAM rotation and the causality
multiplier to each half-symbol column, takes a unitary M-point inverse
DFT, and pushes the result through the prototype's polyphase branches at
half-symbol stride (overlap-add).  Because each column feeds one sample
into every branch, the emitted block is simply the inverse-DFT output
repeated through the tap vector, which is what the hot kernels exploit.

The analysis bank is the matched adjoint: windowed fold, unitary forward
DFT, conjugate multiplier and rotation removal, plus compensation of the
known cascade through-gain so a clean back-to-back run has unit gain.

``direct_synthesize`` is the per-subcarrier modulated-FIR reference form,
kept as an independent oracle for the polyphase path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import oqam, protofilter
from ._kernels import fold_windows, synth_accumulate
from .protofilter import PrototypeFilter


def beta_coeffs(fft_size: int, overlap: int) -> np.ndarray:
    """Per-carrier causality multiplier (-1)^k * exp(-j pi k (Lp-1)/M)."""
    if fft_size & (fft_size - 1) or overlap < 1:
        raise ValueError("fft_size must be a power of two and overlap >= 1")
    lp = overlap * fft_size - 1
    k = np.arange(fft_size)
    return (-1.0) ** k * np.exp(-1j * np.pi * k * (lp - 1) / fft_size)


def tmux_gain(filt: PrototypeFilter) -> float:
    """Through-gain of the synthesis->analysis cascade, sum(taps^2)/M."""
    return float(np.sum(filt.taps**2) / filt.fft_size)


def _check_dims(grid, filt: PrototypeFilter, beta: np.ndarray):
    if grid.shape[0] != filt.fft_size or beta.size != filt.fft_size:
        raise ValueError(
            f"dimension mismatch: grid rows {grid.shape[0]}, "
            f"filter M {filt.fft_size}, beta {beta.size}"
        )


def synthesize(grid: np.ndarray, filt: PrototypeFilter, beta: np.ndarray) -> np.ndarray:
    """Modulate an (M, 2N) staggered grid into a complex sample stream.

    Output length is (2N - 1)*M/2 + Lp.
    """
    grid = np.asarray(grid)
    _check_dims(grid, filt, beta)
    m = filt.fft_size
    n_half = grid.shape[1]
    phased = grid * oqam.phase_table(m, n_half) * beta[:, None]
    columns = np.fft.ifft(phased, axis=0) * np.sqrt(m)
    return synth_accumulate(np.ascontiguousarray(columns.T), filt.taps, m // 2)


def direct_synthesize(grid: np.ndarray, filt: PrototypeFilter, beta: np.ndarray) -> np.ndarray:
    """Reference synthesis: per-carrier upsample + modulated-FIR convolution.

    Each carrier's phased half-symbol sequence is upsampled by M/2,
    convolved with taps[i]*exp(2j pi i k / M), scaled by beta_k/sqrt(M),
    and the carriers are summed.  Slow; intended as a test oracle.
    """
    grid = np.asarray(grid)
    _check_dims(grid, filt, beta)
    m = filt.fft_size
    n_half = grid.shape[1]
    lp = filt.length
    stride = m // 2
    phased = grid * oqam.phase_table(m, n_half) * beta[:, None]
    out = np.zeros((n_half - 1) * stride + lp, dtype=np.complex128)
    i = np.arange(lp)
    for k in range(m):
        if not np.any(phased[k]):
            continue
        upsampled = np.zeros((n_half - 1) * stride + 1, dtype=np.complex128)
        upsampled[::stride] = phased[k]
        b_k = filt.taps * np.exp(2j * np.pi * i * k / m)
        out += np.convolve(upsampled, b_k) / np.sqrt(m)
    return out


def analyze(
    stream: np.ndarray,
    filt: PrototypeFilter,
    beta: np.ndarray,
    n_cols: int | None = None,
) -> np.ndarray:
    """Demodulate a sample stream into an (M, n_cols) half-symbol grid.

    Matched-filter receiver; output values are rotation-free, so a clean
    back-to-back run returns the staggered grid plus a purely imaginary
    interference residual.
    """
    stream = np.ascontiguousarray(stream, dtype=np.complex128)
    m = filt.fft_size
    if beta.size != m:
        raise ValueError("beta length must equal the filter's M")
    lp = filt.length
    stride = m // 2
    if stream.size < lp:
        raise ValueError(f"stream too short for one analysis window ({stream.size} < {lp})")
    max_cols = (stream.size - lp) // stride + 1
    if n_cols is None:
        n_cols = max_cols
    elif n_cols > max_cols:
        raise ValueError(f"requested {n_cols} columns, stream supports {max_cols}")
    folded = fold_windows(stream, filt.taps, m, stride, n_cols)
    spectra = np.fft.fft(folded, axis=1) / np.sqrt(m)
    grid = spectra.T * np.conj(beta)[:, None]
    grid *= np.conj(oqam.phase_table(m, n_cols))
    grid /= tmux_gain(filt)
    return grid


@dataclass(frozen=True)
class PipelineDelay:
    half_symbols: int
    residual_samples: int


@lru_cache(maxsize=None)
def pipeline_delay(fft_size: int, overlap: int) -> PipelineDelay:
    """Measured alignment of the synthesize->analyze cascade.

    Batch processing starts analysis windows at sample 0, so the cascade
    realigns at zero half-symbols; the value is still measured by pulse
    propagation (argmax of the cascade response) rather than assumed.
    """
    filt = protofilter.design(overlap, fft_size)
    beta = beta_coeffs(fft_size, overlap)
    n_half = 8 * overlap
    probe_col = n_half // 2
    probe_row = fft_size // 3 + 1
    grid = np.zeros((fft_size, n_half))
    grid[probe_row, probe_col] = 1.0
    stream = synthesize(grid, filt, beta)
    response = analyze(stream, filt, beta)
    col = int(np.argmax(np.abs(response[probe_row])))
    delay_cols = col - probe_col

    # sub-column alignment: scan window offsets around the peak column
    stride = fft_size // 2
    lp = filt.length
    base = col * stride
    best_off, best_mag = 0, -1.0
    for off in range(-stride // 2, stride // 2 + 1):
        start = base + off
        if start < 0 or start + lp > stream.size:
            continue
        window = stream[start : start + lp] * filt.taps
        pad = overlap * fft_size - lp
        z = np.pad(window, (0, pad)).reshape(overlap, fft_size).sum(axis=0)
        mag = abs(np.fft.fft(z)[probe_row])
        if mag > best_mag:
            best_mag, best_off = mag, off
    return PipelineDelay(half_symbols=delay_cols, residual_samples=best_off)
