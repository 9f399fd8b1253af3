"""Offset-QAM staggering: complex symbols <-> real half-rate samples.

Convention (fixed for interoperability, any consistent choice would do):

- stagger: even carriers emit (Re, Im) over the two half-symbols of each
  symbol period, odd carriers emit (Im, Re);
- phase: carrier k at half-symbol m is rotated by j**(k+m).  The rotation
  is applied inside the synthesis bank and removed inside the analysis
  bank, so the staggered grid handled here is purely real and
  ``postprocess(preprocess(x)) == x`` holds exactly.

The real projection in ``postprocess`` is what rejects the intrinsic
imaginary interference of the near-perfect-reconstruction filter bank.
"""

from __future__ import annotations

import numpy as np


def phase_table(fft_size: int, n_half: int) -> np.ndarray:
    """Unit-modulus rotation j**(k+m) for carrier k, half-symbol m."""
    j_pow = 1j ** np.arange(4)
    k = np.arange(fft_size)[:, None]
    m = np.arange(n_half)[None, :]
    return j_pow[(k + m) % 4]


def preprocess(symbols: np.ndarray) -> np.ndarray:
    """Stagger an (M, N) complex grid into an (M, 2N) real grid."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    m_rows, n_cols = symbols.shape
    out = np.empty((m_rows, 2 * n_cols))
    even = np.arange(0, m_rows, 2)
    odd = np.arange(1, m_rows, 2)
    out[even, 0::2] = symbols[even].real
    out[even, 1::2] = symbols[even].imag
    out[odd, 0::2] = symbols[odd].imag
    out[odd, 1::2] = symbols[odd].real
    return out


def postprocess(halves: np.ndarray) -> np.ndarray:
    """Recombine an (M, 2N) grid of received half-symbols into (M, N) symbols.

    Accepts complex input (analysis output); the imaginary part is the
    filter bank's intrinsic interference and is discarded.
    """
    halves = np.asarray(halves)
    m_rows, n_half = halves.shape
    if n_half % 2:
        raise ValueError("half-symbol column count must be even")
    v = halves.real if np.iscomplexobj(halves) else halves
    out = np.empty((m_rows, n_half // 2), dtype=np.complex128)
    even = np.arange(0, m_rows, 2)
    odd = np.arange(1, m_rows, 2)
    out[even] = v[even, 0::2] + 1j * v[even, 1::2]
    out[odd] = v[odd, 1::2] + 1j * v[odd, 0::2]
    return out
