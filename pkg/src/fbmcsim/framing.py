"""Frequency-frame construction: data carriers, PRBS pilots, guard nulls.

The occupied band sits centered in the M FFT rows (extra null on the upper
edge when the guard count is odd).  Within the band, every 9th carrier is
a pilot whose polarity comes from an 11-stage LFSR, boosted to 4/3
amplitude; the remaining occupied carriers hold data in ascending index
order.  The layout is identical in every symbol column.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .params import SystemParams, map_bits, qam_map

ROLE_NULL = 0
ROLE_DATA = 1
ROLE_PILOT = 2

PILOT_AMPLITUDE = 4.0 / 3.0

_LFSR_BITS = 11
_LFSR_PERIOD = 2**_LFSR_BITS - 1


def _lfsr_step(state: int) -> tuple[int, int]:
    """One step of the x^11 + x^9 + 1 Fibonacci LFSR.

    ``state`` packs registers b1..b11 in bits 0..10.  Output is b11;
    feedback b9 XOR b11 shifts into b1.
    """
    out = (state >> 10) & 1
    fb = ((state >> 8) ^ (state >> 10)) & 1
    return out, ((state << 1) | fb) & _LFSR_PERIOD


def prbs_sequence(length: int) -> np.ndarray:
    """First ``length`` LFSR output bits from the all-ones initial state."""
    if length < 1:
        raise ValueError("length must be >= 1")
    state = _LFSR_PERIOD
    bits = np.empty(length, dtype=np.uint8)
    for i in range(length):
        bits[i], state = _lfsr_step(state)
    return bits


def pilot_values(params: SystemParams, count: int | None = None) -> np.ndarray:
    """Pilot amplitudes 4/3 * (1 - 2*w_i), indexed by pilot position."""
    if count is None:
        count = params.pilot_carriers
    w = prbs_sequence(count).astype(np.float64)
    return PILOT_AMPLITUDE * (1.0 - 2.0 * w)


@dataclass
class SymbolGrid:
    """Complex (M, N) frame with a per-row role mask shared by all columns."""

    values: np.ndarray
    roles: np.ndarray
    band_offset: int

    @property
    def n_symbols(self) -> int:
        return self.values.shape[1]


@lru_cache(maxsize=None)
def _layout(fft_size: int, occupied: int, spacing: int):
    """(roles over M rows, band_offset, pilot band-indices, data band-indices)."""
    offset = (fft_size - occupied) // 2
    band = np.arange(occupied)
    pilot_idx = band[band % spacing == 0]
    data_idx = band[band % spacing != 0]
    roles = np.full(fft_size, ROLE_NULL, dtype=np.int8)
    roles[offset + data_idx] = ROLE_DATA
    roles[offset + pilot_idx] = ROLE_PILOT
    roles.setflags(write=False)
    pilot_idx.setflags(write=False)
    data_idx.setflags(write=False)
    return roles, offset, pilot_idx, data_idx


def band_layout(params: SystemParams):
    return _layout(params.fft_size, params.occupied_carriers, params.pilot_spacing)


def build_frame(data: np.ndarray, params: SystemParams) -> SymbolGrid:
    """Place data symbols and pilots into an (M, N) frame."""
    data = np.asarray(data, dtype=np.complex128).ravel()
    if data.size % params.data_carriers != 0:
        raise ValueError(
            f"data length {data.size} is not a multiple of "
            f"{params.data_carriers} data carriers"
        )
    n_sym = data.size // params.data_carriers
    roles, offset, pilot_idx, data_idx = band_layout(params)
    values = np.zeros((params.fft_size, n_sym), dtype=np.complex128)
    if n_sym:
        values[offset + data_idx, :] = data.reshape(n_sym, -1).T
        values[offset + pilot_idx, :] = pilot_values(params)[:, None]
    return SymbolGrid(values=values, roles=np.array(roles), band_offset=offset)


def deframe(grid: SymbolGrid, params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of build_frame: (data sequence, pilot observations (P, N))."""
    roles, offset, pilot_idx, data_idx = band_layout(params)
    if grid.values.shape[0] != params.fft_size or not np.array_equal(grid.roles, roles):
        raise ValueError("grid layout does not match params")
    data = grid.values[offset + data_idx, :].T.ravel()
    pilot_obs = grid.values[offset + pilot_idx, :]
    return data, pilot_obs


def occupied_values(grid_values: np.ndarray, params: SystemParams) -> np.ndarray:
    """Occupied-band rows of a raw (M, N) value matrix."""
    _, offset, _, _ = band_layout(params)
    return grid_values[offset : offset + params.occupied_carriers, :]


def training_frame(params: SystemParams, seed: int) -> tuple[SymbolGrid, np.ndarray]:
    """Four known symbols exciting every occupied carrier.

    Data positions carry seeded pseudo-random QAM symbols; pilot positions
    carry the standard pilots.  On data carriers the four (Re, Im) samples
    are guaranteed to span the plane (in a collinear draw the second sample
    is rotated by 90 degrees, which maps square QAM onto itself), so every
    per-carrier equalizer that will see data gets full two-dimensional
    excitation.  Returns the frame and the (occupied, 4) transmitted values.
    """
    n_train = 4
    rng = np.random.default_rng(seed)
    qmap = qam_map(params.qam_order)
    bits = rng.integers(
        0, 2, size=params.data_carriers * n_train * qmap.bits_per_symbol
    )
    grid = build_frame(map_bits(bits, qmap), params)

    _, offset, _, data_idx = band_layout(params)
    rows = grid.values[offset + data_idx, :]
    cross = rows[:, :1].real * rows.imag - rows[:, :1].imag * rows.real
    collinear = np.all(np.abs(cross) < 1e-9, axis=1)
    rows[collinear, 1] *= 1j
    grid.values[offset + data_idx, :] = rows
    return grid, occupied_values(grid.values, params).copy()


def frame_to_csv_rows(grid: SymbolGrid):
    """Debug dump rows (carrier, role, re, im) for the first symbol column."""
    names = {ROLE_NULL: "null", ROLE_DATA: "data", ROLE_PILOT: "pilot"}
    for k in range(grid.values.shape[0]):
        v = grid.values[k, 0] if grid.n_symbols else 0.0
        yield k, names[int(grid.roles[k])], float(np.real(v)), float(np.imag(v))
