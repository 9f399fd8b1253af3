"""System-level parameters: transmission modes, pilot layout, and QAM maps.

The three full-scale modes share a uniform pilot grid (every 9th occupied
carrier, first and last occupied carriers are pilots) and an overlap factor
of 4.  Toy configurations keep the same grid rules at small FFT sizes so
desk-scale runs exercise the identical code paths.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

PILOT_SPACING = 9
OVERLAP_FACTOR = 4

#: mode -> (fft_size, occupied, data, pilots, symbol_period_s)
_MODE_TABLE = {
    "Mode1": (2048, 1405, 1248, 157, 0.252e-3),
    "Mode2": (4096, 2809, 2496, 313, 0.504e-3),
    "Mode3": (8192, 5617, 4992, 625, 1.008e-3),
}

#: common sample rate of all three modes, ~8.126984 MHz
MODE3_SAMPLE_RATE = 8192 / 1.008e-3


def pilot_count(occupied: int, spacing: int = PILOT_SPACING) -> int:
    """Number of pilots on the uniform grid (indices = 0 mod spacing)."""
    return (occupied - 1) // spacing + 1


@dataclass(frozen=True)
class SystemParams:
    """Immutable configuration of one transmission setup."""

    mode: str
    fft_size: int
    occupied_carriers: int
    data_carriers: int
    pilot_carriers: int
    pilot_spacing: int
    overlap_factor: int
    symbol_period: float
    sample_rate: float
    qam_order: int

    def __post_init__(self):
        if self.occupied_carriers != self.data_carriers + self.pilot_carriers:
            raise ValueError("occupied_carriers must equal data + pilot carriers")
        if self.occupied_carriers > self.fft_size:
            raise ValueError("occupied_carriers exceeds fft_size")
        if self.fft_size & (self.fft_size - 1):
            raise ValueError("fft_size must be a power of two")
        if self.qam_order not in (4, 16, 64):
            raise ValueError(f"unsupported qam_order {self.qam_order}")
        expected = pilot_count(self.occupied_carriers, self.pilot_spacing)
        if self.pilot_carriers != expected:
            raise ValueError(
                f"pilot_carriers {self.pilot_carriers} inconsistent with "
                f"uniform spacing-{self.pilot_spacing} grid ({expected})"
            )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SystemParams":
        return cls(**json.loads(text))


def mode_params(mode: str, qam_order: int = 64) -> SystemParams:
    """Parameters of one of the three full-scale transmission modes."""
    if mode not in _MODE_TABLE:
        raise ValueError(f"unknown mode {mode!r}; expected one of {sorted(_MODE_TABLE)}")
    m, occ, data, pilots, period = _MODE_TABLE[mode]
    return SystemParams(
        mode=mode,
        fft_size=m,
        occupied_carriers=occ,
        data_carriers=data,
        pilot_carriers=pilots,
        pilot_spacing=PILOT_SPACING,
        overlap_factor=OVERLAP_FACTOR,
        symbol_period=period,
        sample_rate=m / period,
        qam_order=qam_order,
    )


def toy_params(
    fft_size: int,
    occupied: int,
    qam_order: int = 4,
    sample_rate: float = MODE3_SAMPLE_RATE,
) -> SystemParams:
    """Desk-scale configuration with the standard pilot grid.

    ``occupied`` must be = 1 mod 9 so the band starts and ends on a pilot.
    The default sample rate is pinned to the full-scale value so channel
    delays resolve to the same tap indices at any FFT size; pass a smaller
    ``sample_rate`` to scale the channel geometry down with the band.
    """
    if fft_size < 16 or fft_size & (fft_size - 1):
        raise ValueError("fft_size must be a power of two >= 16")
    if occupied > fft_size:
        raise ValueError("occupied carriers exceed fft_size")
    if occupied % PILOT_SPACING != 1:
        raise ValueError(
            f"occupied must be = 1 mod {PILOT_SPACING} so the pilot grid "
            f"starts and ends on a pilot (got {occupied})"
        )
    pilots = pilot_count(occupied)
    return SystemParams(
        mode="Toy",
        fft_size=fft_size,
        occupied_carriers=occupied,
        data_carriers=occupied - pilots,
        pilot_carriers=pilots,
        pilot_spacing=PILOT_SPACING,
        overlap_factor=OVERLAP_FACTOR,
        symbol_period=fft_size / sample_rate,
        sample_rate=sample_rate,
        qam_order=qam_order,
    )


@dataclass(frozen=True)
class QamMap:
    """Gray-labelled square QAM constellation with unit average energy.

    ``points[label]`` is the constellation point whose bit pattern is the
    big-endian binary expansion of ``label``; the first half of the bits
    selects the I level, the second half the Q level.
    """

    order: int
    bits_per_symbol: int
    points: np.ndarray


def _gray_levels(bits: int) -> np.ndarray:
    """Per-axis amplitude for each Gray-coded bit pattern, bit value 0 -> positive."""
    n = 1 << bits
    levels = np.empty(n)
    for g in range(n):
        # binary-reflected Gray decode
        b = g
        shift = bits >> 1
        while shift:
            b ^= b >> shift
            shift >>= 1
        levels[g] = (n - 1) - 2 * b
    return levels


@lru_cache(maxsize=None)
def qam_map(order: int) -> QamMap:
    if order not in (4, 16, 64):
        raise ValueError(f"unsupported QAM order {order}")
    bps = int(math.log2(order))
    half = bps // 2
    axis = _gray_levels(half)
    labels = np.arange(order)
    i_idx = labels >> half
    q_idx = labels & ((1 << half) - 1)
    points = axis[i_idx] + 1j * axis[q_idx]
    points = points / math.sqrt(np.mean(np.abs(points) ** 2))
    points.setflags(write=False)
    return QamMap(order=order, bits_per_symbol=bps, points=points)


def map_bits(bits: np.ndarray, qmap: QamMap) -> np.ndarray:
    """Gray-map a bit sequence onto constellation points."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    bps = qmap.bits_per_symbol
    if bits.size % bps != 0:
        raise ValueError(f"bit count {bits.size} not a multiple of {bps}")
    groups = bits.reshape(-1, bps)
    labels = groups @ (1 << np.arange(bps - 1, -1, -1))
    return qmap.points[labels]


def demap_symbols(symbols: np.ndarray, qmap: QamMap) -> np.ndarray:
    """Hard-decide each symbol to the nearest constellation point's bits.

    Distance ties resolve to the lower label because argmin returns the
    first minimum and points are stored in label order.
    """
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    d2 = np.abs(symbols[:, None] - qmap.points[None, :]) ** 2
    labels = d2.argmin(axis=1)
    bps = qmap.bits_per_symbol
    shifts = np.arange(bps - 1, -1, -1)
    return ((labels[:, None] >> shifts) & 1).astype(np.uint8).ravel()
