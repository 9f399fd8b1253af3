"""Multipath (tapped delay line) and AWGN channel models.

Profiles are given as (delay seconds, attenuation dB) pairs, resolved to
integer sample delays at a given rate; taps that round to the same index
are summed coherently.  Gains are normalized to unit total power so the
SNR definition does not depend on the profile.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

#: ITU Brazil-A static terrestrial profile: (delay us, attenuation dB)
BRAZIL_A = (
    (0.0, 0.0),
    (0.15, 13.8),
    (2.2, 16.2),
    (3.05, 14.9),
    (5.86, 13.6),
    (5.93, 16.4),
)


@dataclass(frozen=True)
class ChannelProfile:
    """Raw tap list plus its sample-domain resolution."""

    taps: tuple
    delay_samples: np.ndarray = field(repr=False)
    gains: np.ndarray = field(repr=False)

    @property
    def max_delay(self) -> int:
        return int(self.delay_samples.max(initial=0))


def resolve_profile(taps, sample_rate: float) -> ChannelProfile:
    """Build a unit-power profile from (delay_s, attenuation_db) pairs."""
    taps = tuple((float(d), float(a)) for d, a in taps)
    if not taps:
        return identity_profile()
    delays = np.array([t[0] for t in taps])
    if np.any(delays < 0):
        raise ValueError("tap delays must be non-negative")
    if np.any(np.diff(delays) <= 0):
        raise ValueError("tap delays must be strictly increasing")
    lin = 10.0 ** (-np.array([t[1] for t in taps]) / 20.0)
    idx = np.round(delays * sample_rate).astype(np.int64)
    uniq, inverse = np.unique(idx, return_inverse=True)
    gains = np.zeros(uniq.size, dtype=np.complex128)
    np.add.at(gains, inverse, lin)
    gains /= np.sqrt(np.sum(np.abs(gains) ** 2))
    gains.setflags(write=False)
    uniq.setflags(write=False)
    return ChannelProfile(taps=taps, delay_samples=uniq, gains=gains)


def identity_profile() -> ChannelProfile:
    return ChannelProfile(
        taps=((0.0, 0.0),),
        delay_samples=np.array([0]),
        gains=np.array([1.0 + 0.0j]),
    )


def brazil_a_profile(sample_rate: float) -> ChannelProfile:
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    return resolve_profile([(d * 1e-6, a) for d, a in BRAZIL_A], sample_rate)


def load_profile(path: str, sample_rate: float) -> ChannelProfile:
    """Profile from a JSON file: list of {"delay_us": x, "attenuation_db": y}."""
    with open(path) as fh:
        entries = json.load(fh)
    taps = [(e["delay_us"] * 1e-6, e["attenuation_db"]) for e in entries]
    return resolve_profile(taps, sample_rate)


def apply_multipath(stream: np.ndarray, profile: ChannelProfile) -> np.ndarray:
    """y[n] = sum_taps gain * x[n - delay]; output grows by the max delay."""
    stream = np.asarray(stream, dtype=np.complex128)
    out = np.zeros(stream.size + profile.max_delay, dtype=np.complex128)
    for d, g in zip(profile.delay_samples, profile.gains):
        out[d : d + stream.size] += g * stream
    return out


def apply_awgn(stream: np.ndarray, snr_db: float, rng_seed) -> np.ndarray:
    """Add circular complex Gaussian noise at the given stream-power SNR.

    snr_db is mean |x|^2 over the complex noise variance; +inf returns the
    stream unchanged.  ``rng_seed`` may be an int or a Generator.
    """
    stream = np.asarray(stream, dtype=np.complex128)
    if stream.size == 0:
        raise ValueError("stream must be nonempty")
    if math.isinf(snr_db) and snr_db > 0:
        return stream.copy()
    power = float(np.mean(np.abs(stream) ** 2))
    variance = power / 10.0 ** (snr_db / 10.0)
    return stream + noise_like(stream.size, variance, rng_seed)


def noise_like(n: int, variance: float, rng_seed) -> np.ndarray:
    """Circular complex Gaussian noise of the given per-sample variance."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def true_frequency_response(
    profile: ChannelProfile, fft_size: int, band_offset: int, occupied: int
) -> np.ndarray:
    """Exact channel response at each occupied carrier's absolute FFT bin."""
    k_abs = band_offset + np.arange(occupied)
    phases = np.exp(
        -2j * np.pi * np.outer(k_abs, profile.delay_samples) / fft_size
    )
    return phases @ profile.gains
