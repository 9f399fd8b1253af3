"""Prototype filter design tests."""

import numpy as np
import pytest

from fbmcsim import protofilter
from fbmcsim.protofilter import (
    design,
    design_coeffs,
    frequency_response,
    impulse_response,
    nyquist_residuals,
)


def test_overlap4_coefficients():
    h = design_coeffs(4)
    assert np.array_equal(h, [1.0, -0.9719598, 0.7071068, -0.2351470])


def test_overlap1_is_trivial():
    assert np.array_equal(design_coeffs(1), [1.0])
    taps = impulse_response(design_coeffs(1), 16)
    assert taps.size == 15
    assert np.allclose(taps, 1.0)


def test_unsupported_overlap():
    with pytest.raises(ValueError, match="unsupported overlap"):
        design_coeffs(3)


def test_power_identities():
    h = design_coeffs(4)
    assert h[1] ** 2 + h[3] ** 2 == pytest.approx(1.0, abs=1e-6)
    assert 2 * h[2] ** 2 == pytest.approx(1.0, abs=1e-6)


def test_nyquist_residuals_of_design():
    r1, r2, r3 = nyquist_residuals(design_coeffs(4))
    assert abs(r1) < 1e-6 and abs(r2) < 1e-6 and abs(r3) < 1e-6


def test_nyquist_residuals_detect_perturbation():
    h = design_coeffs(4)
    h[2] += 0.1
    _, _, r3 = nyquist_residuals(h)
    assert r3 == pytest.approx(2 * 0.8071068**2 - 1.0, abs=1e-9)


def test_nyquist_residuals_trivial_case():
    assert nyquist_residuals([1.0, 0.0, 0.0, 0.0]) == (1.0, -1.0, -1.0)


@pytest.mark.parametrize("m", [8, 64, 512])
def test_tap_count_and_exact_symmetry(m):
    taps = impulse_response(design_coeffs(4), m)
    assert taps.size == 4 * m - 1
    assert np.array_equal(taps, taps[::-1])


def test_center_tap_normalization():
    m = 64
    h = design_coeffs(4)
    taps = impulse_response(h, m)
    center = 4 * m // 2 - 1
    assert taps[center] == 1.0
    # pre-normalization center value from direct evaluation of the formula
    raw = h[0] + 2 * sum(h[k] * np.cos(np.pi * k) for k in range(1, 4))
    assert raw == pytest.approx(4.8284272, abs=1e-6)


def test_end_taps_near_zero():
    taps = impulse_response(design_coeffs(4), 256)
    assert taps[0] == taps[-1]
    assert abs(taps[0]) < 0.01


def test_frequency_response_dc_and_symmetry():
    filt = design(4, 64)
    freqs, db = frequency_response(filt, 257)
    assert db[0] == pytest.approx(0.0, abs=1e-12)
    # real symmetric taps: magnitude at -f equals +f
    i = np.arange(filt.length)
    for f in (0.01, 0.13, 0.37):
        pos = abs(np.exp(-2j * np.pi * f * i) @ filt.taps)
        neg = abs(np.exp(+2j * np.pi * f * i) @ filt.taps)
        assert pos == pytest.approx(neg, rel=1e-12)


def test_frequency_response_stopband():
    m = 64
    filt = design(4, m)
    freqs, db = frequency_response(filt, m + 1)
    # grid point 2k sits at f = k/M
    for k in range(4, 16):
        assert db[2 * k] < -50.0


def test_frequency_response_rejects_coarse_grid():
    with pytest.raises(ValueError):
        frequency_response(design(4, 64), 32)


@pytest.mark.parametrize("m", [64, 512])
def test_km_dft_matches_frequency_sampling(m):
    filt = design(4, m)
    spec = np.abs(np.fft.fft(filt.taps, 4 * m))
    peak = spec.max()
    h = np.abs(np.array(filt.freq_coeffs))
    ratios = spec[:4] / spec[0]
    assert np.allclose(ratios, h / h[0], atol=1e-6)
    assert spec[5 : 4 * m - 4].max() < 1e-3 * peak
