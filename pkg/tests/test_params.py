"""System parameter and QAM map tests."""

import json

import numpy as np
import pytest

from fbmcsim import params
from fbmcsim.params import (
    SystemParams,
    demap_symbols,
    map_bits,
    mode_params,
    qam_map,
    toy_params,
)


def uniform_pilot_count(occupied, spacing=9):
    """Counting oracle: indices below `occupied` that are = 0 mod spacing."""
    return sum(1 for k in range(occupied) if k % spacing == 0)


@pytest.mark.parametrize(
    "mode,m,occ,data,pilots,period",
    [
        ("Mode1", 2048, 1405, 1248, 157, 0.252e-3),
        ("Mode2", 4096, 2809, 2496, 313, 0.504e-3),
        ("Mode3", 8192, 5617, 4992, 625, 1.008e-3),
    ],
)
def test_mode_table(mode, m, occ, data, pilots, period):
    p = mode_params(mode)
    assert (p.fft_size, p.occupied_carriers, p.data_carriers, p.pilot_carriers) == (
        m,
        occ,
        data,
        pilots,
    )
    assert p.symbol_period == period
    assert p.sample_rate == m / period
    assert p.pilot_spacing == 9 and p.overlap_factor == 4


@pytest.mark.parametrize("mode", ["Mode1", "Mode2", "Mode3"])
def test_pilot_grid_reproduces_mode_counts(mode):
    p = mode_params(mode)
    assert uniform_pilot_count(p.occupied_carriers) == p.pilot_carriers
    assert p.occupied_carriers - p.pilot_carriers == p.data_carriers


def test_all_modes_share_sample_rate():
    rates = {mode_params(m).sample_rate for m in ("Mode1", "Mode2", "Mode3")}
    assert len(rates) == 1
    assert rates.pop() == pytest.approx(8.126984e6, rel=1e-6)


def test_unknown_mode_rejected():
    with pytest.raises(ValueError, match="unknown mode"):
        mode_params("Mode4")


@pytest.mark.parametrize(
    "m,occ,pilots,data", [(128, 91, 11, 80), (64, 55, 7, 48)]
)
def test_toy_params_counts(m, occ, pilots, data):
    p = toy_params(m, occ)
    assert p.pilot_carriers == pilots == uniform_pilot_count(occ)
    assert p.data_carriers == data
    assert p.sample_rate == params.MODE3_SAMPLE_RATE
    assert p.fft_size / p.symbol_period == pytest.approx(p.sample_rate)


def test_toy_occupied_must_end_on_pilot():
    with pytest.raises(ValueError, match="mod 9"):
        toy_params(64, 56)


def test_toy_rejects_bad_fft_size():
    with pytest.raises(ValueError):
        toy_params(48, 37)
    with pytest.raises(ValueError):
        toy_params(8, 1)


def test_system_params_invariant_enforced():
    with pytest.raises(ValueError):
        SystemParams(
            mode="Toy",
            fft_size=64,
            occupied_carriers=55,
            data_carriers=50,
            pilot_carriers=7,
            pilot_spacing=9,
            overlap_factor=4,
            symbol_period=1e-3,
            sample_rate=64e3,
            qam_order=4,
        )


def test_json_round_trip():
    p = toy_params(128, 91, qam_order=16)
    q = SystemParams.from_json(p.to_json())
    assert q == p
    keys = set(json.loads(p.to_json()))
    assert keys == {
        "mode",
        "fft_size",
        "occupied_carriers",
        "data_carriers",
        "pilot_carriers",
        "pilot_spacing",
        "overlap_factor",
        "symbol_period",
        "sample_rate",
        "qam_order",
    }


@pytest.mark.parametrize("order", [4, 16, 64])
def test_constellation_unit_energy(order):
    qmap = qam_map(order)
    assert len(qmap.points) == order
    assert len(set(np.round(qmap.points, 12))) == order
    assert np.mean(np.abs(qmap.points) ** 2) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("order", [4, 16, 64])
def test_gray_neighbors_differ_in_one_bit(order):
    qmap = qam_map(order)
    pts = qmap.points
    side = int(np.sqrt(order))
    spacing = 2.0 / np.sqrt(2 * (side**2 - 1) / 3)
    for a in range(order):
        for b in range(order):
            d = pts[a] - pts[b]
            if abs(d) == pytest.approx(spacing, rel=1e-9):
                assert bin(a ^ b).count("1") == 1


def test_qpsk_anchor_points():
    qmap = qam_map(4)
    assert map_bits([0, 0], qmap)[0] == pytest.approx((1 + 1j) / np.sqrt(2))
    all_pts = map_bits([0, 0, 0, 1, 1, 0, 1, 1], qmap)
    assert len(set(np.round(all_pts, 12))) == 4
    assert np.allclose(np.abs(all_pts), 1.0)


@pytest.mark.parametrize("order", [4, 16, 64])
def test_map_demap_round_trip_exhaustive(order):
    qmap = qam_map(order)
    bps = qmap.bits_per_symbol
    labels = np.arange(order)
    bits = ((labels[:, None] >> np.arange(bps - 1, -1, -1)) & 1).ravel()
    assert np.array_equal(demap_symbols(map_bits(bits, qmap), qmap), bits)


def test_demap_nearest_neighbor():
    qmap = qam_map(4)
    bits = demap_symbols(np.array([0.9 + 0.8j]), qmap)
    assert np.array_equal(bits, demap_symbols(np.array([(1 + 1j) / np.sqrt(2)]), qmap))


def test_demap_tie_breaks_to_lower_label():
    qmap = qam_map(4)
    # the origin is equidistant from all four points
    bits = demap_symbols(np.array([0.0 + 0.0j]), qmap)
    assert np.array_equal(bits, [0, 0])


def test_map_bits_length_mismatch():
    with pytest.raises(ValueError, match="multiple"):
        map_bits([0, 1, 0], qam_map(4))


def test_noisy_demap_ber_vanishes_with_noise():
    rng = np.random.default_rng(0)
    qmap = qam_map(4)
    bits = rng.integers(0, 2, 4000)
    syms = map_bits(bits, qmap)
    noisy = syms + 1e-3 * (rng.standard_normal(syms.size) + 1j * rng.standard_normal(syms.size))
    assert np.array_equal(demap_symbols(noisy, qmap), bits)
