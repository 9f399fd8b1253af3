"""Offset-QAM staggering tests."""

import numpy as np
import pytest

from fbmcsim import oqam


def test_phase_table_unit_modulus_and_period():
    theta = oqam.phase_table(8, 12)
    assert np.allclose(np.abs(theta), 1.0)
    assert np.allclose(theta[:4, :4], theta[4:8, 4:8])
    assert theta[0, 0] == 1.0 + 0.0j
    assert theta[1, 0] == 1.0j


def test_round_trip_is_exact():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((16, 7)) + 1j * rng.standard_normal((16, 7))
    back = oqam.postprocess(oqam.preprocess(x))
    assert np.array_equal(back, x)


def test_stagger_convention():
    x = np.zeros((4, 1), dtype=complex)
    x[0, 0] = 3 + 4j
    x[1, 0] = 3 + 4j
    halves = oqam.preprocess(x)
    assert halves[0, 0] == 3.0 and halves[0, 1] == 4.0
    assert halves[1, 0] == 4.0 and halves[1, 1] == 3.0


def test_real_input_leaves_imag_halves_zero():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((8, 5)).astype(complex)
    halves = oqam.preprocess(x)
    assert np.array_equal(halves[0::2, 1::2], np.zeros((4, 5)))
    assert np.array_equal(halves[1::2, 0::2], np.zeros((4, 5)))


def test_postprocess_rejects_pure_imaginary_interference():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((16, 6)) + 1j * rng.standard_normal((16, 6))
    halves = oqam.preprocess(x).astype(complex)
    halves += 1j * rng.standard_normal(halves.shape)
    assert np.array_equal(oqam.postprocess(halves), x)


def test_postprocess_needs_even_columns():
    with pytest.raises(ValueError, match="even"):
        oqam.postprocess(np.zeros((4, 5)))


def test_zero_grid_round_trip():
    z = np.zeros((8, 3), dtype=complex)
    assert np.array_equal(oqam.postprocess(oqam.preprocess(z)), z)
