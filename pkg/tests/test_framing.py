"""Frame construction and PRBS tests."""

import numpy as np
import pytest

from fbmcsim import framing
from fbmcsim.framing import (
    ROLE_DATA,
    ROLE_NULL,
    ROLE_PILOT,
    SymbolGrid,
    build_frame,
    deframe,
    pilot_values,
    prbs_sequence,
    training_frame,
)
from fbmcsim.params import map_bits, mode_params, qam_map, toy_params


def reference_lfsr(length):
    """Independent bit-list LFSR oracle for x^11 + x^9 + 1."""
    regs = [1] * 11  # regs[0] is b1
    out = []
    for _ in range(length):
        out.append(regs[10])
        fb = regs[8] ^ regs[10]
        regs = [fb] + regs[:10]
    return np.array(out, dtype=np.uint8)


class TestPrbs:
    def test_first_twelve_bits(self):
        assert prbs_sequence(12).tolist() == [1] * 11 + [0]

    def test_matches_reference_oracle(self):
        assert np.array_equal(prbs_sequence(500), reference_lfsr(500))

    def test_period_is_2047(self):
        bits = prbs_sequence(2 * 2047 + 5)
        assert np.array_equal(bits[:2047], bits[2047 : 2 * 2047])
        assert np.array_equal(bits[: 2047 + 5], bits[2047 : 2 * 2047 + 5])

    def test_state_cycle_has_2047_distinct_states(self):
        state = framing._LFSR_PERIOD
        seen = set()
        while state not in seen:
            seen.add(state)
            _, state = framing._lfsr_step(state)
        assert len(seen) == 2047

    def test_length_validation(self):
        with pytest.raises(ValueError):
            prbs_sequence(0)


class TestPilotValues:
    def test_polarity_mapping(self):
        p = toy_params(128, 91)
        vals = pilot_values(p)
        w = prbs_sequence(p.pilot_carriers)
        assert np.array_equal(vals, 4.0 / 3.0 * (1.0 - 2.0 * w.astype(float)))

    def test_first_values_from_all_ones_state(self):
        vals = pilot_values(mode_params("Mode3"))
        assert np.allclose(vals[:11], -4.0 / 3.0)
        assert vals[11] == pytest.approx(4.0 / 3.0)

    def test_boosted_power(self):
        vals = pilot_values(mode_params("Mode1"))
        assert np.mean(vals**2) == pytest.approx(16.0 / 9.0)


class TestBuildFrame:
    def test_mode3_counts(self):
        p = mode_params("Mode3", qam_order=4)
        data = map_bits(np.zeros(p.data_carriers * 2, dtype=int), qam_map(4))
        grid = build_frame(data, p)
        counts = {r: int(np.sum(grid.roles == r)) for r in (ROLE_NULL, ROLE_DATA, ROLE_PILOT)}
        assert counts == {ROLE_NULL: 8192 - 5617, ROLE_DATA: 4992, ROLE_PILOT: 625}
        assert np.all(grid.values[grid.roles == ROLE_NULL] == 0)

    def test_guard_split_toy(self):
        p = toy_params(128, 91)
        grid = build_frame(np.ones(p.data_carriers, dtype=complex), p)
        occupied = np.flatnonzero(grid.roles != ROLE_NULL)
        assert occupied[0] == 18 and occupied[-1] == 128 - 19 - 1
        assert grid.band_offset == 18

    def test_empty_frame(self):
        p = toy_params(64, 55)
        grid = build_frame(np.array([], dtype=complex), p)
        assert grid.values.shape == (64, 0)

    def test_wrong_length_rejected(self):
        p = toy_params(64, 55)
        with pytest.raises(ValueError, match="multiple"):
            build_frame(np.ones(p.data_carriers + 1, dtype=complex), p)

    def test_pilot_rows_carry_prbs_values(self):
        p = toy_params(128, 91)
        grid = build_frame(np.ones(p.data_carriers * 3, dtype=complex), p)
        pilot_rows = grid.values[grid.roles == ROLE_PILOT]
        assert set(np.unique(pilot_rows.real)) <= {-4.0 / 3.0, 4.0 / 3.0}
        assert np.all(pilot_rows.imag == 0)
        assert np.array_equal(pilot_rows[:, 0], pilot_values(p))


class TestDeframe:
    def test_round_trip(self):
        p = toy_params(128, 91, qam_order=16)
        rng = np.random.default_rng(1)
        data = rng.standard_normal(p.data_carriers * 4) + 1j * rng.standard_normal(
            p.data_carriers * 4
        )
        grid = build_frame(data, p)
        out, pilot_obs = deframe(grid, p)
        assert np.array_equal(out, data)
        assert np.array_equal(pilot_obs, np.tile(pilot_values(p)[:, None], (1, 4)))

    def test_scaled_pilots_visible_in_observations(self):
        p = toy_params(64, 55)
        grid = build_frame(np.zeros(p.data_carriers, dtype=complex), p)
        g = 0.3 - 0.7j
        grid.values *= g
        _, pilot_obs = deframe(grid, p)
        assert np.allclose(pilot_obs[:, 0], g * pilot_values(p))

    def test_layout_mismatch_rejected(self):
        p = toy_params(64, 55)
        grid = build_frame(np.zeros(p.data_carriers, dtype=complex), p)
        shuffled = SymbolGrid(
            values=grid.values,
            roles=np.roll(grid.roles, 1),
            band_offset=grid.band_offset,
        )
        with pytest.raises(ValueError, match="layout"):
            deframe(shuffled, p)


class TestTrainingFrame:
    def test_deterministic(self):
        p = toy_params(128, 91)
        g1, tx1 = training_frame(p, seed=5)
        g2, tx2 = training_frame(p, seed=5)
        assert np.array_equal(g1.values, g2.values)
        assert np.array_equal(tx1, tx2)

    def test_four_columns_and_full_excitation(self):
        p = toy_params(128, 91, qam_order=4)
        grid, tx = training_frame(p, seed=9)
        assert grid.n_symbols == 4 and tx.shape == (91, 4)
        assert np.all(np.abs(tx) > 0)

    def test_data_rows_span_the_plane(self):
        p = toy_params(128, 91, qam_order=4)
        for seed in range(6):
            _, tx = training_frame(p, seed=seed)
            data_rows = np.delete(tx, np.arange(0, 91, 9), axis=0)
            stacked = np.stack([data_rows.real, data_rows.imag], axis=2)
            ranks = np.linalg.matrix_rank(stacked)
            assert np.all(ranks == 2)

    def test_pilot_rows_keep_standard_values(self):
        p = toy_params(128, 91, qam_order=4)
        _, tx = training_frame(p, seed=3)
        pilots = tx[np.arange(0, 91, 9), :]
        assert np.array_equal(pilots, np.tile(pilot_values(p)[:, None], (1, 4)))
