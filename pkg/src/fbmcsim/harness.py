"""Monte-Carlo BER engine: transmitter -> channel -> receiver -> bit counts.

A trial first sends a four-symbol training frame through the full chain
(training the neural equalizer, or simply exercising the protocol for the
other estimators), then streams data frames until the stop rule fires.
The scenario's ``snr_db`` is the per-data-symbol Es/N0: the injected noise
density is derived from the known cascade through-gain so that a unit
energy QAM symbol sees exactly that ratio after demodulation, which is
what makes the closed-form QPSK curve an absolute oracle.

Everything is deterministic given the scenario seed; per-SNR trial seeds
are derived with a splitmix-style mix so sweep points are decorrelated
but reproducible at any worker count.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import channel, estimation, filterbank, framing, oqam, protofilter
from .estimation import ESTIMATORS, NeuralEqualizer, NnHyper
from .params import SystemParams, demap_symbols, map_bits, mode_params, qam_map, toy_params

CHANNEL_TYPES = ("awgn", "brazil_a", "file")

N_TRAINING_SYMBOLS = 4


class ScenarioError(ValueError):
    """Bad scenario configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class Scenario:
    params: SystemParams
    channel_type: str = "awgn"
    profile_file: str | None = None
    snr_db: float = 10.0
    estimator: str = "ideal"
    nn: NnHyper = field(default_factory=NnHyper)
    seed: int = 1
    min_errors: int = 100
    max_bits: int = 2_000_000
    frame_symbols: int = 16
    pilot_window: int = 1

    def __post_init__(self):
        if self.channel_type not in CHANNEL_TYPES:
            raise ScenarioError(f"unknown channel type {self.channel_type!r}")
        if self.channel_type == "file" and not self.profile_file:
            raise ScenarioError("channel type 'file' requires profile_file")
        if self.estimator not in ESTIMATORS:
            raise ScenarioError(f"unknown estimator {self.estimator!r}")
        if self.min_errors < 1:
            raise ScenarioError("min_errors must be >= 1")
        bits_per_frame = (
            self.params.data_carriers
            * qam_map(self.params.qam_order).bits_per_symbol
            * self.frame_symbols
        )
        if self.max_bits < bits_per_frame:
            raise ScenarioError(
                f"max_bits {self.max_bits} below one frame ({bits_per_frame} bits)"
            )
        if self.frame_symbols < 1 or self.pilot_window < 1:
            raise ScenarioError("frame_symbols and pilot_window must be >= 1")


def scenario_from_dict(cfg: dict, snr_db: float | None = None) -> Scenario:
    """Build a Scenario from parsed scenario-file JSON."""
    try:
        cfg = dict(cfg)
        if "toy" in cfg:
            toy = cfg.pop("toy")
            params = toy_params(
                toy["m"],
                toy["occupied"],
                qam_order=cfg.pop("qam_order", 4),
                **({"sample_rate": toy["sample_rate"]} if "sample_rate" in toy else {}),
            )
        elif "mode" in cfg:
            params = mode_params(cfg.pop("mode"), qam_order=cfg.pop("qam_order", 64))
        else:
            raise ScenarioError("scenario needs either 'mode' or 'toy'")
        ch = cfg.pop("channel", {"type": "awgn"})
        nn = NnHyper(**cfg.pop("nn", {}))
        scn = Scenario(
            params=params,
            channel_type=ch.get("type", "awgn"),
            profile_file=ch.get("profile_file"),
            nn=nn,
            **cfg,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"bad scenario: {exc}") from exc
    if snr_db is not None:
        scn = replace(scn, snr_db=float(snr_db))
    return scn


def load_scenario(path: str, snr_db: float | None = None) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh), snr_db)


@dataclass
class BerRecord:
    snr_db: float
    bits_sent: int
    bit_errors: int
    ber: float
    estimator: str
    channel: str
    qam_order: int
    seed: int
    wall_time_seconds: float
    training_converged: bool

    csv_fields = (
        "snr_db",
        "bits_sent",
        "bit_errors",
        "ber",
        "estimator",
        "channel",
        "qam_order",
        "seed",
        "wall_time_seconds",
        "training_converged",
    )


def _mix64(x: int) -> int:
    """splitmix64 finalizer; documented seed-derivation mix."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def trial_seed(master_seed: int, snr_index: int) -> int:
    """Per-sweep-point seed: master XOR a mixed index hash."""
    return (master_seed ^ _mix64(snr_index + 1)) & 0xFFFFFFFFFFFFFFFF


class Link:
    """Transmit/receive machinery bound to one parameter set.

    The receiver stops at the complex half-symbol grid: per-carrier
    equalization must happen there, before the offset-QAM real projection,
    because the projection is only meaningful once the channel phase has
    been removed.
    """

    def __init__(self, params: SystemParams):
        self.params = params
        self.filter = protofilter.design(params.overlap_factor, params.fft_size)
        self.beta = filterbank.beta_coeffs(params.fft_size, params.overlap_factor)
        self.qam = qam_map(params.qam_order)
        self.delay = filterbank.pipeline_delay(params.fft_size, params.overlap_factor)
        _, self.band_offset, self.pilot_idx, self.data_idx = framing.band_layout(params)
        self.tx_pilots = framing.pilot_values(params)
        #: noise density for Es/N0 = 1 on unit-energy symbols
        self.gain = filterbank.tmux_gain(self.filter)

    def transmit(self, grid: framing.SymbolGrid) -> np.ndarray:
        return filterbank.synthesize(
            oqam.preprocess(grid.values), self.filter, self.beta
        )

    def receive_halves(self, stream: np.ndarray, n_symbols: int) -> np.ndarray:
        """Full (M, 2N) complex half-symbol grid, rotation removed."""
        first = self.delay.half_symbols
        halves = filterbank.analyze(
            stream, self.filter, self.beta, n_cols=first + 2 * n_symbols
        )
        return halves[:, first : first + 2 * n_symbols]

    def receive(self, stream: np.ndarray, n_symbols: int) -> np.ndarray:
        """Occupied-band symbols for an identity channel (no equalization)."""
        symbols = oqam.postprocess(self.receive_halves(stream, n_symbols))
        return framing.occupied_values(symbols, self.params)

    def pilot_half_values(self, halves: np.ndarray) -> np.ndarray:
        """(P, N) received values at each pilot's nonzero half-symbol.

        A pilot is purely real, so its energy sits in the first half of
        the symbol period on even carriers and the second on odd ones.
        """
        rows = self.band_offset + self.pilot_idx
        n_sym = halves.shape[1] // 2
        cols = 2 * np.arange(n_sym)[None, :] + (rows % 2)[:, None]
        return halves[rows[:, None], cols]

    def noise_variance(self, snr_db: float) -> float:
        """Stream-sample noise variance giving Es/N0 = snr_db per symbol."""
        return self.gain / 10.0 ** (snr_db / 10.0)


def _make_profile(scenario: Scenario) -> channel.ChannelProfile:
    if scenario.channel_type == "awgn":
        return channel.identity_profile()
    if scenario.channel_type == "brazil_a":
        return channel.brazil_a_profile(scenario.params.sample_rate)
    return channel.load_profile(scenario.profile_file, scenario.params.sample_rate)


def _through_channel(
    stream: np.ndarray,
    profile: channel.ChannelProfile,
    noise_var: float,
    rng: np.random.Generator,
) -> np.ndarray:
    out = channel.apply_multipath(stream, profile)
    if noise_var > 0.0:
        out = out + channel.noise_like(out.size, noise_var, rng)
    return out


def _train_equalizer(
    link: Link,
    profile: channel.ChannelProfile,
    noise_var: float,
    hyper: NnHyper,
    rng: np.random.Generator,
) -> tuple[NeuralEqualizer | None, bool]:
    """Send the training frame through the chain; train if an NN is wanted.

    The neural equalizer learns in the half-symbol domain: inputs are the
    received complex half-symbol values, desired outputs the transmitted
    staggered reals (imaginary target zero), so the trained map performs
    both the channel derotation and the interference-rejecting projection.
    """
    train_seed = int(rng.integers(0, 2**63))
    grid, _ = framing.training_frame(link.params, train_seed)
    stream = link.transmit(grid)
    rx_halves = link.receive_halves(
        _through_channel(stream, profile, noise_var, rng), N_TRAINING_SYMBOLS
    )
    if hyper is None:
        return None, True
    occ = slice(link.band_offset, link.band_offset + link.params.occupied_carriers)
    tx_halves = oqam.preprocess(grid.values)[occ, :]
    eq = estimation.nn_train(rx_halves[occ, :], tx_halves, hyper)
    return eq, eq.all_converged


def _estimate_and_equalize(
    scenario: Scenario,
    link: Link,
    halves: np.ndarray,
    h_true: np.ndarray,
    neural: NeuralEqualizer | None,
) -> np.ndarray:
    """Equalize the half-symbol grid, project, and return data symbols.

    Returns the (data_carriers, n_symbols) complex matrix ready to demap.
    """
    est = scenario.estimator
    params = link.params
    occ = slice(link.band_offset, link.band_offset + params.occupied_carriers)
    eq_halves = np.zeros_like(halves)
    if est == "neural":
        eq_halves[occ, :] = estimation.nn_equalize(halves[occ, :], neural).real
    elif est == "ideal":
        eq_halves[occ, :], _ = estimation.equalize(halves[occ, :], h_true)
    else:
        interp = (
            estimation.interpolate_linear
            if est == "linear"
            else estimation.interpolate_cubic
        )
        pilots_rx = link.pilot_half_values(halves)
        n_sym = halves.shape[1] // 2
        window = scenario.pilot_window
        for n in range(n_sym):
            # centered averaging window, clipped at the frame edges; the
            # channel is static so looking ahead costs nothing
            hi = min(n_sym, max(n + (window + 1) // 2, window))
            lo = max(0, hi - window)
            h_p = estimation.raw_pilot_estimates(
                pilots_rx[:, lo:hi], link.tx_pilots
            )
            h_est = interp(h_p, link.pilot_idx, params.occupied_carriers)
            pair, _ = estimation.equalize(halves[occ, 2 * n : 2 * n + 2], h_est)
            eq_halves[occ, 2 * n : 2 * n + 2] = pair
    symbols = oqam.postprocess(eq_halves)
    return symbols[link.band_offset + link.data_idx, :]


def run_trial(scenario: Scenario) -> BerRecord:
    """One Monte-Carlo point: train once, stream frames until the stop rule."""
    t0 = time.perf_counter()
    params = scenario.params
    link = Link(params)
    profile = _make_profile(scenario)
    noise_var = (
        0.0 if math.isinf(scenario.snr_db) else link.noise_variance(scenario.snr_db)
    )
    rng = np.random.default_rng(scenario.seed)

    hyper = scenario.nn if scenario.estimator == "neural" else None
    neural, converged = _train_equalizer(link, profile, noise_var, hyper, rng)
    h_true = channel.true_frequency_response(
        profile, params.fft_size, link.band_offset, params.occupied_carriers
    )

    bps = link.qam.bits_per_symbol
    bits_per_frame = params.data_carriers * bps * scenario.frame_symbols
    bits_sent = 0
    bit_errors = 0
    while True:
        tx_bits = rng.integers(0, 2, size=bits_per_frame, dtype=np.int64)
        grid = framing.build_frame(map_bits(tx_bits, link.qam), params)
        stream = link.transmit(grid)
        halves = link.receive_halves(
            _through_channel(stream, profile, noise_var, rng), scenario.frame_symbols
        )
        eq = _estimate_and_equalize(scenario, link, halves, h_true, neural)
        rx_bits = demap_symbols(eq.T.ravel(), link.qam)
        bit_errors += int(np.count_nonzero(rx_bits != tx_bits))
        bits_sent += bits_per_frame
        if bit_errors >= scenario.min_errors or bits_sent >= scenario.max_bits:
            break

    return BerRecord(
        snr_db=scenario.snr_db,
        bits_sent=bits_sent,
        bit_errors=bit_errors,
        ber=bit_errors / bits_sent,
        estimator=scenario.estimator,
        channel=scenario.channel_type,
        qam_order=params.qam_order,
        seed=scenario.seed,
        wall_time_seconds=time.perf_counter() - t0,
        training_converged=converged,
    )


def sweep(scenario: Scenario, snr_list, workers: int = 1) -> list[BerRecord]:
    """One trial per SNR with independent derived seeds, ordered by SNR."""
    snr_list = list(snr_list)
    if not snr_list:
        raise ScenarioError("snr_list must be nonempty")
    if any(b <= a for a, b in zip(snr_list, snr_list[1:])):
        raise ScenarioError("snr_list must be strictly increasing")
    scenarios = [
        replace(scenario, snr_db=float(snr), seed=trial_seed(scenario.seed, i))
        for i, snr in enumerate(snr_list)
    ]
    if workers <= 1:
        return [run_trial(s) for s in scenarios]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_trial, scenarios))


def emit_csv(records, path) -> None:
    """RFC-4180 CSV, one row per record, floats at 12 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BerRecord.csv_fields)
        for r in records:
            writer.writerow(
                [
                    _fmt(getattr(r, name))
                    for name in BerRecord.csv_fields
                ]
            )


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".12g")
    return value


def read_csv(path) -> list[BerRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        out.append(
            BerRecord(
                snr_db=float(row["snr_db"]),
                bits_sent=int(row["bits_sent"]),
                bit_errors=int(row["bit_errors"]),
                ber=float(row["ber"]),
                estimator=row["estimator"],
                channel=row["channel"],
                qam_order=int(row["qam_order"]),
                seed=int(row["seed"]),
                wall_time_seconds=float(row["wall_time_seconds"]),
                training_converged=row["training_converged"] == "True",
            )
        )
    return out


# ---------------------------------------------------------------------------
# self-test oracle suite


def check_polyphase_direct(tap_perturb: float = 0.0) -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    worst = 0.0
    for m in (8, 16, 32):
        filt = _perturbed_filter(m, tap_perturb)
        beta = filterbank.beta_coeffs(m, 4)
        grid = rng.standard_normal((m, 16))
        fast = filterbank.synthesize(grid, filt, beta)
        slow = filterbank.direct_synthesize(grid, filt, beta)
        worst = max(worst, np.linalg.norm(fast - slow) / np.linalg.norm(slow))
    return worst <= 1e-9, f"max relative L2 error {worst:.3e}"


def check_oqam_roundtrip() -> tuple[bool, str]:
    rng = np.random.default_rng(8)
    x = rng.standard_normal((32, 9)) + 1j * rng.standard_normal((32, 9))
    exact = np.array_equal(oqam.postprocess(oqam.preprocess(x)), x)
    return exact, "exact" if exact else "round trip mismatch"


def measure_tmux_sir(fft_size: int, tap_perturb: float = 0.0) -> float:
    """Back-to-back symbol-domain SIR in dB on a random QAM payload."""
    params = toy_params(fft_size, 9 * (fft_size // 16) + 1, qam_order=4)
    link = Link(params)
    link.filter = _perturbed_filter(fft_size, tap_perturb)
    rng = np.random.default_rng(9)
    n_sym = 12
    bits = rng.integers(0, 2, size=params.data_carriers * 2 * n_sym)
    grid = framing.build_frame(map_bits(bits, link.qam), params)
    rx = link.receive(link.transmit(grid), n_sym)
    tx = framing.occupied_values(grid.values, params)
    err = rx - tx
    return 10.0 * math.log10(
        float(np.sum(np.abs(tx) ** 2)) / float(np.sum(np.abs(err) ** 2))
    )


def _perturbed_filter(fft_size: int, tap_perturb: float):
    filt = protofilter.design(4, fft_size)
    if tap_perturb == 0.0:
        return filt
    taps = filt.taps.copy()
    taps[taps.size // 4] *= 1.0 + tap_perturb
    return protofilter.PrototypeFilter(
        overlap=4, fft_size=fft_size, freq_coeffs=filt.freq_coeffs, taps=taps
    )


def check_tmux_sir(tap_perturb: float = 0.0) -> tuple[bool, str]:
    sir = min(measure_tmux_sir(64, tap_perturb), measure_tmux_sir(128, tap_perturb))
    return sir >= 50.0, f"min SIR {sir:.1f} dB"


def check_nyquist_residuals() -> tuple[bool, str]:
    r = protofilter.nyquist_residuals(protofilter.design_coeffs(4))
    ok = all(abs(v) <= 1e-6 for v in r)
    return ok, f"residuals {tuple(f'{v:.2e}' for v in r)}"


def check_prbs_period() -> tuple[bool, str]:
    bits = framing.prbs_sequence(2 * 2047)
    ok = np.array_equal(bits[:2047], bits[2047:]) and not np.array_equal(
        bits[:11], np.zeros(11)
    )
    return ok, "period 2047" if ok else "period mismatch"


def check_spline_knots() -> tuple[bool, str]:
    rng = np.random.default_rng(10)
    pos = np.arange(0, 91, 9)
    h_p = rng.standard_normal(pos.size) + 1j * rng.standard_normal(pos.size)
    est = estimation.interpolate_cubic(h_p, pos, 91)
    err = float(np.max(np.abs(est[pos] - h_p)))
    return err <= 1e-12, f"max knot error {err:.2e}"


def check_lms_least_squares() -> tuple[bool, str]:
    rng = np.random.default_rng(11)
    gain = 0.8 * np.exp(1j * np.pi / 4)
    re, im = rng.integers(0, 2, (2, 40, 4)) * 2.0 - 1.0
    tx = (re + 1j * im) / np.sqrt(2)
    cross = tx[:, :1].real * tx.imag - tx[:, :1].imag * tx.real
    tx[np.all(np.abs(cross) < 1e-9, axis=1), 1] *= 1j
    rx = gain * tx
    eq = estimation.nn_train(rx, tx)
    worst = 0.0
    for c in range(tx.shape[0]):
        a = np.stack([rx[c].real, rx[c].imag], axis=1)
        b = np.stack([tx[c].real, tx[c].imag], axis=1)
        w_ls = np.linalg.lstsq(a, b, rcond=None)[0].T
        worst = max(worst, float(np.linalg.norm(eq.weights[c] - w_ls)))
    return worst <= 1e-2, f"max |W - W_ls| {worst:.2e}"


SELFTEST_CHECKS = (
    ("polyphase_direct", check_polyphase_direct),
    ("oqam_roundtrip", check_oqam_roundtrip),
    ("tmux_sir", check_tmux_sir),
    ("nyquist_residuals", check_nyquist_residuals),
    ("prbs_period", check_prbs_period),
    ("spline_knots", check_spline_knots),
    ("lms_least_squares", check_lms_least_squares),
)


def selftest() -> list[tuple[str, bool, str]]:
    """Run the oracle suite; returns (name, passed, detail) per check."""
    return [(name, *fn()) for name, fn in SELFTEST_CHECKS]
