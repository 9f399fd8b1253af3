"""Command-line front end.

Subcommands:

- ``run``      one BER trial from a scenario file at a single SNR
- ``sweep``    BER trials over an SNR range
- ``filter``   dump prototype-filter taps and frequency response as CSV
- ``selftest`` run the oracle suite

Exit codes: 0 success, 1 check/trial failure, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import harness, protofilter
from .estimation import TrainingDivergenceError
from .harness import ScenarioError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbmcsim",
        description="FBMC baseband simulator with pilot and neural channel estimators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single BER trial")
    p_run.add_argument("--scenario", required=True, help="scenario JSON file")
    p_run.add_argument("--snr", type=float, required=True, help="Es/N0 in dB")
    p_run.add_argument("--out", required=True, help="output CSV path")

    p_sweep = sub.add_parser("sweep", help="BER trials over an SNR range")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--snr-start", type=float, required=True)
    p_sweep.add_argument("--snr-stop", type=float, required=True)
    p_sweep.add_argument("--snr-step", type=float, required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--workers", type=int, default=1, help="parallel trials")

    p_filter = sub.add_parser("filter", help="dump the prototype filter")
    p_filter.add_argument("--k", type=int, default=4, help="overlap factor")
    p_filter.add_argument("--m", type=int, required=True, help="FFT size")
    p_filter.add_argument("--out", required=True)
    p_filter.add_argument(
        "--n-points", type=int, default=1024, help="frequency-response grid size"
    )

    sub.add_parser("selftest", help="run the oracle suite")
    return parser


def _cmd_run(args) -> int:
    scenario = harness.load_scenario(args.scenario, snr_db=args.snr)
    record = harness.run_trial(scenario)
    harness.emit_csv([record], args.out)
    print(
        f"snr={record.snr_db:g} dB  ber={record.ber:.3e}  "
        f"errors={record.bit_errors}/{record.bits_sent}  -> {args.out}"
    )
    return 0


def _cmd_sweep(args) -> int:
    scenario = harness.load_scenario(args.scenario)
    if args.snr_step <= 0 or args.snr_stop < args.snr_start:
        raise ScenarioError("need snr_stop >= snr_start and snr_step > 0")
    snrs = np.arange(args.snr_start, args.snr_stop + args.snr_step / 2, args.snr_step)
    records = harness.sweep(scenario, snrs.tolist(), workers=args.workers)
    harness.emit_csv(records, args.out)
    for r in records:
        print(f"snr={r.snr_db:g} dB  ber={r.ber:.3e}  errors={r.bit_errors}/{r.bits_sent}")
    print(f"wrote {len(records)} records -> {args.out}")
    return 0


def _cmd_filter(args) -> int:
    filt = protofilter.design(args.k, args.m)
    freqs, db = protofilter.frequency_response(filt, args.n_points)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["table", "x", "y"])
        for i, tap in enumerate(filt.taps):
            writer.writerow(["tap", i, format(tap, ".12g")])
        for f, v in zip(freqs, db):
            writer.writerow(["response", format(f, ".12g"), format(v, ".12g")])
    print(f"wrote {filt.length} taps and {args.n_points} response points -> {args.out}")
    return 0


def _cmd_selftest() -> int:
    results = harness.selftest()
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failed += not ok
    return 1 if failed else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "filter":
            return _cmd_filter(args)
        return _cmd_selftest()
    except (ScenarioError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingDivergenceError as exc:
        print(f"trial failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
