#!/usr/bin/env python3
"""Transmit-power inflation from a single poisoned feedback row.

The transmitter serves K users under a per-user SNR floor and minimizes
transmit power.  One authenticated user forges its reported channel so
the QoS constraint set gets as expensive as possible.  Sweeping K shows
the honest and attacked power fractions climbing together, with the
attacked curve pinned above the honest one at every K.
"""
import time
from pathlib import Path

from poisonfb import experiments, plotting

# simulation settings (the reference figure uses 200 trials)
TRIALS = 50
SEED = 0
SWEEP = list(range(2, 9))
OUT_DIR = Path(__file__).parent / "out"


def main():
    spec = experiments.default_spec("txpower", trials=TRIALS,
                                    master_seed=SEED, sweep=SWEEP)
    t0 = time.perf_counter()
    result = experiments.run_scenario(spec)
    elapsed = time.perf_counter() - t0

    by_curve = {}
    for agg in result.aggregates:
        by_curve.setdefault(agg.curve, {})[agg.x] = agg

    print(f"power minimization, N_t = {spec.n_tx}, gamma = {spec.gamma_db}"
          f" dB, cap = {spec.power_db} dB, {TRIALS} trials ({elapsed:.1f}s)")
    print(f"{'K':>3}  {'honest P/Pmax':>14}  {'attacked P/Pmax':>16}"
          f"  {'outage':>7}")
    for x in sorted(by_curve[experiments.CURVE_HONEST]):
        hon = by_curve[experiments.CURVE_HONEST][x]
        att = by_curve[experiments.CURVE_POISONED][x]
        print(f"{x:3.0f}  {hon.mean:14.4f}  {att.mean:16.4f}"
              f"  {att.outage_frac:7.2f}")

    OUT_DIR.mkdir(exist_ok=True)
    csv_path = OUT_DIR / "txpower.csv"
    svg_path = OUT_DIR / "txpower.svg"
    experiments.write_results(result, csv_path)
    plotting.render_plot(result, svg_path)
    print(f"wrote {csv_path}")
    print(f"wrote {svg_path}")


if __name__ == "__main__":
    main()
