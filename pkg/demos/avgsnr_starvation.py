#!/usr/bin/env python3
"""Average-SNR starvation by one large-norm orthogonal feedback row.

The average-SNR transmitter follows the dominant eigendirection of the
reported Gram matrix.  A forged row that is orthogonal to every honest
user but reported with an amplified norm hijacks that direction, so the
served users lose a few dB at every power level.  The gap is flat in P
because both beamformers scale the same way with the budget.
"""
import time
from pathlib import Path

import numpy as np

from poisonfb import experiments, plotting

TRIALS = 500
SEED = 0
OUT_DIR = Path(__file__).parent / "out"


def main():
    spec = experiments.default_spec("avgsnr", trials=TRIALS, master_seed=SEED)
    t0 = time.perf_counter()
    result = experiments.run_scenario(spec)
    elapsed = time.perf_counter() - t0

    by_curve = {}
    for agg in result.aggregates:
        by_curve.setdefault(agg.curve, {})[agg.x] = agg

    print(f"average-SNR maximization, N_t = {spec.n_tx}, K = {spec.n_legit}"
          f" honest users, {TRIALS} trials ({elapsed:.1f}s)")
    print(f"{'P [dB]':>7}  {'honest [dB]':>12}  {'poisoned [dB]':>14}"
          f"  {'gap [dB]':>9}")
    for x in sorted(by_curve[experiments.CURVE_HONEST]):
        hon = 10.0 * np.log10(by_curve[experiments.CURVE_HONEST][x].mean)
        att = 10.0 * np.log10(by_curve[experiments.CURVE_POISONED][x].mean)
        print(f"{x:7.0f}  {hon:12.2f}  {att:14.2f}  {hon - att:9.2f}")

    OUT_DIR.mkdir(exist_ok=True)
    csv_path = OUT_DIR / "avgsnr.csv"
    svg_path = OUT_DIR / "avgsnr.svg"
    experiments.write_results(result, csv_path)
    plotting.render_plot(result, svg_path)
    print(f"wrote {csv_path}")
    print(f"wrote {svg_path}")


if __name__ == "__main__":
    main()
