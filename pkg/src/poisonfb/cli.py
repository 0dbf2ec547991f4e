"""Command-line front end.

Three subcommands:

* ``run <scenario>``  - Monte Carlo sweep for txpower / avgsnr / minrate;
  writes ``<scenario>.csv`` (and optionally ``.svg``) into --out-dir.
* ``validate``        - release-gate numerical checks, one line per check.
* ``plot <csv>``      - re-render an SVG chart from a results CSV.

Parameters resolve in order: built-in scenario defaults, then --config
file entries, then explicit flags.  POISONFB_THREADS caps the worker
count used by the sweep.  Identical command line + seed gives
byte-identical output files regardless of worker count.
"""
from __future__ import annotations

import argparse
import os
import sys

from poisonfb import experiments, validation
from poisonfb.plotting import render_plot

# Flat key = value config entries; same names as the flags, underscores
# instead of dashes.  Flags override file values.
_CONFIG_TYPES = {
    "trials": int,
    "seed": int,
    "ntx": int,
    "power_db": float,
    "gamma_db": float,
    "beta": float,
    "sweep_min": float,
    "sweep_max": float,
    "out_dir": str,
    "emit_plot": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}

_SWEEP_STEP = {"txpower": 1.0, "minrate": 1.0, "avgsnr": 5.0}


def _parse_config(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(
                        f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                key = key.strip()
                if key not in _CONFIG_TYPES:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
                try:
                    values[key] = _CONFIG_TYPES[key](val.strip())
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from exc
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poisonfb",
        description="Multicast beamforming under poisoned CSI feedback: "
                    "Monte Carlo scenarios, numerical validation, plots.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser(
        "run", help="run a Monte Carlo scenario sweep",
        description="Run one scenario and write <scenario>.csv "
                    "(plus <scenario>.svg with --emit-plot).")
    run.add_argument("scenario", choices=experiments.FIGURES,
                     help="which sweep to run")
    run.add_argument("--trials", type=int, default=None,
                     help="Monte Carlo trials per sweep point (default: 200)")
    run.add_argument("--seed", type=int, default=None,
                     help="master seed for all random streams (default: 0)")
    run.add_argument("--ntx", type=int, default=None,
                     help="transmit antennas (default: 5; minrate: 4)")
    run.add_argument("--power-db", type=float, default=None,
                     help="power budget P in dB (default: 20)")
    run.add_argument("--gamma-db", type=float, default=None,
                     help="QoS SNR target in dB, txpower only (default: 5)")
    run.add_argument("--beta", type=float, default=None,
                     help="attacker norm floor on the reported row "
                          "(default: ntx; minrate: 0.25)")
    run.add_argument("--sweep-min", type=float, default=None,
                     help="sweep start (default: txpower 2, minrate 3, "
                          "avgsnr 5 dB)")
    run.add_argument("--sweep-max", type=float, default=None,
                     help="sweep end, inclusive (default: txpower 8, "
                          "minrate 9, avgsnr 25 dB)")
    run.add_argument("--out-dir", default=None,
                     help="output directory (default: current directory)")
    run.add_argument("--emit-plot", action="store_true", default=None,
                     help="also write an SVG chart next to the CSV")
    run.add_argument("--config", default=None, metavar="PATH",
                     help="flat key = value file; flags override it")

    sub.add_parser(
        "validate", help="run the numerical release gate",
        description="Eigen, SDP-vs-oracle and randomization checks; "
                    "prints one pass/fail line per check.")

    plot = sub.add_parser(
        "plot", help="render an SVG chart from a results CSV",
        description="Re-render the chart for a CSV produced by 'run'.")
    plot.add_argument("csv", help="results CSV path")
    plot.add_argument("--out-dir", default=None,
                      help="output directory (default: alongside the CSV)")
    return parser


def _resolve_sweep(scenario: str, lo, hi) -> list | None:
    if lo is None and hi is None:
        return None
    base = experiments.default_spec(scenario).sweep
    lo = base[0] if lo is None else lo
    hi = base[-1] if hi is None else hi
    step = _SWEEP_STEP[scenario]
    if hi < lo:
        raise ValueError("sweep-max must be >= sweep-min")
    out, x = [], lo
    while x <= hi + 1e-9:
        out.append(float(x))
        x += step
    return out


def cmd_run(args) -> int:
    merged = _parse_config(args.config) if args.config else {}
    for key in _CONFIG_TYPES:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag

    overrides = {}
    if "trials" in merged:
        overrides["trials"] = merged["trials"]
    if "seed" in merged:
        overrides["master_seed"] = merged["seed"]
    if "ntx" in merged:
        overrides["n_tx"] = merged["ntx"]
    if "power_db" in merged:
        overrides["power_db"] = merged["power_db"]
    if "gamma_db" in merged:
        overrides["gamma_db"] = merged["gamma_db"]
    if "beta" in merged:
        overrides["norm_floor"] = merged["beta"]
    sweep = _resolve_sweep(args.scenario, merged.get("sweep_min"),
                           merged.get("sweep_max"))
    if sweep is not None:
        overrides["sweep"] = sweep

    spec = experiments.default_spec(args.scenario, **overrides)
    result = experiments.run_scenario(spec)

    out_dir = merged.get("out_dir", ".")
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{args.scenario}.csv")
    experiments.write_results(result, csv_path)
    print(f"wrote {csv_path}")
    if merged.get("emit_plot"):
        svg_path = os.path.join(out_dir, f"{args.scenario}.svg")
        render_plot(result, svg_path)
        print(f"wrote {svg_path}")
    return 0


def cmd_validate(args) -> int:
    checks = validation.run_validation()
    for check in checks:
        print(f"{'PASS' if check.passed else 'FAIL'}  {check.name}: "
              f"{check.detail}")
    n_bad = sum(not c.passed for c in checks)
    print(f"{len(checks) - n_bad}/{len(checks)} checks passed")
    return 1 if n_bad else 0


def cmd_plot(args) -> int:
    result = experiments.read_results(args.csv)
    stem = os.path.splitext(os.path.basename(args.csv))[0]
    out_dir = args.out_dir if args.out_dir else os.path.dirname(args.csv)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    svg_path = os.path.join(out_dir, f"{stem}.svg") if out_dir \
        else f"{stem}.svg"
    render_plot(result, svg_path)
    print(f"wrote {svg_path}")
    return 0


_COMMANDS = {"run": cmd_run, "validate": cmd_validate, "plot": cmd_plot}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
