"""Acceptance gate: the guarantees this package ships with.

Each test covers one numbered criterion, prints a single [PASS]/[FAIL]
line with the measured numbers (visible in the -rP summary), and then
asserts.  A red run therefore names exactly which shipped guarantee
broke and by how much.  Tolerances and budgets are pinned here on
purpose: loosening a knob elsewhere in the package cannot silently
loosen the gate.
"""
import os
import subprocess
import sys
import time

import numpy as np

from poisonfb import model, numerics, transmitter, validation
from poisonfb.attacker import (AttackConfig, attack_maxmin_poison,
                               attack_orthogonal_starvation,
                               attack_power_drain)
from poisonfb.experiments import (CURVE_HONEST, CURVE_OPEN_LOOP,
                                  CURVE_POISONED, default_spec, run_scenario)
from poisonfb.streams import DOMAIN_VALIDATION, substream


def _report(num, name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num} ({name}): {detail}")
    return ok


def _curve_means(result):
    out = {}
    for agg in result.aggregates:
        out.setdefault(agg.curve, {})[agg.x] = agg.mean
    return out


def _rows_from(rng, n_rx, n_tx):
    raw = rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal(
        (n_rx, n_tx))
    return raw / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# 1. average-SNR starvation gap at the reference operating point


def test_average_snr_gap_under_starvation():
    t0 = time.perf_counter()
    spec = default_spec("avgsnr", trials=1000, sweep=[20.0])
    means = _curve_means(run_scenario(spec))
    elapsed = time.perf_counter() - t0
    gap_db = model.linear_to_db(means[CURVE_HONEST][20.0]) - \
        model.linear_to_db(means[CURVE_POISONED][20.0])
    ok = 2.0 <= gap_db <= 4.0 and elapsed <= 120.0
    assert _report(
        1, "average-SNR starvation gap", ok,
        f"gap = {gap_db:.3f} dB (want 2..4 dB) over 1000 trials at 20 dB,"
        f" 5 antennas, 5 users; {elapsed:.1f}s (limit 120s)")


# ---------------------------------------------------------------------------
# 2. min-rate curve ordering across the receiver-count sweep


def test_min_rate_curve_ordering():
    t0 = time.perf_counter()
    spec = default_spec("minrate", trials=200)
    means = _curve_means(run_scenario(spec))
    elapsed = time.perf_counter() - t0
    xs = sorted(means[CURVE_HONEST])
    crowded = [x for x in xs if x >= 5.0]
    m_h = min(means[CURVE_HONEST][x] - means[CURVE_OPEN_LOOP][x]
              for x in crowded)
    m_o = min(means[CURVE_OPEN_LOOP][x] - means[CURVE_POISONED][x]
              for x in crowded)
    sep = means[CURVE_OPEN_LOOP][xs[-1]] - means[CURVE_POISONED][xs[-1]]
    ok = m_h >= 0.0 and m_o >= 0.0 and sep >= 0.1 and elapsed <= 300.0
    assert _report(
        2, "min-rate ordering honest >= open-loop >= poisoned", ok,
        f"for K >= 5: min honest-open margin = {m_h:.3f} bits, min"
        f" open-poisoned margin = {m_o:.3f} bits; at K = {xs[-1]:.0f}"
        f" poisoning costs {sep:.3f} bits (want >= 0.1) over 200 trials;"
        f" {elapsed:.1f}s (limit 300s)")


# ---------------------------------------------------------------------------
# 3. transmit-power inflation under the drain attack


def test_transmit_power_inflation():
    t0 = time.perf_counter()
    spec = default_spec("txpower", trials=200)
    means = _curve_means(run_scenario(spec))
    elapsed = time.perf_counter() - t0
    xs = sorted(means[CURVE_HONEST])
    m_gap = min(means[CURVE_POISONED][x] - means[CURVE_HONEST][x] for x in xs)
    inc_h = min(means[CURVE_HONEST][b] - means[CURVE_HONEST][a]
                for a, b in zip(xs, xs[1:]))
    inc_p = min(means[CURVE_POISONED][b] - means[CURVE_POISONED][a]
                for a, b in zip(xs, xs[1:]))
    ok = m_gap >= 0.0 and inc_h >= 0.0 and inc_p >= 0.0 and elapsed <= 300.0
    assert _report(
        3, "transmit-power inflation", ok,
        f"min poisoned-honest gap = {m_gap:.4f} (normalized power), curves"
        f" nondecreasing in K (worst honest step {inc_h:.4f}, worst poisoned"
        f" step {inc_p:.4f}) over 200 trials; {elapsed:.1f}s (limit 300s)")


# ---------------------------------------------------------------------------
# 4. power-minimization SDP against frozen exhaustive-grid references


def test_power_min_sdp_matches_frozen_grids():
    t0 = time.perf_counter()
    gamma = model.db_to_linear(validation.QOS_ORACLE_GAMMA_DB)
    worst = 0.0
    for i, oracle in enumerate(validation.QOS_ORACLE_VALUES):
        _, grams = validation.oracle_instance(i)
        prob = numerics.SdpProblem(
            np.eye(2, dtype=complex),
            [(grams[k], ">=", gamma) for k in range(2)])
        sol = numerics.sdp_solve(prob)
        rel = abs(sol.objective - oracle) / oracle if sol.optimal else np.inf
        worst = max(worst, rel)

    h = np.array([1.0 + 1.0j, 2.0 - 1.0j])
    gram = np.outer(h.conj(), h)
    sol_one = numerics.sdp_solve(numerics.SdpProblem(
        np.eye(2, dtype=complex), [(gram, ">=", 3.0)]))
    expect = 3.0 / np.vdot(h, h).real
    rel_one = abs(sol_one.objective - expect) / expect

    sol_inf = numerics.sdp_solve(numerics.SdpProblem(
        np.eye(2, dtype=complex),
        [(np.zeros((2, 2), dtype=complex), ">=", 1.0)]))

    sol_dup = numerics.sdp_solve(numerics.SdpProblem(
        np.eye(2, dtype=complex),
        [(gram, ">=", 3.0), (gram, ">=", 1.5)]))
    lam, vec = numerics.principal_eigenvector(sol_dup.u_opt)
    align = abs(np.vdot(vec, h.conj())) / np.linalg.norm(h)
    rank1 = lam / max(sol_dup.objective, np.finfo(float).tiny)
    closed_ok = (sol_one.optimal and rel_one <= 1e-6
                 and sol_inf.status == "infeasible"
                 and sol_dup.optimal and rank1 >= 1.0 - 1e-6
                 and align >= 1.0 - 1e-6)

    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-2 and closed_ok and elapsed <= 60.0
    assert _report(
        4, "SDP vs frozen grid references", ok,
        f"worst rel error over 20 frozen instances = {worst:.2e}"
        f" (tol 1e-02); closed forms: single-constraint rel = {rel_one:.2e},"
        f" infeasible status = {sol_inf.status!r}, rank-1 share ="
        f" {rank1:.9f}, alignment = {align:.9f}; {elapsed:.1f}s (limit 60s)")


# ---------------------------------------------------------------------------
# 5. eigensolver accuracy: residuals and closed-form 2x2 roots


def test_eigensolver_accuracy():
    t0 = time.perf_counter()
    rng = substream(0, DOMAIN_VALIDATION, 500)
    worst_resid = 0.0
    for _ in range(100):
        dim = int(rng.integers(1, 9))
        b = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal(
            (dim, dim))
        a = b @ b.conj().T
        lam, vec = numerics.principal_eigenvector(a)
        resid = float(np.linalg.norm(a @ vec - lam * vec))
        worst_resid = max(worst_resid, resid / max(lam, np.finfo(float).tiny))

    worst_root = 0.0
    for _ in range(100):
        b = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        a = b @ b.conj().T
        lam, _ = numerics.principal_eigenvector(a)
        mid = 0.5 * (a[0, 0].real + a[1, 1].real)
        disc = np.sqrt((0.5 * (a[0, 0].real - a[1, 1].real)) ** 2
                       + abs(a[0, 1]) ** 2)
        worst_root = max(worst_root, abs(lam - (mid + disc)))

    elapsed = time.perf_counter() - t0
    ok = worst_resid <= 1e-10 and worst_root <= 1e-10
    assert _report(
        5, "eigensolver accuracy", ok,
        f"worst residual / lambda = {worst_resid:.2e} (tol 1e-10) over 100"
        f" PSD draws of dim <= 8; worst 2x2 root error = {worst_root:.2e}"
        f" (tol 1e-10) over 100 draws; {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 6. monotone objective traces and per-instance attack dominance


def test_objective_monotonicity_contracts():
    t0 = time.perf_counter()

    # (a) the iterative max-min trace never decreases
    worst_drop = 0.0
    for s in range(100):
        g = substream(0, DOMAIN_VALIDATION, 810, s)
        n_tx = int(g.integers(2, 5))
        n_rx = int(g.integers(1, 7))
        rows = _rows_from(g, n_rx, n_tx)
        u0 = rows[0].conj() * (np.sqrt(10.0) / np.linalg.norm(rows[0]))
        sol = transmitter.solve_max_min_iterative(rows, 10.0, 1.0, u0)
        tr = np.asarray(sol.trace)
        if tr.size > 1:
            drops = (tr[:-1] - tr[1:]) / np.maximum(1.0, np.abs(tr[:-1]))
            worst_drop = max(worst_drop, float(drops.max()))
    ascent_ok = worst_drop <= 1e-9

    # (b) draining never reports less power than the honest closed loop
    gamma = model.db_to_linear(5.0)
    cfg_drain = AttackConfig(strategy="power_drain", n_starts=4,
                             outer_max_iters=2, line_search_steps=1,
                             eval_draws=100)
    drain_margin = np.inf
    for s in range(100):
        rows = _rows_from(substream(0, DOMAIN_VALIDATION, 811, s), 4, 5)
        honest = transmitter.solve_power_min(rows, gamma, 1.0, 1e6)
        res = attack_power_drain(rows, gamma, 1.0, 1e6, cfg_drain,
                                 substream(0, DOMAIN_VALIDATION, 812, s))
        drain_margin = min(drain_margin,
                           res.attacker_objective - honest.required_power)
    drain_ok = drain_margin >= -1e-9

    # (c) poisoning never reports more legitimate min-SNR than honest
    cfg_poison = AttackConfig(strategy="maxmin_poison", norm_floor=2.0)
    poison_margin = np.inf
    for s in range(50):
        rows = _rows_from(substream(0, DOMAIN_VALIDATION, 820, s), 2, 2)
        honest = transmitter.solve_max_min_sdr(rows, 100.0, 1.0)
        res = attack_maxmin_poison(rows, 100.0, 1.0, cfg_poison,
                                   substream(0, DOMAIN_VALIDATION, 821, s))
        poison_margin = min(poison_margin,
                            honest.min_snr - res.attacker_objective)
    poison_ok = poison_margin >= -1e-9 * 100.0

    elapsed = time.perf_counter() - t0
    ok = ascent_ok and drain_ok and poison_ok
    assert _report(
        6, "monotone traces and attack dominance", ok,
        f"worst ascent trace drop = {worst_drop:.2e} (tol 1e-09, 100 runs);"
        f" min drain margin over honest = {drain_margin:.3e} (100 instances);"
        f" min honest-over-poisoned margin = {poison_margin:.3e}"
        f" (50 instances); {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 7. starved feedback is numerically orthogonal when antennas spare a null


def test_starved_feedback_orthogonality():
    t0 = time.perf_counter()
    worst = 0.0
    for s in range(100):
        g = substream(0, DOMAIN_VALIDATION, 830, s)
        n_tx = int(g.integers(2, 7))
        n_rx = int(g.integers(1, n_tx))
        rows = _rows_from(g, n_rx, n_tx)
        h_a = attack_orthogonal_starvation(rows, float(n_tx),
                                           amplification=2.0).reported_channel
        couplings = np.abs(rows @ h_a.conj())
        bounds = np.linalg.norm(h_a) * np.linalg.norm(rows, axis=1)
        worst = max(worst, float(np.max(couplings / bounds)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8
    assert _report(
        7, "starvation orthogonality", ok,
        f"worst |<h_a, h_k>| / (|h_a||h_k|) = {worst:.2e} (tol 1e-08) over"
        f" 100 seeded instances with fewer users than antennas;"
        f" {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 8. CLI results do not depend on the worker count


def test_cli_results_invariant_to_worker_count(tmp_path):
    t0 = time.perf_counter()
    blobs = []
    for workers, sub in (("1", "seq"), ("4", "par")):
        out_dir = tmp_path / sub
        env = dict(os.environ, POISONFB_THREADS=workers)
        proc = subprocess.run(
            [sys.executable, "-m", "poisonfb.cli", "run", "avgsnr",
             "--trials", "50", "--seed", "42", "--out-dir", str(out_dir)],
            env=env, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        blobs.append((out_dir / "avgsnr.csv").read_bytes())
    elapsed = time.perf_counter() - t0
    ok = blobs[0] == blobs[1] and len(blobs[0]) > 0
    assert _report(
        8, "worker-count invariance", ok,
        f"avgsnr CSV (50 trials, seed 42) is byte-identical for 1 vs 4"
        f" workers ({len(blobs[0])} bytes); {elapsed:.1f}s")
