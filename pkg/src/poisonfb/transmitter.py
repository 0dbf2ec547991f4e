"""Beamformer solvers on the transmitter side.

All solvers consume the full reported channel matrix, poisoned rows
included: the transmitter cannot tell a forged report from an honest one.
Four objectives are covered: QoS power minimization, average-SNR
maximization, max-min SNR via semidefinite relaxation, and an iterative
SNR-increasing max-min ascent that doubles as the attacker's fast inner
oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from poisonfb import model
from poisonfb import numerics
from poisonfb.sdp import STATUS_INFEASIBLE, STATUS_OPTIMAL


@dataclass
class QosSolution:
    """Power-minimization outcome under a per-receiver SNR floor."""

    beamformer: np.ndarray | None
    required_power: float
    feasible: bool
    sdr_gap: float
    status: str = STATUS_OPTIMAL


@dataclass
class MaxMinSolution:
    """Max-min SNR outcome under a total power cap."""

    beamformer: np.ndarray
    min_snr: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)


def _noise_vector(noise_powers, n_rx: int) -> np.ndarray:
    noises = np.atleast_1d(np.asarray(noise_powers, dtype=float))
    if noises.size == 1:
        noises = np.full(n_rx, float(noises[0]))
    if noises.size != n_rx:
        raise ValueError("need one noise power per receiver")
    return noises


def solve_power_min(channels, snr_target: float, noise_powers,
                    power_cap: float, n_draws: int = 1000,
                    rng: np.random.Generator | None = None,
                    sdp_tol: float = 1e-9) -> QosSolution:
    """Minimize transmit power subject to SNR_k >= snr_target for all k.

    Relaxation: min trace(U) s.t. trace(U G_k) >= snr_target * sigma_k^2,
    U PSD, followed by Gaussian randomization with a minimal rescale that
    makes each candidate meet the worst constraint with equality.  The cap
    only classifies the outcome: feasible means the randomized beamformer
    exists and its power fits under power_cap.
    """
    rows = model.as_rows(channels)
    n_rx, n_tx = rows.shape
    noises = _noise_vector(noise_powers, n_rx)
    bounds = snr_target * noises

    grams = rows.conj()[:, :, None] * rows[:, None, :]
    constraints = [(grams[k], ">=", bounds[k]) for k in range(n_rx)]
    problem = numerics.SdpProblem(np.eye(n_tx, dtype=complex), constraints)
    sol = numerics.sdp_solve(problem, tol=sdp_tol)
    if sol.status != STATUS_OPTIMAL:
        power = np.inf if sol.status == STATUS_INFEASIBLE else np.nan
        return QosSolution(None, power, False, np.nan, sol.status)

    def rescale(cands):
        gains = np.abs(cands @ rows.T) ** 2  # (m, K)
        with np.errstate(divide="ignore", invalid="ignore"):
            factors = np.sqrt(np.max(bounds[None, :] / gains, axis=1))
            out = np.where(np.isfinite(factors)[:, None],
                           cands * factors[:, None], np.nan)
        return out

    def check(cands):
        snrs = np.abs(cands @ rows.T) ** 2 / noises[None, :]
        return np.all(snrs >= snr_target * (1.0 - 1e-9), axis=1)

    rand = numerics.randomize_rank1(sol.u_opt, check, n_draws=n_draws, rng=rng,
                                    rescale=rescale, sdp_bound=sol.objective)
    if not rand.found:
        return QosSolution(None, np.inf, False, np.nan, "no_rank1_candidate")
    power = rand.objective
    return QosSolution(rand.beamformer, power, bool(power <= power_cap),
                       rand.bound_ratio, sol.status)


def solve_max_avg_snr(channels, power_budget: float, noise_powers) -> np.ndarray:
    """Maximize the average received SNR under the power budget.

    The sum of SNRs is u^H (sum_k G_k / sigma_k^2) u, so the optimum is the
    full-power principal eigenvector of the noise-weighted Gram matrix of
    the reported rows.
    """
    if power_budget <= 0:
        raise ValueError("power budget must be positive")
    rows = model.as_rows(channels)
    noises = _noise_vector(noise_powers, rows.shape[0])
    weighted = rows / np.sqrt(noises)[:, None]
    gram = weighted.conj().T @ weighted
    _, vec = numerics.principal_eigenvector(gram)
    return np.sqrt(power_budget) * vec


def _batch_min_snr(h_batch: np.ndarray, u_batch: np.ndarray,
                   noises: np.ndarray) -> np.ndarray:
    gains = np.einsum("bkn,bn->bk", h_batch, u_batch)
    snrs = (gains.real**2 + gains.imag**2) / noises[None, :]
    return snrs.min(axis=1)


def ascend_max_min_batch(h_batch: np.ndarray, power_budget: float,
                         noises: np.ndarray, u_init: np.ndarray,
                         max_iters: int = 200, tol: float = 1e-6,
                         history: list | None = None):
    """Lockstep projected-ascent on min_k SNR_k for a batch of instances.

    Shapes: h_batch (B, K, n), u_init (B, n), noises (K,).  Each batch
    element follows a softmin-weighted gradient of its worst-user SNR on
    the full-power sphere and accepts a candidate step only if its
    objective does not decrease, so the per-element objective trace is
    nondecreasing by construction.  Returns (u, min_snr, iterations,
    converged) with leading dimension B.  When ``history`` is a list the
    (B,) objective vector is appended once before the first update and
    once per iteration.
    """
    h_batch = np.asarray(h_batch, dtype=complex)
    b_sz, n_rx, _ = h_batch.shape
    u = np.array(u_init, dtype=complex)
    norms = np.linalg.norm(u, axis=1)
    dead = norms < 1e-15
    if np.any(dead):
        u[dead] = h_batch[dead, 0].conj()
        norms = np.linalg.norm(u, axis=1)
        norms[norms < 1e-15] = 1.0
    u = u * (np.sqrt(power_budget) / norms)[:, None]

    f_cur = _batch_min_snr(h_batch, u, noises)
    step = np.full(b_sz, 1.0)
    iters = np.zeros(b_sz, dtype=int)
    converged = np.zeros(b_sz, dtype=bool)
    sched = np.array([1.0, 0.5, 0.25, 0.125])
    if history is not None:
        history.append(f_cur.copy())

    for _ in range(max_iters):
        active = ~converged
        if not np.any(active):
            break
        gains = np.einsum("bkn,bn->bk", h_batch, u)
        snrs = (gains.real**2 + gains.imag**2) / noises[None, :]
        s_min = snrs.min(axis=1)
        temp = np.maximum(0.1 * s_min, 1e-12)
        weights = np.exp(-(snrs - s_min[:, None]) / temp[:, None])
        weights /= weights.sum(axis=1, keepdims=True)
        # Wirtinger gradient of sum_k w_k |h_k u|^2 / sigma_k^2 w.r.t. u*
        grad = np.einsum("bk,bkn->bn", weights / noises[None, :],
                         h_batch.conj() * gains[:, :, None])
        g_norm = np.linalg.norm(grad, axis=1)
        g_norm[g_norm < 1e-300] = 1.0
        direction = grad * (np.sqrt(power_budget) / g_norm)[:, None]

        trial_steps = step[:, None] * sched[None, :]
        cand = u[:, None, :] + trial_steps[:, :, None] * direction[:, None, :]
        cand_norm = np.linalg.norm(cand, axis=2)
        cand_norm[cand_norm < 1e-300] = 1.0
        cand *= (np.sqrt(power_budget) / cand_norm)[:, :, None]
        cand_gain = np.einsum("bsn,bkn->bsk", cand, h_batch)
        cand_snr = (cand_gain.real**2 + cand_gain.imag**2) / noises[None, None, :]
        f_cand = cand_snr.min(axis=2)

        best_idx = np.argmax(f_cand, axis=1)
        f_best = f_cand[np.arange(b_sz), best_idx]
        improved = active & (f_best > f_cur)
        rel_gain = np.zeros(b_sz)
        denom = np.maximum(f_cur, 1e-300)
        rel_gain[improved] = (f_best[improved] - f_cur[improved]) / denom[improved]

        u[improved] = cand[np.arange(b_sz), best_idx][improved]
        f_cur[improved] = f_best[improved]
        step[improved] = np.minimum(step[improved] * 1.5, 4.0)
        stalled = active & ~improved
        step[stalled] *= 0.125
        iters[active] += 1

        converged |= stalled & (step < 1e-6)
        converged |= improved & (rel_gain < tol)
        if history is not None:
            history.append(f_cur.copy())
    return u, f_cur, iters, converged


def _plane_grid(b1: np.ndarray, b2: np.ndarray) -> np.ndarray:
    """Unit vectors on a (t, phi) mesh of the plane spanned by b1 and b2."""
    t = np.linspace(0.0, 0.5 * np.pi, 17)
    phi = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)
    tt, pp = np.meshgrid(t, phi, indexing="ij")
    mix = (np.sin(tt) * np.exp(1j * pp)).ravel()
    return np.cos(tt).ravel()[:, None] * b1[None, :] + mix[:, None] * b2[None, :]


def _stall_escape_candidates(rows: np.ndarray, u: np.ndarray,
                             snrs: np.ndarray,
                             power_budget: float) -> np.ndarray:
    """Full-power probes for leaving a kink of the min-SNR surface.

    Where two or more receivers tie at the minimum the softmin direction
    can fail its line search even though ascent directions exist.  The
    probes sweep the planes spanned by the weakest receivers' matched
    filters (plus the current beamformer), which is where balancing moves
    live; degenerate planes are dropped.
    """
    order = np.argsort(snrs)
    near = order[:min(4, order.size)]
    mf = rows.conj()
    planes = [(u, mf[near[0]])]
    for i in range(near.size):
        for j in range(i + 1, near.size):
            planes.append((mf[near[i]], mf[near[j]]))
    grids = []
    for v1, v2 in planes:
        n1 = float(np.linalg.norm(v1))
        if n1 < 1e-12:
            continue
        b1 = v1 / n1
        v2p = v2 - (b1.conj() @ v2) * b1
        n2 = float(np.linalg.norm(v2p))
        if n2 < 1e-12:
            continue
        grids.append(_plane_grid(b1, v2p / n2))
    if not grids:
        return np.zeros((0, rows.shape[1]), dtype=complex)
    return np.sqrt(power_budget) * np.vstack(grids)


def solve_max_min_iterative(channels, power_budget: float, noise_powers,
                            u_init: np.ndarray, max_iters: int = 200,
                            tol: float = 1e-6) -> MaxMinSolution:
    """Iterative SNR-increasing updates for the max-min objective.

    Monotone by construction: an update is accepted only when the worst
    reported receiver's SNR does not decrease, so the objective trace is
    nondecreasing and worst case the initial beamformer comes back
    unchanged.  When the gradient ascent stalls on a kink, deterministic
    plane probes look for a strictly better full-power beamformer and the
    ascent resumes from an accepted probe; probes that do not improve are
    discarded, which keeps the monotone contract intact.
    """
    rows = model.as_rows(channels)
    noises = _noise_vector(noise_powers, rows.shape[0])
    u_init = np.asarray(u_init, dtype=complex)
    if np.vdot(u_init, u_init).real > power_budget * (1.0 + 1e-9):
        raise ValueError("initial beamformer exceeds the power budget")
    history: list = []
    u_arr, f_val, iters, conv = ascend_max_min_batch(
        rows[None, :, :], power_budget, noises, u_init[None, :],
        max_iters=max_iters, tol=tol, history=history)
    u, best = u_arr[0], float(f_val[0])
    n_iters = int(iters[0])
    converged = bool(conv[0])
    trace = [float(h[0]) for h in history]

    for _ in range(8):
        gains = rows @ u
        snrs = (gains.real**2 + gains.imag**2) / noises
        cands = _stall_escape_candidates(rows, u, snrs, power_budget)
        if cands.shape[0] == 0:
            break
        c_gain = cands @ rows.T
        c_snr = (c_gain.real**2 + c_gain.imag**2) / noises[None, :]
        f_c = c_snr.min(axis=1)
        pick = int(np.argmax(f_c))
        if not f_c[pick] > best * (1.0 + max(tol, 1e-9)):
            break
        resumed: list = []
        u_arr, f_val, iters, conv = ascend_max_min_batch(
            rows[None, :, :], power_budget, noises, cands[pick][None, :],
            max_iters=max_iters, tol=tol, history=resumed)
        u, best = u_arr[0], float(f_val[0])
        n_iters += 1 + int(iters[0])
        converged = bool(conv[0])
        trace.extend(float(h[0]) for h in resumed)
    return MaxMinSolution(u, best, n_iters, converged, trace)


def solve_max_min_sdr(channels, power_budget: float, noise_powers,
                      n_draws: int = 1000,
                      rng: np.random.Generator | None = None,
                      polish_iters: int = 60) -> MaxMinSolution:
    """Max-min SNR via the epigraph SDP plus randomization.

    Relaxation over the (n+1)-dimensional block variable W = [[U, *], [*, t]]:
    maximize t s.t. trace(U G_k) - t sigma_k^2 >= 0, trace(U) <= P, W PSD.
    Candidates are randomized from U at full power and the best one gets a
    short monotone ascent polish, which keeps the power cap intact.
    """
    rows = model.as_rows(channels)
    n_rx, n_tx = rows.shape
    noises = _noise_vector(noise_powers, n_rx)

    dim = n_tx + 1
    constraints = []
    for k in range(n_rx):
        mat = np.zeros((dim, dim), dtype=complex)
        mat[:n_tx, :n_tx] = np.outer(rows[k].conj(), rows[k])
        mat[n_tx, n_tx] = -noises[k]
        constraints.append((mat, ">=", 0.0))
    cap = np.zeros((dim, dim), dtype=complex)
    cap[:n_tx, :n_tx] = np.eye(n_tx)
    constraints.append((cap, "<=", power_budget))
    objective = np.zeros((dim, dim), dtype=complex)
    objective[n_tx, n_tx] = 1.0

    sol = numerics.sdp_solve(numerics.SdpProblem(objective, constraints,
                                                 maximize=True))
    if sol.status != STATUS_OPTIMAL:
        # fall back to a matched filter on the first row plus ascent
        fallback = solve_max_min_iterative(rows, power_budget, noises,
                                           rows[0].conj(), max_iters=200)
        return MaxMinSolution(fallback.beamformer, fallback.min_snr,
                              fallback.iterations, False)

    u_mat = sol.u_opt[:n_tx, :n_tx]

    def rescale(cands):
        norms = np.linalg.norm(cands, axis=1)
        norms = np.where(norms < 1e-300, 1.0, norms)
        return cands * (np.sqrt(power_budget) / norms)[:, None]

    def check(cands):
        powers = np.einsum("ij,ij->i", cands.conj(), cands).real
        return powers <= power_budget * (1.0 + 1e-9)

    def min_snr_of(cands):
        snrs = np.abs(cands @ rows.T) ** 2 / noises[None, :]
        return snrs.min(axis=1)

    rand = numerics.randomize_rank1(u_mat, check, n_draws=n_draws, rng=rng,
                                    rescale=rescale, objective=min_snr_of,
                                    maximize=True, sdp_bound=sol.objective)
    if not rand.found:  # pragma: no cover - full-power rescale always passes
        rand_u = np.sqrt(power_budget) * numerics.principal_eigenvector(u_mat)[1]
    else:
        rand_u = rand.beamformer

    if polish_iters > 0:
        u_arr, f_val, _, _ = ascend_max_min_batch(
            rows[None, :, :], power_budget, noises, rand_u[None, :],
            max_iters=polish_iters, tol=1e-9)
        u_fin, min_snr = u_arr[0], float(f_val[0])
    else:
        u_fin = rand_u
        min_snr = float(min_snr_of(rand_u[None, :])[0])
    return MaxMinSolution(u_fin, min_snr, sol.iterations, True)


def min_rate_objective(channels_legit, u: np.ndarray, noise_powers) -> float:
    """Worst legitimate receiver's rate; thin delegate kept so experiments
    can treat the min-rate objective uniformly with the SNR ones."""
    rows = model.as_rows(channels_legit)
    return model.min_rate(rows, u, _noise_vector(noise_powers, rows.shape[0]))
