"""Dense primal-dual interior-point solver for small real symmetric SDPs.

Internal standard form, after adding one nonnegative slack per inequality:

    minimize    tr(C X)
    subject to  tr(A_i X) + d_i v_i = b_i,   i = 1..m
                X >= 0 (PSD),  v_i >= 0

where d_i = +1 for a <= row, -1 for a >= row and 0 for an equality.  The
search direction is the HKM direction with Mehrotra predictor-corrector
steps; the Schur complement is

    M_ij = tr(A_i X A_j S^{-1})  (+ d_i^2 v_i / w_i on the diagonal)

which is symmetric for symmetric data.  Problem data is scaled to unit
Frobenius norm per constraint plus a global right-hand-side scale before
iterating, and all stopping tests are applied to the scaled problem.

Sizes here are tiny (n <= 64, m of order 10) but the solver sits inside
Monte Carlo attack loops, so the iteration body sticks to flat BLAS calls
(reshaped matmuls, factor reuse) rather than einsum conveniences.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_MAX_ITERATIONS = "max_iterations"

# fraction-to-boundary factor for both primal and dual steps
_STEP_FRACTION = 0.98
# dual variables larger than this (scaled problem) flag primal infeasibility
_DIVERGENCE_LIMIT = 1e8


@dataclass
class RealSdpResult:
    """Solution of the real symmetric cone program.

    ``x`` and ``objective`` are reported in the original (unscaled) units;
    ``residuals`` holds per-constraint violations of the scaled problem,
    which is what the stopping tolerance refers to.
    """

    status: str
    objective: float
    x: np.ndarray | None
    y: np.ndarray | None
    iterations: int
    residuals: np.ndarray | None = None
    gap: float = np.inf


def _sense_to_d(senses) -> np.ndarray:
    table = {"<=": 1.0, ">=": -1.0, "==": 0.0, "=": 0.0}
    try:
        return np.array([table[s] for s in senses], dtype=float)
    except KeyError as exc:
        raise ValueError(f"unknown constraint sense {exc.args[0]!r}") from None


def _psd_step_limit(l_inv: np.ndarray, dmat: np.ndarray) -> float:
    """Largest alpha <= 1 keeping L L^T + alpha*dmat PSD, l_inv = L^{-1}."""
    scal = l_inv @ dmat @ l_inv.T
    lam_min = np.linalg.eigvalsh(0.5 * (scal + scal.T))[0]
    if lam_min >= -1e-14:
        return 1.0
    return min(1.0, -1.0 / lam_min)


def _lp_step_limit(v: np.ndarray, dv: np.ndarray) -> float:
    ratio = np.where(dv < 0, -v / np.where(dv < 0, dv, -1.0), 1.0)
    return float(min(1.0, ratio.min())) if ratio.size else 1.0


def _spd_factor(m_mat: np.ndarray):
    """Cholesky with escalating diagonal regularization on breakdown."""
    reg = 0.0
    base = max(np.trace(m_mat) / max(m_mat.shape[0], 1), 1.0)
    for _ in range(8):
        try:
            return np.linalg.cholesky(m_mat + reg * np.eye(m_mat.shape[0]))
        except np.linalg.LinAlgError:
            reg = base * 1e-13 if reg == 0.0 else reg * 100.0
    return None


def _zero_row_feasible(d_i: float, b_i: float, tol: float = 1e-12) -> bool:
    # tr(0*X) + d v = b with v >= 0
    if d_i == 0.0:
        return abs(b_i) <= tol
    return d_i * b_i >= -tol


def solve_real_sdp(c: np.ndarray, a: np.ndarray, senses, b: np.ndarray,
                   max_iters: int = 100, tol: float = 1e-9) -> RealSdpResult:
    """Solve min tr(C X) s.t. tr(A_i X) (sense_i) b_i, X PSD.

    Args:
      c: (n, n) symmetric objective matrix.
      a: (m, n, n) stack of symmetric constraint matrices.
      senses: length-m sequence over {'<=', '>=', '=='}.
      b: (m,) right-hand sides.
      max_iters: interior-point iteration cap.
      tol: relative tolerance on duality gap and scaled residuals.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    n = c.shape[0]
    if a.ndim == 2:
        a = a[None]
    d_all = _sense_to_d(senses)

    # presolve: rows with a numerically zero matrix are decided immediately
    flat_all = a.reshape(a.shape[0], -1)
    a_norms = np.sqrt(np.sum(flat_all * flat_all, axis=1))
    zero_rows = a_norms <= 1e-14
    for i in np.nonzero(zero_rows)[0]:
        if not _zero_row_feasible(d_all[i], b[i]):
            return RealSdpResult(STATUS_INFEASIBLE, np.inf, None, None, 0)
    keep = ~zero_rows
    a, b, d, s_row = a[keep], b[keep], d_all[keep], a_norms[keep]
    m = a.shape[0]

    # scaling: unit Frobenius norm per constraint, then a global rhs scale;
    # the objective gets its own scale so tolerances are dimension-free
    if m:
        a = a / s_row[:, None, None]
        b = b / s_row
    tau_b = max(1.0, float(np.max(np.abs(b))) if m else 0.0)
    tau_c = max(1.0, float(np.linalg.norm(c)))
    b = b / tau_b
    c_s = c / tau_c

    if m == 0:
        # unconstrained over the PSD cone: either X = 0 or a ray to -inf
        if np.linalg.eigvalsh(c_s)[0] >= -1e-12:
            return RealSdpResult(STATUS_OPTIMAL, 0.0, np.zeros((n, n)),
                                 np.zeros(0), 0, np.zeros(0), 0.0)
        return RealSdpResult(STATUS_UNBOUNDED, -np.inf, None, None, 0)

    a_flat = a.reshape(m, n * n)  # rows symmetric, so tr(A_i G)=a_flat@g.ravel()
    ineq = d != 0.0
    n_lp = int(np.count_nonzero(ineq))
    cone_size = n + n_lp
    eye_n = np.eye(n)
    w_safe = lambda arr: np.where(ineq, arr, 1.0)

    eta_p = 1.0 + float(np.max(np.abs(b)))
    eta_d = 1.0 + float(np.linalg.norm(c_s))
    x = eta_p * np.eye(n)
    s = eta_d * np.eye(n)
    y = np.zeros(m)
    v = np.where(ineq, eta_p, 0.0)
    w = np.where(ineq, eta_d, 0.0)

    norm_b = 1.0 + float(np.linalg.norm(b))
    norm_c = 1.0 + float(np.linalg.norm(c_s))

    status = STATUS_MAX_ITERATIONS
    it = 0
    for it in range(1, max_iters + 1):
        rp = b - a_flat @ x.ravel() - d * v
        rd = c_s - s - (y @ a_flat).reshape(n, n)
        rl = np.where(ineq, -(d * y + w), 0.0)

        obj_p = float(np.sum(c_s * x))
        obj_d = float(b @ y)
        gap = abs(obj_p - obj_d) / (1.0 + abs(obj_p) + abs(obj_d))
        rp_rel = float(np.linalg.norm(rp)) / norm_b
        rd_rel = (float(np.linalg.norm(rd)) + float(np.linalg.norm(rl))) / norm_c

        if gap <= tol and rp_rel <= tol and rd_rel <= tol:
            status = STATUS_OPTIMAL
            break
        if float(np.linalg.norm(y)) > _DIVERGENCE_LIMIT:
            # dual ray: the dual improves without bound, primal empty
            return RealSdpResult(STATUS_INFEASIBLE, np.inf, None, None, it)
        if obj_p < -_DIVERGENCE_LIMIT and rp_rel <= 1e-6:
            return RealSdpResult(STATUS_UNBOUNDED, -np.inf, None, None, it)

        mu = (float(np.sum(x * s)) + float(v[ineq] @ w[ineq])) / cone_size

        s_chol = _spd_factor(s)
        x_chol = _spd_factor(x)
        if s_chol is None or x_chol is None:  # pragma: no cover - guarded
            break
        s_linv = sla.solve_triangular(s_chol, eye_n, lower=True,
                                      check_finite=False)
        x_linv = sla.solve_triangular(x_chol, eye_n, lower=True,
                                      check_finite=False)
        s_inv = s_linv.T @ s_linv

        lp_ratio = np.where(ineq, v / w_safe(w), 0.0)
        u_stack = np.matmul(x, np.matmul(a, s_inv))
        m_schur = a_flat @ u_stack.transpose(0, 2, 1).reshape(m, n * n).T
        m_schur = 0.5 * (m_schur + m_schur.T) + np.diag(d * d * lp_ratio)
        m_chol = _spd_factor(m_schur)

        f_mat = x @ rd @ s_inv
        base_rhs = rp + a_flat @ f_mat.T.ravel() + d * lp_ratio * rl

        def hkm_direction(e_mat, e_lp):
            rhs = base_rhs - a_flat @ e_mat.T.ravel() - d * e_lp / w_safe(w)
            if m_chol is not None:
                dy = sla.cho_solve((m_chol, True), rhs, check_finite=False)
            else:  # pragma: no cover - singular Schur fallback
                dy = np.linalg.lstsq(m_schur, rhs, rcond=None)[0]
            ds = rd - (dy @ a_flat).reshape(n, n)
            dx_raw = e_mat - x @ ds @ s_inv
            dx = 0.5 * (dx_raw + dx_raw.T)
            dw = np.where(ineq, rl - d * dy, 0.0)
            dv = np.where(ineq, (e_lp - v * dw) / w_safe(w), 0.0)
            return dx, dv, dy, ds, dw

        # predictor: pure Newton step toward the boundary (sigma = 0)
        dx_a, dv_a, dy_a, ds_a, dw_a = hkm_direction(-x, np.where(ineq, -v * w, 0.0))
        alpha_p = _STEP_FRACTION * min(_psd_step_limit(x_linv, dx_a),
                                       _lp_step_limit(v[ineq], dv_a[ineq]))
        alpha_d = _STEP_FRACTION * min(_psd_step_limit(s_linv, ds_a),
                                       _lp_step_limit(w[ineq], dw_a[ineq]))
        mu_aff = (float(np.sum((x + alpha_p * dx_a) * (s + alpha_d * ds_a)))
                  + float((v + alpha_p * dv_a)[ineq] @ (w + alpha_d * dw_a)[ineq]))
        mu_aff = max(mu_aff / cone_size, 0.0)
        sigma = min(1.0, max((mu_aff / mu) ** 3, 1e-8))

        # corrector: recentre and compensate the second-order term
        e_mat = sigma * mu * s_inv - x - dx_a @ ds_a @ s_inv
        e_lp = np.where(ineq, sigma * mu - v * w - dv_a * dw_a, 0.0)
        dx, dv, dy, ds, dw = hkm_direction(e_mat, e_lp)

        alpha_p = _STEP_FRACTION * min(_psd_step_limit(x_linv, dx),
                                       _lp_step_limit(v[ineq], dv[ineq]))
        alpha_d = _STEP_FRACTION * min(_psd_step_limit(s_linv, ds),
                                       _lp_step_limit(w[ineq], dw[ineq]))
        x = x + alpha_p * dx
        v = v + alpha_p * dv
        y = y + alpha_d * dy
        s = s + alpha_d * ds
        w = w + alpha_d * dw

    slack = b - a_flat @ x.ravel()
    viol = np.where(d > 0, np.maximum(-slack, 0.0),
                    np.where(d < 0, np.maximum(slack, 0.0), np.abs(slack)))
    obj_s = float(np.sum(c_s * x))
    gap = abs(obj_s - float(b @ y)) / (1.0 + abs(obj_s) + abs(float(b @ y)))
    return RealSdpResult(status, tau_b * tau_c * obj_s, tau_b * x,
                         tau_c * y / s_row, it, viol, gap)


def embed_hermitian(a: np.ndarray) -> np.ndarray:
    """Map a Hermitian matrix to its 2n x 2n real symmetric embedding.

    A -> [[Re A, -Im A], [Im A, Re A]]; traces double under the map:
    tr(embed(A) embed(X)) = 2 tr(A X) for Hermitian A, X.
    """
    re, im = a.real, a.imag
    return np.block([[re, -im], [im, re]])


def recover_hermitian(x_real: np.ndarray) -> np.ndarray:
    """Invert the real embedding, averaging out floating-point asymmetry.

    The feasible set and objective of the embedded problem are invariant
    under conjugation by J = [[0, -I], [I, 0]], so the central path stays in
    the image of the embedding; averaging the two diagonal blocks (and the
    two off-diagonal blocks) projects back onto it.
    """
    n = x_real.shape[0] // 2
    x11 = x_real[:n, :n]
    x12 = x_real[:n, n:]
    x21 = x_real[n:, :n]
    x22 = x_real[n:, n:]
    herm = 0.5 * (x11 + x22) + 0.5j * (x21 - x12)
    return 0.5 * (herm + herm.conj().T)
