"""Numerical kernels: Hermitian eigen extraction, a small complex SDP
front end, and Gaussian randomization for rank-1 recovery.

The SDP front end embeds Hermitian data into real symmetric matrices of
twice the dimension and hands off to the interior-point core in
:mod:`poisonfb.sdp`; everything here is deterministic unless an explicit
random generator is supplied.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from poisonfb import sdp as _sdp
from poisonfb.sdp import (
    STATUS_INFEASIBLE,
    STATUS_MAX_ITERATIONS,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
)

# eigenvalues within this relative distance of the top one are treated as
# a degenerate cluster for tie-breaking purposes
_EIG_TIE_REL = 1e-8

_MAX_SDP_DIM = 64


def check_hermitian(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.allclose(a, a.conj().T, rtol=1e-12, atol=1e-12):
        raise ValueError(f"{name} is not Hermitian")
    return a


def principal_eigenvector(a: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a deterministically chosen unit eigenvector.

    Ties (eigenvalues within 1e-8 relative of the top) are broken by
    projecting the first standard basis vector onto the top eigenspace,
    which picks the eigenvector with the largest-magnitude first
    coordinate; the phase is then fixed so the largest-magnitude entry of
    the returned vector is real and nonnegative.  A zero matrix returns
    (0, e_1) by the same convention.
    """
    a = check_hermitian(a)
    n = a.shape[0]
    lams, vecs = np.linalg.eigh(a)
    lam_max = float(lams[-1])
    spread = max(abs(lam_max), abs(float(lams[0])))
    cluster = vecs[:, lams >= lam_max - _EIG_TIE_REL * spread]
    for k in range(n):
        proj = cluster @ cluster[k].conj()
        norm = float(np.linalg.norm(proj))
        if norm > 1e-8:
            vec = proj / norm
            break
    else:  # pragma: no cover - unreachable, cluster spans >= 1 direction
        vec = np.zeros(n, dtype=complex)
        vec[0] = 1.0
    top = int(np.argmax(np.abs(vec)))
    mag = abs(vec[top])
    if mag > 0:
        vec = vec * (vec[top].conj() / mag)
        vec[top] = vec[top].real + 0.0j
    return lam_max, vec


@dataclass
class SdpProblem:
    """min or max of trace(C U) over Hermitian PSD U under trace constraints.

    ``constraints`` is a list of (A, sense, b) with Hermitian A, sense in
    {'<=', '>=', '=='} and real b.
    """

    c: np.ndarray
    constraints: list
    maximize: bool = False

    def __post_init__(self):
        self.c = check_hermitian(self.c, "objective")
        n = self.c.shape[0]
        if n > _MAX_SDP_DIM:
            raise ValueError(f"dimension {n} exceeds supported size {_MAX_SDP_DIM}")
        if not self.constraints:
            raise ValueError("need at least one constraint")
        checked = []
        for idx, (mat, sense, bound) in enumerate(self.constraints):
            mat = check_hermitian(mat, f"constraint {idx}")
            if mat.shape[0] != n:
                raise ValueError("constraint dimension mismatch")
            checked.append((mat, sense, float(bound)))
        self.constraints = checked
        data = [self.c] + [mat for mat, _, _ in self.constraints]
        if not all(np.all(np.isfinite(mat)) for mat in data):
            raise ValueError("problem data must be finite")
        if not np.all(np.isfinite([bound for _, _, bound in self.constraints])):
            raise ValueError("problem data must be finite")

    @property
    def dimension(self) -> int:
        return self.c.shape[0]


@dataclass
class SdpSolution:
    """Status, optimizer and per-constraint violations of the scaled problem."""

    status: str
    u_opt: np.ndarray | None
    objective: float
    residuals: np.ndarray | None
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status == STATUS_OPTIMAL


def sdp_solve(problem: SdpProblem, max_iters: int = 100,
              tol: float = 1e-9) -> SdpSolution:
    """Solve a Hermitian SDP via the real symmetric embedding.

    Infeasibility and unboundedness are reported through the status field,
    never raised.  ``residuals`` refers to the embedded problem after its
    data is scaled to unit Frobenius norm per constraint.
    """
    sign = -1.0 if problem.maximize else 1.0
    c_r = _sdp.embed_hermitian(sign * problem.c)
    a_r = np.stack([_sdp.embed_hermitian(mat) for mat, _, _ in problem.constraints])
    senses = [sense for _, sense, _ in problem.constraints]
    b_r = np.array([2.0 * bound for _, _, bound in problem.constraints])

    res = _sdp.solve_real_sdp(c_r, a_r, senses, b_r, max_iters=max_iters, tol=tol)

    if res.status == STATUS_INFEASIBLE:
        return SdpSolution(res.status, None, sign * np.inf, None, res.iterations)
    if res.status == STATUS_UNBOUNDED:
        return SdpSolution(res.status, None, -sign * np.inf, None, res.iterations)
    u_opt = _sdp.recover_hermitian(res.x) if res.x is not None else None
    objective = sign * 0.5 * res.objective
    return SdpSolution(res.status, u_opt, objective, res.residuals, res.iterations)


@dataclass
class RandomizationResult:
    """Best feasible rank-1 candidate recovered from an SDP optimizer."""

    found: bool
    beamformer: np.ndarray | None
    objective: float
    bound_ratio: float
    n_feasible: int


def gaussian_candidates(u_opt: np.ndarray, n_draws: int,
                        rng: np.random.Generator) -> np.ndarray:
    """(n_draws + 1, n) candidates: the scaled principal eigenvector first,
    then draws v ~ CN(0, U_opt)."""
    n = u_opt.shape[0]
    lams, vecs = np.linalg.eigh(u_opt)
    lams = np.maximum(lams, 0.0)
    factor = vecs * np.sqrt(lams)
    z = (rng.standard_normal((n_draws, n))
         + 1j * rng.standard_normal((n_draws, n))) / np.sqrt(2.0)
    draws = z @ factor.T
    lam_top, vec_top = principal_eigenvector(0.5 * (u_opt + u_opt.conj().T))
    lead = np.sqrt(max(lam_top, 0.0)) * vec_top
    return np.vstack([lead[None, :], draws])


def randomize_rank1(u_opt: np.ndarray, feasibility_check, n_draws: int = 1000,
                    rng: np.random.Generator | None = None, rescale=None,
                    objective=None, maximize: bool = False,
                    sdp_bound: float | None = None) -> RandomizationResult:
    """Recover a beamformer from an SDP optimizer by Gaussian randomization.

    Draws candidates v ~ CN(0, U_opt) (plus the scaled principal
    eigenvector as a deterministic candidate), applies ``rescale`` to each,
    keeps those passing ``feasibility_check`` and returns the one with the
    best ``objective``.  All three callables are vectorized: they take an
    (m, n) stack of row vectors and return an (m, n) stack (rescale) or an
    (m,) array (check, objective).

    Args:
      u_opt: PSD matrix from the relaxation.
      feasibility_check: boolean mask of acceptable candidates.
      n_draws: Gaussian draws; the default matches common SDR practice.
      rng: generator for the draws; a fixed-seed default keeps the
        function deterministic when callers do not care about streams.
      rescale: minimal per-candidate rescaling toward feasibility
        (identity when omitted).
      objective: candidate score (squared norm when omitted).
      maximize: pick the largest score instead of the smallest.
      sdp_bound: relaxation bound used for the reported bound_ratio.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    u_opt = np.asarray(u_opt, dtype=complex)
    if rng is None:
        rng = np.random.default_rng(0)
    cands = gaussian_candidates(u_opt, n_draws, rng)
    if rescale is not None:
        cands = rescale(cands)
    if objective is None:
        scores = np.einsum("ij,ij->i", cands.conj(), cands).real
    else:
        scores = np.asarray(objective(cands), dtype=float)
    mask = np.asarray(feasibility_check(cands), dtype=bool)
    mask &= np.isfinite(scores)
    if not np.any(mask):
        return RandomizationResult(False, None, np.nan, np.nan, 0)
    idx = np.nonzero(mask)[0]
    pick = idx[np.argmax(scores[idx])] if maximize else idx[np.argmin(scores[idx])]
    best = cands[pick]
    best_score = float(scores[pick])
    ratio = np.nan
    if sdp_bound is not None and sdp_bound != 0:
        ratio = best_score / sdp_bound
    return RandomizationResult(True, best, best_score, ratio, int(mask.sum()))


def qos_grid_oracle(grams: np.ndarray, snr_target: float,
                    noise_powers, step: float = 0.02) -> float:
    """Brute-force reference optimum for the 2x2 QoS power-min problem.

    Enumerates Cholesky factors L = [[a, 0], [c + i d, b]] on a regular
    grid (a, b in [0, 1]; c, d in [-1, 1]) and rescales each shape
    U = L L^H to the smallest multiple satisfying every constraint
    tr(U G_k) >= target * noise_k.  The problem is scale invariant, so
    normalized shapes cover the PSD cone and grid resolution is the only
    source of error.  Meant for offline derivation of reference values
    and slow tests, not for production solves.
    """
    grams = np.asarray(grams, dtype=complex)
    if grams.ndim != 3 or grams.shape[1:] != (2, 2):
        raise ValueError("grid oracle only handles stacks of 2x2 constraints")
    if snr_target <= 0 or step <= 0:
        raise ValueError("snr_target and step must be positive")
    noise = np.broadcast_to(np.asarray(noise_powers, dtype=float),
                            (grams.shape[0],))
    bounds = snr_target * noise

    n_unit = int(round(1.0 / step))
    diag = np.linspace(0.0, 1.0, n_unit + 1)
    off = np.linspace(-1.0, 1.0, 2 * n_unit + 1)
    cc, dd = np.meshgrid(off, off, indexing="ij")
    off_c = (cc + 1j * dd).ravel()
    off_sq = (cc * cc + dd * dd).ravel()

    g00 = grams[:, 0, 0].real
    g11 = grams[:, 1, 1].real
    g01 = grams[:, 0, 1]

    best = np.inf
    for a in diag:
        u11 = a * a
        u21 = a * off_c
        # tr(U G_k) = U11 G00 + U22 G11 + 2 Re(U21 G01) for Hermitian G_k
        cross = 2.0 * (u21[None, :] * g01[:, None]).real
        for b in diag:
            u22 = b * b + off_sq
            tr_u = u11 + u22
            gains = u11 * g00[:, None] + u22 * g11[:, None] + cross
            with np.errstate(divide="ignore", invalid="ignore"):
                scale = np.max(bounds[:, None] / gains, axis=0)
            ok = np.all(gains > 0.0, axis=0)
            if np.any(ok):
                cand = np.min(scale[ok] * tr_u[ok])
                if cand < best:
                    best = cand
    if not np.isfinite(best):
        raise ValueError("no strictly feasible direction on the grid")
    return float(best)
