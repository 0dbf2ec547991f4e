"""Physical-layer model: channels, SNR, rates, and the open-loop baseline.

Conventions used throughout the library:

* a channel is a length-``n_tx`` complex row vector ``h`` (flat fading);
* a beamformer is a length-``n_tx`` complex vector ``u`` whose squared norm
  carries the transmit power, so the received SNR is ``|h @ u|**2 / noise``;
* everything works in linear scale; dB conversion happens only at the
  experiment/CLI boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def db_to_linear(x_db: float) -> float:
    return float(10.0 ** (x_db / 10.0))


def linear_to_db(x: float) -> float:
    return float(10.0 * np.log10(x))


@dataclass(frozen=True)
class SystemConfig:
    """Static parameters of one multicast link.

    ``power_budget``, ``snr_target`` and ``noise_powers`` are linear-scale.
    ``n_legit`` counts the truthful receivers; when ``has_adversary`` is set
    the total receiver count is ``n_legit + 1``.
    """

    n_tx: int
    n_legit: int
    power_budget: float
    snr_target: float
    noise_powers: np.ndarray
    has_adversary: bool = True

    def __post_init__(self):
        if self.n_tx < 1 or self.n_legit < 1:
            raise ValueError("n_tx and n_legit must be >= 1")
        if self.power_budget <= 0 or self.snr_target <= 0:
            raise ValueError("power budget and SNR target must be positive")
        noises = np.atleast_1d(np.asarray(self.noise_powers, dtype=float))
        if noises.size == 1:
            noises = np.full(self.n_total, float(noises[0]))
        if noises.size != self.n_total:
            raise ValueError("need one noise power per receiver")
        if np.any(noises <= 0):
            raise ValueError("noise powers must be positive")
        object.__setattr__(self, "noise_powers", noises)

    @property
    def n_total(self) -> int:
        return self.n_legit + (1 if self.has_adversary else 0)


@dataclass
class ChannelMatrix:
    """Stack of reported channel rows, with the adversary's row tagged.

    ``rows`` has shape (K, n_tx); ``adversary_index`` is None when every row
    is a truthful report.
    """

    rows: np.ndarray
    adversary_index: int | None = None

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=complex))
        if self.adversary_index is not None:
            if not 0 <= self.adversary_index < self.rows.shape[0]:
                raise ValueError("adversary_index out of range")

    @property
    def n_rx(self) -> int:
        return self.rows.shape[0]

    @property
    def legit_rows(self) -> np.ndarray:
        if self.adversary_index is None:
            return self.rows
        keep = [k for k in range(self.n_rx) if k != self.adversary_index]
        return self.rows[keep]


def as_rows(channels) -> np.ndarray:
    """Coerce a ChannelMatrix or array-like into a (K, n_tx) complex array."""
    rows = channels.rows if isinstance(channels, ChannelMatrix) else channels
    return np.atleast_2d(np.asarray(rows, dtype=complex))


def generate_channel(rng: np.random.Generator, n_tx: int) -> np.ndarray:
    """Draw one CN(0, 1) channel row: unit-variance entries, E||h||^2 = n_tx."""
    if n_tx < 1:
        raise ValueError("n_tx must be >= 1")
    re = rng.standard_normal(n_tx)
    im = rng.standard_normal(n_tx)
    return (re + 1j * im) / np.sqrt(2.0)


def snr(h: np.ndarray, u: np.ndarray, noise_power: float) -> float:
    """Received SNR |h @ u|^2 / noise for one receiver."""
    h = np.asarray(h, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if h.shape != u.shape:
        raise ValueError(f"dimension mismatch: {h.shape} vs {u.shape}")
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    gain = np.dot(h, u)
    return float((gain.real**2 + gain.imag**2) / noise_power)


def all_snrs(channels, u: np.ndarray, noise_powers) -> np.ndarray:
    """Vector of per-receiver SNRs for a stack of channel rows."""
    rows = as_rows(channels)
    gains = rows @ np.asarray(u, dtype=complex)
    return (gains.real**2 + gains.imag**2) / np.asarray(noise_powers, dtype=float)


def min_rate(channels, u: np.ndarray, noise_powers) -> float:
    """Worst-receiver information rate min_k log2(1 + SNR_k) in bits/s/Hz.

    Callers pass legitimate rows only; the adversary has no use for the
    multicast payload and is excluded from every performance metric.
    """
    rows = as_rows(channels)
    if rows.shape[0] == 0:
        raise ValueError("empty receiver set")
    return float(np.log2(1.0 + all_snrs(rows, u, noise_powers)).min())


def isotropic_baseline_snr(h: np.ndarray, power_budget: float, n_tx: int,
                           noise_power: float) -> float:
    """Open-loop SNR under isotropic transmission.

    With transmit covariance (P/n_tx) I the received SNR is
    (P/n_tx) ||h||^2 / noise; no feedback is needed.
    """
    h = np.asarray(h, dtype=complex)
    return float((power_budget / n_tx) * np.vdot(h, h).real / noise_power)
