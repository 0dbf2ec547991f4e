"""Shared brute-force oracles for the test suite.

The beamformer grid covers C^2 up to the global phase, which no SNR-type
objective can see, so a dense enough grid is an exhaustive reference for
every two-antenna solver in the package.
"""
import numpy as np
import pytest


def _unit_beamformer_grid(n_theta: int = 100, n_phi: int = 100) -> np.ndarray:
    """(n_theta * n_phi, 2) unit vectors u = [cos t, sin t * e^{i p}]."""
    t = np.linspace(0.0, np.pi / 2.0, n_theta)
    p = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    tt, pp = np.meshgrid(t, p, indexing="ij")
    return np.stack([np.cos(tt).ravel() + 0j,
                     np.sin(tt).ravel() * np.exp(1j * pp.ravel())], axis=1)


def _grid_required_power(rows, snr_target, noises, grid) -> float:
    """Best rank-1 power meeting SNR_k >= target for all k, on the grid."""
    gains = np.abs(grid @ rows.T) ** 2
    bounds = snr_target * np.asarray(noises, dtype=float)
    with np.errstate(divide="ignore"):
        power = np.max(bounds[None, :] / gains, axis=1)
    power = power[np.isfinite(power)]
    return float(np.min(power))


def _grid_best_min_snr(rows, power_budget, noises, grid) -> float:
    """Best worst-user SNR over full-power beamformers on the grid."""
    gains = np.abs(grid @ rows.T) ** 2 * power_budget
    snrs = gains / np.asarray(noises, dtype=float)[None, :]
    return float(np.max(snrs.min(axis=1)))


def _grid_best_sum_snr(rows, power_budget, noises, grid) -> float:
    gains = np.abs(grid @ rows.T) ** 2 * power_budget
    snrs = gains / np.asarray(noises, dtype=float)[None, :]
    return float(np.max(snrs.sum(axis=1)))


@pytest.fixture(scope="session")
def unit_grid2() -> np.ndarray:
    return _unit_beamformer_grid()


@pytest.fixture(scope="session")
def grid_required_power():
    return _grid_required_power


@pytest.fixture(scope="session")
def grid_best_min_snr():
    return _grid_best_min_snr


@pytest.fixture(scope="session")
def grid_best_sum_snr():
    return _grid_best_sum_snr


def random_rows(rng: np.random.Generator, n_rx: int, n_tx: int) -> np.ndarray:
    return (rng.standard_normal((n_rx, n_tx))
            + 1j * rng.standard_normal((n_rx, n_tx))) / np.sqrt(2.0)


@pytest.fixture(scope="session")
def rows_factory():
    return random_rows
