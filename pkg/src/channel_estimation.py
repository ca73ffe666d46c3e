"""
Channel estimation module for noma-lab
Non-orthogonal pilot despreading, MMSE effective-channel estimate and the
statistical decomposition of each user's channel around the shared estimate
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.system_model import SeedSpec, SystemConfig, complex_gaussian

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimationModel:
    """Correlation coefficients rho[m][n] (Eve at n=0), S_m and the MMSE scaling per cluster"""
    rho: Tuple[Tuple[float, ...], ...]
    cluster_pilot_energy: Tuple[float, ...]
    mmse_gain: Tuple[float, ...]

    def eve_rho(self, m: int) -> float:
        return self.rho[m][0]


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """
    One draw of every small-scale vector of the scenario.

    ``true_channels[m]`` has shape (N_m + 1, N_t) with the Eve channel g_m in
    row 0; the per-cluster vectors below all have shape (M, N_t).
    """
    true_channels: Tuple[np.ndarray, ...]
    despread_obs: np.ndarray
    estimate: np.ndarray
    normalized_estimate: np.ndarray
    degenerate: Tuple[bool, ...]


@dataclass(frozen=True, eq=False)
class ChannelDecomposition:
    """
    Coefficients of h = sqrt(rho) * h_hat + sqrt(1 - rho) * e.

    ``residual`` is the empirical error vector e when requested; it is None with
    ``zero_residual`` set when rho == 1 leaves no error component.
    """
    signal_coeff: float
    error_coeff: float
    residual: Optional[np.ndarray] = None
    zero_residual: bool = False


def compute_rho(config: SystemConfig) -> EstimationModel:
    """rho[m][n] = alpha Q tau / (1 + S_m) with S_m = sum_i alpha_i Q_i tau over users and Eve"""
    rho_rows = []
    energies = []
    gains = []
    tau = config.pilot_length
    for m in range(config.n_clusters):
        terms = [alpha * q * tau for alpha, q in zip(config.path_loss[m], config.pilot_power[m])]
        energy = math.fsum(terms)
        rho_rows.append(tuple(term / (1.0 + energy) for term in terms))
        energies.append(energy)
        gains.append(math.sqrt(energy) / (1.0 + energy))
        if energy == 0.0:
            logger.debug(f"Cluster {m + 1} has zero pilot energy; beam direction will be isotropic")
    return EstimationModel(tuple(rho_rows), tuple(energies), tuple(gains))


def simulate_estimation(config: SystemConfig, seed: SeedSpec,
                        model: Optional[EstimationModel] = None) -> ChannelRealization:
    """
    Draw all channels and pilot noise for one slot and form the MMSE estimate.

    Cross-cluster pilot orthogonality makes per-cluster despreading exact, so the
    despread observation is generated directly rather than through pilot matrices.
    Draw order per cluster: channels (Eve first), pilot noise, fallback direction.
    """
    if model is None:
        model = compute_rho(config)
    rng = seed.rng()
    n_antennas = config.n_antennas
    tau = config.pilot_length

    channels = []
    observations = np.empty((config.n_clusters, n_antennas), dtype=np.complex128)
    estimates = np.empty_like(observations)
    normalized = np.empty_like(observations)
    degenerate = []

    for m in range(config.n_clusters):
        h = complex_gaussian(rng, (config.cluster_sizes[m] + 1, n_antennas))
        noise = complex_gaussian(rng, n_antennas)
        fallback = complex_gaussian(rng, n_antennas)

        amplitudes = np.sqrt(np.asarray(config.path_loss[m]) * np.asarray(config.pilot_power[m]) * tau)
        observations[m] = amplitudes @ h + noise

        energy = model.cluster_pilot_energy[m]
        if energy > 0.0:
            estimates[m] = model.mmse_gain[m] * observations[m]
            normalized[m] = estimates[m] * math.sqrt((1.0 + energy) / energy)
            degenerate.append(False)
        else:
            estimates[m] = 0.0
            normalized[m] = fallback
            degenerate.append(True)
        channels.append(h)

    return ChannelRealization(
        true_channels=tuple(channels),
        despread_obs=observations,
        estimate=estimates,
        normalized_estimate=normalized,
        degenerate=tuple(degenerate),
    )


def decompose_channel(realization: ChannelRealization, model: EstimationModel, m: int, n: int,
                      with_residual: bool = False) -> ChannelDecomposition:
    """
    Split h_{m,n} into its estimate-aligned part and the estimation error.

    Args:
        m: cluster (0-based)
        n: 0 for the Eve, 1..N_m for users
        with_residual: also return the empirical error vector e_{m,n}
    """
    rho = model.rho[m][n]
    signal_coeff = math.sqrt(rho)
    error_coeff = math.sqrt(max(0.0, 1.0 - rho))

    if error_coeff == 0.0:
        return ChannelDecomposition(signal_coeff, 0.0, residual=None, zero_residual=True)
    if not with_residual:
        return ChannelDecomposition(signal_coeff, error_coeff)

    h = realization.true_channels[m][n]
    residual = (h - signal_coeff * realization.normalized_estimate[m]) / error_coeff
    return ChannelDecomposition(signal_coeff, error_coeff, residual=residual)
