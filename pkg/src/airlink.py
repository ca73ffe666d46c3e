"""
Downlink airlink module for noma-lab
MRT beams, SIC decoding order and per-realization SINRs of users and eavesdroppers
"""
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.channel_estimation import ChannelRealization
from src.system_model import SystemConfig

logger = logging.getLogger(__name__)

ORDERINGS = ('realized', 'configured')


@dataclass(frozen=True, eq=False)
class BeamSet:
    """Unit-norm MRT beam per cluster, shape (M, N_t)"""
    beams: np.ndarray

    def __getitem__(self, m: int) -> np.ndarray:
        return self.beams[m]


@dataclass(frozen=True, eq=False)
class SinrRecord:
    """
    Instantaneous SINRs of one realization, per cluster arrays indexed by n - 1.

    ``effective_gains[m][n-1]`` is alpha_{m,n} |h_{m,n}^H w_m|^2 and
    ``sic_orders[m]`` the decoding order (1-based user indices, strongest first).
    """
    legit_sinr: Tuple[np.ndarray, ...]
    eve_sinr: Tuple[np.ndarray, ...]
    effective_gains: Tuple[np.ndarray, ...]
    sic_orders: Tuple[Tuple[int, ...], ...]


def make_beams(realization: ChannelRealization, source: str = 'normalized') -> BeamSet:
    """
    w_m = h_hat_m / ||h_hat_m||.

    Args:
        source: 'normalized' or 'estimate'; MRT is scale invariant so both agree.
                A zero estimate falls back to the isotropic direction held in
                the normalized estimate.
    """
    if source not in ('normalized', 'estimate'):
        raise ValueError(f"Unknown beam source: '{source}'")
    vectors = realization.normalized_estimate if source == 'normalized' else realization.estimate

    beams = np.empty_like(realization.normalized_estimate)
    for m in range(vectors.shape[0]):
        norm = np.linalg.norm(vectors[m])
        if norm > 0.0:
            beams[m] = vectors[m] / norm
        else:
            fallback = realization.normalized_estimate[m]
            beams[m] = fallback / np.linalg.norm(fallback)
    return BeamSet(beams)


def order_from_gains(gains: Sequence[float]) -> Tuple[int, ...]:
    """Descending order of gains as 1-based indices; ties keep the lower index first"""
    ranking = np.argsort(-np.asarray(gains, dtype=float), kind='stable')
    return tuple(int(k) + 1 for k in ranking)


def sic_order(record: SinrRecord, m: int) -> Tuple[int, ...]:
    """SIC decoding order of cluster m, strongest effective gain first"""
    return order_from_gains(record.effective_gains[m])


def instantaneous_sinr(config: SystemConfig, realization: ChannelRealization, beams: BeamSet,
                       ordering: str = 'realized') -> SinrRecord:
    """
    Per-realization SINRs.

    A user keeps interference from users decoded before it (stronger ones) and a
    fraction sic_residual_coeff of the weaker users it cancelled. The Eve never
    cancels, so its intra-cluster interference covers every other user.

    Args:
        ordering: 'realized' sorts users by this slot's effective gains,
                  'configured' keeps the index order 1..N_m.
    """
    if ordering not in ORDERINGS:
        raise ValueError(f"Unknown ordering '{ordering}', expected one of {ORDERINGS}")

    residual = config.sic_residual_coeff
    noise = config.noise_power
    w = beams.beams
    cluster_totals = np.array([config.cluster_tx_total(j) for j in range(config.n_clusters)])

    legit, eve, gains_out, orders = [], [], [], []
    for m in range(config.n_clusters):
        h = realization.true_channels[m]
        gains = np.abs(np.conj(h) @ w.T) ** 2
        alpha = np.asarray(config.path_loss[m])
        power = np.asarray(config.tx_power[m])
        inter = gains @ cluster_totals - gains[:, m] * cluster_totals[m]

        own = gains[1:, m]
        effective = alpha[1:] * own
        if ordering == 'realized':
            order = order_from_gains(effective)
        else:
            order = tuple(range(1, config.cluster_sizes[m] + 1))

        sinr = np.empty(config.cluster_sizes[m])
        for position, n in enumerate(order):
            stronger = sum(power[i - 1] for i in order[:position])
            weaker = sum(power[i - 1] for i in order[position + 1:])
            intra = stronger + residual * weaker
            k = n - 1
            signal = own[k] * alpha[k + 1] * power[k]
            sinr[k] = signal / (own[k] * alpha[k + 1] * intra + alpha[k + 1] * inter[k + 1] + noise)

        beta = alpha[0]
        eve_gain = gains[0, m]
        others = np.maximum(power.sum() - power, 0.0)
        eve_sinr = eve_gain * beta * power / (eve_gain * beta * others + beta * inter[0] + noise)

        legit.append(sinr)
        eve.append(eve_sinr)
        gains_out.append(effective)
        orders.append(order)

    return SinrRecord(tuple(legit), tuple(eve), tuple(gains_out), tuple(orders))
