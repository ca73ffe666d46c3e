"""
Monte Carlo module for noma-lab
Ergodic rate estimation by trial averaging and the simulation vs closed-form comparison
"""
import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from config.settings import settings
from src.airlink import instantaneous_sinr, make_beams
from src.channel_estimation import compute_rho, simulate_estimation
from src.rate_analysis import (RateMode, eve_rate_closed_form, legit_rate_closed_form,
                               secrecy_rate)
from src.system_model import SeedSpec, SystemConfig, require_valid

logger = logging.getLogger(__name__)

MIN_TRIALS = 100


@dataclass(frozen=True, eq=False)
class McEstimate:
    """
    Per-user sample means and standard errors, flat in SystemConfig.users() order.
    """
    mean: np.ndarray
    std_error: np.ndarray
    trials: int
    master_seed: int

    def __post_init__(self):
        if self.trials < 2:
            raise ValueError(f"An estimate needs at least 2 trials, got {self.trials}")
        if self.mean.shape != self.std_error.shape:
            raise ValueError("mean and std_error must have the same shape")

    @classmethod
    def from_samples(cls, samples: np.ndarray, master_seed: int) -> 'McEstimate':
        """Build from a (trials, users) array; rows are reduced in trial order"""
        trials = samples.shape[0]
        if trials < 2:
            raise ValueError(f"An estimate needs at least 2 trials, got {trials}")
        mean = np.mean(samples, axis=0)
        std_error = np.std(samples, axis=0, ddof=1) / math.sqrt(trials)
        return cls(mean, std_error, trials, master_seed)

    def at(self, config: SystemConfig, m: int, n: int) -> Tuple[float, float]:
        k = config.user_offset(m) + n - 1
        return float(self.mean[k]), float(self.std_error[k])


@dataclass(frozen=True, eq=False)
class TrialSamples:
    """Per-trial rates, arrays of shape (trials, K) indexed by trial"""
    legit: np.ndarray
    eve: np.ndarray
    master_seed: int

    @property
    def secrecy(self) -> np.ndarray:
        return np.maximum(self.legit - self.eve, 0.0)


def _trial_rates(config: SystemConfig, model, seed: SeedSpec, ordering: str) -> Tuple[np.ndarray, np.ndarray]:
    realization = simulate_estimation(config, seed, model)
    beams = make_beams(realization)
    record = instantaneous_sinr(config, realization, beams, ordering=ordering)
    legit = np.log2(1.0 + np.concatenate(record.legit_sinr))
    eve = np.log2(1.0 + np.concatenate(record.eve_sinr))
    return legit, eve


def _chunks(trials: int, workers: int) -> List[range]:
    size = max(1, math.ceil(trials / (workers * 4)))
    return [range(start, min(start + size, trials)) for start in range(0, trials, size)]


def run_trials(config: SystemConfig, trials: int, master_seed: int,
               threads: Optional[int] = None, ordering: str = 'realized') -> TrialSamples:
    """
    Run ``trials`` independent slots. Trial t always uses SeedSpec(master_seed, t)
    and writes row t, so the result does not depend on the thread count.
    """
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS}, got {trials}")
    require_valid(config)
    workers = max(1, threads if threads is not None else settings.THREADS)
    model = compute_rho(config)
    silent = [m + 1 for m, energy in enumerate(model.cluster_pilot_energy) if energy == 0.0]
    if silent:
        logger.warning(f"Clusters {silent} send no pilot energy; their beams are random directions")
    base = SeedSpec(master_seed)

    users = config.total_users
    legit = np.empty((trials, users))
    eve = np.empty((trials, users))

    def work(indices: range):
        for t in indices:
            legit[t], eve[t] = _trial_rates(config, model, base.for_trial(t), ordering)

    chunks = _chunks(trials, workers)
    if workers == 1:
        for chunk in chunks:
            work(chunk)
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            for future in [executor.submit(work, chunk) for chunk in chunks]:
                future.result()

    logger.debug(f"Ran {trials} trials on {workers} worker(s), seed {master_seed}")
    return TrialSamples(legit, eve, master_seed)


def estimate_rates(config: SystemConfig, trials: int, master_seed: int,
                   threads: Optional[int] = None,
                   ordering: str = 'realized') -> Tuple[McEstimate, McEstimate]:
    """
    Ergodic legitimate and eavesdropping rates averaged over trials.

    Returns:
        (users, eves): the Eve entry at position of user (m, n) is the rate of
        Eve_m for that user's signal
    """
    samples = run_trials(config, trials, master_seed, threads, ordering)
    return (McEstimate.from_samples(samples.legit, master_seed),
            McEstimate.from_samples(samples.eve, master_seed))


def sort_users_by_path_loss(config: SystemConfig) -> Tuple[SystemConfig, Tuple[Tuple[int, ...], ...]]:
    """
    Reindex users of every cluster by descending path loss, so index order
    matches the SIC order the simulation realizes on average.

    Returns:
        (sorted config, permutation) where permutation[m][k] is the original
        1-based index of the user placed at position k + 1
    """
    path_loss, pilot_power, tx_power, permutation = [], [], [], []
    for m in range(config.n_clusters):
        users = config.path_loss[m][1:]
        order = tuple(int(k) + 1 for k in np.argsort(-np.asarray(users), kind='stable'))
        permutation.append(order)
        path_loss.append((config.path_loss[m][0],) + tuple(config.path_loss[m][n] for n in order))
        pilot_power.append((config.pilot_power[m][0],) + tuple(config.pilot_power[m][n] for n in order))
        tx_power.append(tuple(config.tx_power[m][n - 1] for n in order))

    # Sorting may break the non-decreasing power order the original satisfied.
    sorted_config = dataclasses.replace(config, path_loss=path_loss, pilot_power=pilot_power,
                                        tx_power=tx_power, enforce_power_order=False)
    return sorted_config, tuple(permutation)


def closed_form_bounds(config: SystemConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form legitimate and Eve rates evaluated on the path-loss-sorted user order"""
    sorted_config, permutation = sort_users_by_path_loss(config)
    model = compute_rho(sorted_config)
    legit = np.empty(config.total_users)
    eve = np.empty(config.total_users)
    for m in range(config.n_clusters):
        for position, original in enumerate(permutation[m], start=1):
            k = config.user_offset(m) + original - 1
            legit[k] = legit_rate_closed_form(sorted_config, model, m, position)
            eve[k] = eve_rate_closed_form(sorted_config, model, m, position)
    return legit, eve


def secrecy_gap_report(config: SystemConfig, trials: int, master_seed: int,
                       threads: Optional[int] = None) -> pd.DataFrame:
    """
    Compare the simulated ergodic secrecy rate against the closed-form lower bound.

    ``bound_exceeds`` flags users whose bound is above the simulated mean by more
    than two standard errors.
    """
    logger.info(f"Secrecy gap report: {config.total_users} users, {trials} trials")
    samples = run_trials(config, trials, master_seed, threads)
    legit = McEstimate.from_samples(samples.legit, master_seed)
    eve = McEstimate.from_samples(samples.eve, master_seed)
    secrecy = McEstimate.from_samples(samples.secrecy, master_seed)
    legit_bound, eve_bound = closed_form_bounds(config)
    bound = np.array([secrecy_rate(lo, le) for lo, le in zip(legit_bound, eve_bound)])

    users = config.users()
    frame = pd.DataFrame({
        'cluster': [m + 1 for m, _ in users],
        'user': [n for _, n in users],
        'legit_rate': legit.mean,
        'eve_rate': eve.mean,
        'secrecy_rate': secrecy.mean,
        'mode': RateMode.MONTE_CARLO.value,
        'legit_se': legit.std_error,
        'eve_se': eve.std_error,
        'secrecy_se': secrecy.std_error,
        'bound_secrecy': bound,
        'difference': secrecy.mean - bound,
        'bound_exceeds': bound > secrecy.mean + 2.0 * secrecy.std_error,
    })
    exceeded = int(frame['bound_exceeds'].sum())
    if exceeded:
        logger.warning(f"Closed-form bound above simulation (2 SE) for {exceeded} of {len(frame)} users")
    return frame
