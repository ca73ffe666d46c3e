"""
System model module for noma-lab
Scenario configuration, validation, unit helpers and the per-trial randomness contract
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

UINT64_LIMIT = 2 ** 64


def _as_nested_tuple(rows: Sequence[Sequence[float]]) -> Tuple[Tuple[float, ...], ...]:
    return tuple(tuple(float(value) for value in row) for row in rows)


@dataclass(frozen=True)
class SystemConfig:
    """
    Scenario ground truth.

    Per-cluster lists are indexed by user n. ``path_loss`` and ``pilot_power``
    hold the cluster's eavesdropper at index 0 (beta_m and U_m), so they have
    N_m + 1 entries; ``tx_power`` holds users 1..N_m only, at positions 0..N_m-1.
    Clusters are addressed 0-based (m = 0..M-1) in code, users 1-based.
    All powers are linear SNRs against unit noise.
    """
    n_antennas: int
    n_clusters: int
    cluster_sizes: Tuple[int, ...]
    pilot_length: int
    path_loss: Tuple[Tuple[float, ...], ...]
    pilot_power: Tuple[Tuple[float, ...], ...]
    tx_power: Tuple[Tuple[float, ...], ...]
    sic_residual_coeff: float = 0.0
    enforce_power_order: bool = False
    noise_power: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'cluster_sizes', tuple(int(n) for n in self.cluster_sizes))
        object.__setattr__(self, 'path_loss', _as_nested_tuple(self.path_loss))
        object.__setattr__(self, 'pilot_power', _as_nested_tuple(self.pilot_power))
        object.__setattr__(self, 'tx_power', _as_nested_tuple(self.tx_power))
        object.__setattr__(self, 'sic_residual_coeff', float(self.sic_residual_coeff))

    @property
    def total_users(self) -> int:
        return sum(self.cluster_sizes)

    def users(self) -> List[Tuple[int, int]]:
        """All (m, n) pairs in cluster-major order, n starting at 1"""
        return [(m, n) for m in range(self.n_clusters) for n in range(1, self.cluster_sizes[m] + 1)]

    def user_offset(self, m: int) -> int:
        """Position of user (m, 1) in the flattened user order"""
        return sum(self.cluster_sizes[:m])

    def eve_path_loss(self, m: int) -> float:
        return self.path_loss[m][0]

    def eve_pilot_power(self, m: int) -> float:
        return self.pilot_power[m][0]

    def user_tx_power(self, m: int, n: int) -> float:
        return self.tx_power[m][n - 1]

    def cluster_tx_total(self, m: int) -> float:
        return math.fsum(self.tx_power[m])

    @property
    def total_tx_power(self) -> float:
        return math.fsum(math.fsum(row) for row in self.tx_power)

    def inter_cluster_power(self, m: int) -> float:
        """Total BS power spent on every cluster other than m"""
        return math.fsum(self.cluster_tx_total(j) for j in range(self.n_clusters) if j != m)

    def with_tx_power(self, tx_power: Sequence[Sequence[float]]) -> 'SystemConfig':
        return dataclasses.replace(self, tx_power=tx_power)

    def with_pilot_power(self, pilot_power: Sequence[Sequence[float]]) -> 'SystemConfig':
        return dataclasses.replace(self, pilot_power=pilot_power)

    def with_path_loss(self, path_loss: Sequence[Sequence[float]]) -> 'SystemConfig':
        return dataclasses.replace(self, path_loss=path_loss)

    def with_antennas(self, n_antennas: int) -> 'SystemConfig':
        return dataclasses.replace(self, n_antennas=int(n_antennas))

    def with_eve_power(self, eve_power: float) -> 'SystemConfig':
        """Same scenario with every eavesdropper transmitting ``eve_power`` pilots"""
        rows = [(eve_power,) + row[1:] for row in self.pilot_power]
        return self.with_pilot_power(rows)

    def with_user_pilot_power(self, power: float) -> 'SystemConfig':
        """Same scenario with every legitimate user transmitting ``power`` pilots"""
        rows = [(row[0],) + (power,) * (len(row) - 1) for row in self.pilot_power]
        return self.with_pilot_power(rows)

    def flatten_tx_power(self) -> np.ndarray:
        return np.array([p for row in self.tx_power for p in row], dtype=float)

    def unflatten(self, values: Sequence[float]) -> Tuple[Tuple[float, ...], ...]:
        """Split a flat per-user vector back into per-cluster rows"""
        rows = []
        for m in range(self.n_clusters):
            start = self.user_offset(m)
            rows.append(tuple(float(v) for v in values[start:start + self.cluster_sizes[m]]))
        return tuple(rows)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate(); ``failures`` lists violated invariants in check order"""
    failures: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def first_failure(self) -> str:
        return self.failures[0] if self.failures else ''

    def __bool__(self) -> bool:
        return self.passed


def _check_dimensions(config: SystemConfig) -> List[str]:
    failures = []
    if config.n_antennas < 1:
        failures.append('n_antennas must be a positive integer')
    if config.n_clusters < 1:
        failures.append('n_clusters must be a positive integer')
    if config.pilot_length < 1:
        failures.append('pilot_length must be a positive integer')
    if len(config.cluster_sizes) != config.n_clusters:
        failures.append(f'cluster_sizes has {len(config.cluster_sizes)} entries, expected {config.n_clusters}')
        return failures
    if any(size < 1 for size in config.cluster_sizes):
        failures.append('cluster_sizes entries must be positive')
    for name, rows, extra in (('path_loss', config.path_loss, 1),
                              ('pilot_power', config.pilot_power, 1),
                              ('tx_power', config.tx_power, 0)):
        if len(rows) != config.n_clusters:
            failures.append(f'{name} has {len(rows)} clusters, expected {config.n_clusters}')
            continue
        for m, row in enumerate(rows):
            expected = config.cluster_sizes[m] + extra
            if len(row) != expected:
                failures.append(f'{name} for cluster {m + 1} has {len(row)} entries, expected {expected}')
    return failures


def validate(config: SystemConfig) -> ValidationReport:
    """
    Check every SystemConfig invariant.

    Returns a report naming violated invariants, first failure first. A passing
    config is accepted by every other module without re-checking.
    """
    failures = _check_dimensions(config)
    if failures:
        return ValidationReport(tuple(failures))

    values = [v for row in config.path_loss + config.pilot_power + config.tx_power for v in row]
    if not all(math.isfinite(v) for v in values):
        failures.append('non-finite power or path loss')
    if any(v < 0 for row in config.pilot_power + config.tx_power for v in row):
        failures.append('negative power')
    if any(v < 0 for row in config.path_loss for v in row):
        failures.append('negative path loss')
    if config.pilot_length < config.n_clusters:
        failures.append('pilot_length < n_clusters')
    if not 0.0 <= config.sic_residual_coeff <= 1.0:
        failures.append('sic_residual_coeff outside [0, 1]')
    if config.noise_power != 1.0:
        failures.append('noise_power must be 1')
    if config.enforce_power_order:
        for m, row in enumerate(config.tx_power):
            if any(row[k] > row[k + 1] for k in range(len(row) - 1)):
                failures.append(f'tx_power decreasing within cluster {m + 1}')
                break

    report = ValidationReport(tuple(failures))
    if not report.passed:
        logger.debug(f"Configuration rejected: {report.first_failure}")
    return report


def require_valid(config: SystemConfig) -> SystemConfig:
    """Raise ValueError with the first violated invariant if the config is invalid"""
    report = validate(config)
    if not report.passed:
        raise ValueError(f"Invalid system configuration: {report.first_failure}")
    return config


@dataclass(frozen=True)
class SeedSpec:
    """
    Counter-based seed: the generator for a trial is a pure function of
    (master_seed, trial_index), so trials can run in any order or in parallel.
    """
    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < UINT64_LIMIT:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.trial_index < 0:
            raise ValueError(f"trial_index must be nonnegative, got {self.trial_index}")

    def rng(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.trial_index,))
        return np.random.Generator(np.random.PCG64(sequence))

    def for_trial(self, trial_index: int) -> 'SeedSpec':
        return SeedSpec(self.master_seed, trial_index)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) entries: real and imaginary parts each with variance 1/2"""
    if isinstance(shape, int):
        shape = (shape,)
    pairs = rng.normal(0.0, math.sqrt(0.5), (*shape, 2))
    return pairs.view(np.complex128)[..., 0]


def draw_gaussian_vector(seed: SeedSpec, dim: int) -> np.ndarray:
    """Draw a CN(0, I_dim) vector, deterministic in ``seed``"""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return complex_gaussian(seed.rng(), dim)


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0:
        return -math.inf
    return 10.0 * math.log10(value)


# Preset large-scale gains: users log-spaced over [0.1, 1.0], Eve mid-range.
# Pilots: users at -5 dB, Eves attacking at 0 dB.
DEFAULT_USER_PATH_LOSS = (1.0, 0.4642, 0.2154, 0.1)
DEFAULT_EVE_PATH_LOSS = 0.3
DEFAULT_EVE_POWER = 1.0
DEFAULT_USER_PILOT_POWER = 0.316227766017  # -5 dB
DEFAULT_TX_POWER = (1.0, 2.0, 3.0, 4.0)


def default_config() -> SystemConfig:
    """
    Desk-scale default: N_t=64, M=12, N_m=4, pilot length 12.

    Mirrors config/scenarios/default.scn. BS power follows the fixed-proportion
    rule n / sum(k) * P_tot / M with P_tot = 120.
    """
    n_clusters = 12
    path_loss = [(DEFAULT_EVE_PATH_LOSS,) + DEFAULT_USER_PATH_LOSS] * n_clusters
    pilot_power = [(DEFAULT_EVE_POWER,) + (DEFAULT_USER_PILOT_POWER,) * 4] * n_clusters
    return SystemConfig(
        n_antennas=64,
        n_clusters=n_clusters,
        cluster_sizes=(4,) * n_clusters,
        pilot_length=12,
        path_loss=path_loss,
        pilot_power=pilot_power,
        tx_power=[DEFAULT_TX_POWER] * n_clusters,
        sic_residual_coeff=0.0,
        enforce_power_order=True,
    )
