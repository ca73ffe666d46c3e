"""
Rate analysis module for noma-lab
Closed-form ergodic rates, the secrecy lower bound, term powers and the
large-antenna / high-power asymptotes
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import pandas as pd
from scipy.special import gammaln

from src.channel_estimation import EstimationModel, compute_rho
from src.system_model import SystemConfig

logger = logging.getLogger(__name__)


class RateMarker(enum.Enum):
    """Marker for limits that do not exist as a finite rate"""
    DIVERGENT = 'divergent'


DIVERGENT = RateMarker.DIVERGENT
AsymptoticRate = Union[float, RateMarker]


class RateMode(str, enum.Enum):
    CLOSED_FORM = 'closed-form'
    CLOSED_FORM_EXACT = 'closed-form-exact'
    MONTE_CARLO = 'monte-carlo'
    ASYMPTOTIC_NT = 'asymptotic-Nt'
    ASYMPTOTIC_POWER = 'asymptotic-power'
    TDMA = 'tdma'


def is_divergent(value: AsymptoticRate) -> bool:
    return value is DIVERGENT


@dataclass(frozen=True)
class PhiTerms:
    """Powers of desired signal, signal leakage, residual intra- and inter-cluster interference"""
    phi0: float
    phi1: float
    phi2: float
    phi3: float

    def sinr(self, noise: float = 1.0) -> float:
        return self.phi0 / (self.phi1 + self.phi2 + self.phi3 + noise)


@dataclass(frozen=True)
class TermPowers:
    exact: PhiTerms
    large_nt: PhiTerms


@dataclass(frozen=True)
class PowerFractions:
    """BS power split P_{m,n} = nu_{m,n} * P_tot with nu summing to one"""
    nu: Tuple[Tuple[float, ...], ...]
    p_tot: float

    def __post_init__(self):
        object.__setattr__(self, 'nu', tuple(tuple(float(v) for v in row) for row in self.nu))
        values = [v for row in self.nu for v in row]
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise ValueError("Power fractions must be finite and nonnegative")
        if abs(math.fsum(values) - 1.0) > 1e-12:
            raise ValueError(f"Power fractions must sum to 1, got {math.fsum(values)!r}")
        if self.p_tot < 0:
            raise ValueError(f"p_tot must be nonnegative, got {self.p_tot}")

    @classmethod
    def from_config(cls, config: SystemConfig) -> 'PowerFractions':
        total = config.total_tx_power
        if total <= 0:
            raise ValueError("Cannot derive power fractions from a zero-power configuration")
        return cls(tuple(tuple(p / total for p in row) for row in config.tx_power), total)

    def tx_power(self) -> Tuple[Tuple[float, ...], ...]:
        return tuple(tuple(v * self.p_tot for v in row) for row in self.nu)


def gamma_ratio_sq(n_antennas: int) -> float:
    """Gamma(N_t + 1/2)^2 / Gamma(N_t)^2, evaluated in the log domain"""
    if n_antennas < 1:
        raise ValueError(f"n_antennas must be >= 1, got {n_antennas}")
    return math.exp(2.0 * (gammaln(n_antennas + 0.5) - gammaln(n_antennas)))


def _intra_sum(config: SystemConfig, m: int, n: int, residual: float) -> float:
    powers = config.tx_power[m]
    stronger = math.fsum(powers[:n - 1])
    weaker = math.fsum(powers[n:])
    return stronger + residual * weaker if residual else stronger


def _residual(config: SystemConfig, override: Optional[float]) -> float:
    return config.sic_residual_coeff if override is None else override


def term_powers(config: SystemConfig, model: EstimationModel, m: int, n: int,
                sic_residual_coeff: Optional[float] = None) -> TermPowers:
    """Exact and large-N_t term powers of user (m, n), n in 1..N_m"""
    alpha = config.path_loss[m][n]
    power = config.user_tx_power(m, n)
    rho = model.rho[m][n]
    n_antennas = config.n_antennas
    ratio = gamma_ratio_sq(n_antennas)
    intra = _intra_sum(config, m, n, _residual(config, sic_residual_coeff))
    inter = alpha * config.inter_cluster_power(m)

    exact = PhiTerms(
        phi0=alpha * power * rho * ratio,
        phi1=max(0.0, alpha * power * (rho * n_antennas + 1.0 - rho - rho * ratio)),
        phi2=alpha * (rho * n_antennas + 1.0 - rho) * intra,
        phi3=inter,
    )
    large_nt = PhiTerms(
        phi0=alpha * power * rho * n_antennas,
        phi1=0.0,
        phi2=alpha * rho * n_antennas * intra,
        phi3=inter,
    )
    return TermPowers(exact=exact, large_nt=large_nt)


def legit_rate_closed_form(config: SystemConfig, model: EstimationModel, m: int, n: int,
                           sic_residual_coeff: Optional[float] = None) -> float:
    """Ergodic rate of user (m, n) in bits per channel use, large-N_t closed form"""
    terms = term_powers(config, model, m, n, sic_residual_coeff).large_nt
    return math.log2(1.0 + terms.sinr(config.noise_power))


def legit_rate_exact_terms(config: SystemConfig, model: EstimationModel, m: int, n: int,
                           sic_residual_coeff: Optional[float] = None) -> float:
    """Same approximation as legit_rate_closed_form but with the exact term powers"""
    terms = term_powers(config, model, m, n, sic_residual_coeff).exact
    return math.log2(1.0 + terms.sinr(config.noise_power))


def _eve_terms(config: SystemConfig, model: EstimationModel, m: int, n: int) -> TermPowers:
    beta = config.eve_path_loss(m)
    power = config.user_tx_power(m, n)
    rho = model.eve_rho(m)
    n_antennas = config.n_antennas
    ratio = gamma_ratio_sq(n_antennas)
    others = math.fsum(config.tx_power[m]) - power
    others = max(0.0, others)
    inter = beta * config.inter_cluster_power(m)

    exact = PhiTerms(
        phi0=beta * power * rho * ratio,
        phi1=max(0.0, beta * power * (rho * n_antennas + 1.0 - rho - rho * ratio)),
        phi2=beta * (rho * n_antennas + 1.0 - rho) * others,
        phi3=inter,
    )
    large_nt = PhiTerms(
        phi0=beta * power * rho * n_antennas,
        phi1=0.0,
        phi2=beta * rho * n_antennas * others,
        phi3=inter,
    )
    return TermPowers(exact=exact, large_nt=large_nt)


def eve_rate_closed_form(config: SystemConfig, model: EstimationModel, m: int, n: int) -> float:
    """Ergodic rate at Eve_m for the signal of user (m, n); the Eve performs no SIC"""
    terms = _eve_terms(config, model, m, n).large_nt
    return math.log2(1.0 + terms.sinr(config.noise_power))


def eve_rate_exact_terms(config: SystemConfig, model: EstimationModel, m: int, n: int) -> float:
    terms = _eve_terms(config, model, m, n).exact
    return math.log2(1.0 + terms.sinr(config.noise_power))


def secrecy_rate(legit: float, eve: float) -> float:
    """Positive part of the legitimate minus eavesdropping rate"""
    return max(0.0, legit - eve)


def _log_ratio(numerator: float, denominator: float) -> AsymptoticRate:
    if numerator == 0.0:
        return 0.0
    if denominator == 0.0:
        return DIVERGENT
    return math.log2(1.0 + numerator / denominator)


def _combine(legit: AsymptoticRate, eve: AsymptoticRate) -> AsymptoticRate:
    if is_divergent(legit):
        return DIVERGENT
    if is_divergent(eve):
        return 0.0
    return secrecy_rate(legit, eve)


def large_nt_limits(config: SystemConfig, m: int, n: int) -> Tuple[AsymptoticRate, AsymptoticRate]:
    """Legitimate and eavesdropping rate limits of user (m, n) as N_t grows without bound"""
    powers = config.tx_power[m]
    power = powers[n - 1]
    intra = _intra_sum(config, m, n, config.sic_residual_coeff)
    legit = _log_ratio(power, intra)

    active = config.eve_path_loss(m) * config.eve_pilot_power(m) > 0.0
    if not active:
        eve = 0.0
    else:
        eve = _log_ratio(power, max(0.0, math.fsum(powers) - power))
    return legit, eve


def asymptotic_large_nt(config: SystemConfig, m: int, n: int) -> AsymptoticRate:
    """
    Secrecy rate limit as N_t grows: noise and inter-cluster interference vanish
    against the intra-cluster terms. The strongest user (empty intra-cluster sum)
    has no finite limit and yields DIVERGENT.
    """
    legit, eve = large_nt_limits(config, m, n)
    return _combine(legit, eve)


def high_power_limits(config: SystemConfig, model: EstimationModel, fractions: PowerFractions,
                      m: int, n: int) -> Tuple[AsymptoticRate, AsymptoticRate]:
    nu = fractions.nu
    n_antennas = config.n_antennas
    rho = model.rho[m][n]
    eve_rho = model.eve_rho(m)
    share = nu[m][n - 1]
    inter = math.fsum(math.fsum(nu[j]) for j in range(len(nu)) if j != m)

    residual = config.sic_residual_coeff
    intra = math.fsum(nu[m][:n - 1]) + residual * math.fsum(nu[m][n:])
    legit = _log_ratio(share * rho * n_antennas, rho * n_antennas * intra + inter)

    others = max(0.0, math.fsum(nu[m]) - share)
    eve = _log_ratio(share * eve_rho * n_antennas, eve_rho * n_antennas * others + inter)
    return legit, eve


def asymptotic_high_power(config: SystemConfig, model: EstimationModel, fractions: PowerFractions,
                          m: int, n: int) -> AsymptoticRate:
    """Secrecy rate limit as P_tot grows with fixed fractions; independent of P_tot and path loss"""
    legit, eve = high_power_limits(config, model, fractions, m, n)
    return _combine(legit, eve)


def tdma_baseline_rate(config: SystemConfig, m: int, n: int, p_tot: Optional[float] = None) -> float:
    """
    Time-shared comparator: each of the K users gets a 1/K slot with full-CSI MRT
    and the whole BS power, free of interference.
    """
    if p_tot is None:
        p_tot = config.total_tx_power
    users = config.total_users
    return math.log2(1.0 + config.path_loss[m][n] * p_tot * config.n_antennas) / users


@dataclass(frozen=True)
class UserRate:
    cluster: int
    user: int
    legit_rate: float
    eve_rate: float
    secrecy_rate: float
    divergent: bool = False


@dataclass(frozen=True)
class RateReport:
    """
    Per-user rates with cluster and system sums.

    Divergent entries carry NaN rates and are left out of the sums.
    """
    users: Tuple[UserRate, ...]
    mode: str

    def _finite(self):
        return [u for u in self.users if not u.divergent]

    @property
    def cluster_sums(self) -> Tuple[float, ...]:
        if not self.users:
            return ()
        n_clusters = max(u.cluster for u in self.users) + 1
        return tuple(math.fsum(u.secrecy_rate for u in self._finite() if u.cluster == m)
                     for m in range(n_clusters))

    @property
    def system_sum(self) -> float:
        return math.fsum(u.secrecy_rate for u in self._finite())

    @property
    def legit_sum(self) -> float:
        return math.fsum(u.legit_rate for u in self._finite())

    @property
    def min_secrecy(self) -> float:
        finite = self._finite()
        return min(u.secrecy_rate for u in finite) if finite else math.nan

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'cluster': [u.cluster + 1 for u in self.users],
            'user': [u.user for u in self.users],
            'legit_rate': [u.legit_rate for u in self.users],
            'eve_rate': [u.eve_rate for u in self.users],
            'secrecy_rate': [u.secrecy_rate for u in self.users],
            'mode': [self.mode] * len(self.users),
        })


def closed_form_report(config: SystemConfig, model: Optional[EstimationModel] = None,
                       exact_terms: bool = False) -> RateReport:
    """Closed-form legitimate, eavesdropping and secrecy rates of every user"""
    if model is None:
        model = compute_rho(config)
    legit_fn = legit_rate_exact_terms if exact_terms else legit_rate_closed_form
    eve_fn = eve_rate_exact_terms if exact_terms else eve_rate_closed_form
    rows = []
    for m, n in config.users():
        legit = legit_fn(config, model, m, n)
        eve = eve_fn(config, model, m, n)
        rows.append(UserRate(m, n, legit, eve, secrecy_rate(legit, eve)))
    mode = RateMode.CLOSED_FORM_EXACT if exact_terms else RateMode.CLOSED_FORM
    return RateReport(tuple(rows), mode.value)


def _limit_row(m: int, n: int, legit: AsymptoticRate, eve: AsymptoticRate) -> UserRate:
    secrecy = _combine(legit, eve)
    if is_divergent(secrecy):
        eve_value = math.nan if is_divergent(eve) else eve
        return UserRate(m, n, math.nan, eve_value, math.nan, divergent=True)
    legit_value = legit
    eve_value = math.inf if is_divergent(eve) else eve
    return UserRate(m, n, legit_value, eve_value, secrecy)


def large_nt_report(config: SystemConfig) -> RateReport:
    rows = [_limit_row(m, n, *large_nt_limits(config, m, n)) for m, n in config.users()]
    return RateReport(tuple(rows), RateMode.ASYMPTOTIC_NT.value)


def high_power_report(config: SystemConfig, model: Optional[EstimationModel] = None,
                      fractions: Optional[PowerFractions] = None) -> RateReport:
    if model is None:
        model = compute_rho(config)
    if fractions is None:
        fractions = PowerFractions.from_config(config)
    rows = [_limit_row(m, n, *high_power_limits(config, model, fractions, m, n))
            for m, n in config.users()]
    return RateReport(tuple(rows), RateMode.ASYMPTOTIC_POWER.value)


def tdma_sum_rate(config: SystemConfig, p_tot: Optional[float] = None) -> float:
    return math.fsum(tdma_baseline_rate(config, m, n, p_tot) for m, n in config.users())
