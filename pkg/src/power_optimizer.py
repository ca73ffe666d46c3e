"""
Power optimizer module for noma-lab
Linearized secrecy constraints in pilot-power and transmit-power space, the
max-min and min-power problems with their outer rate search, and the baseline
allocations they are compared against
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config.settings import settings
from src.channel_estimation import EstimationModel, compute_rho
from src.rate_analysis import closed_form_report, RateReport
from src.simplex import LpProblem, LpResult, LpStatus, solve_lp
from src.system_model import SystemConfig, require_valid

logger = logging.getLogger(__name__)

SEARCH_METHODS = ('bisection', 'stepped')


class SolutionStatus(str, enum.Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    INFEASIBLE_AT_START = 'infeasible_at_start'
    UNBOUNDED = 'unbounded'
    UNVERIFIED = 'unverified'


class PowerSpace(str, enum.Enum):
    PILOT = 'Q'
    TRANSMIT = 'P'


@dataclass(frozen=True, eq=False)
class ConstraintRow:
    """One linear constraint coeffs . x <= bound over the flat per-user variables"""
    coeffs: np.ndarray
    bound: float
    family: str
    cluster: int = -1
    user: int = 0

    def value(self, x: Sequence[float]) -> float:
        return float(self.coeffs @ np.asarray(x, dtype=float))

    def is_satisfied(self, x: Sequence[float], slack: float = 0.0) -> bool:
        return self.value(x) <= self.bound + slack


@dataclass(frozen=True, eq=False)
class PowerSolution:
    """
    Outcome of one of the optimization problems.

    ``values`` is the flat optimized power vector (pilot powers Q_{m,n} of the
    users, or BS powers P_{m,n}); it is None unless the status is OPTIMAL.
    ``config`` is the input scenario with the optimized powers applied.
    """
    space: PowerSpace
    status: SolutionStatus
    r_o: float
    r_e: float
    values: Optional[np.ndarray] = None
    objective: Optional[float] = None
    config: Optional[SystemConfig] = None
    lp_solves: int = 0

    @property
    def feasible(self) -> bool:
        return self.status is SolutionStatus.OPTIMAL

    def report(self) -> Optional[RateReport]:
        return closed_form_report(self.config) if self.config is not None else None

    def to_frame(self, template: SystemConfig) -> pd.DataFrame:
        """Per-user rows; infeasible solutions give NaN powers and rates"""
        users = template.users()
        columns = {
            'cluster': [m + 1 for m, _ in users],
            'user': [n for _, n in users],
            'power': [math.nan] * len(users),
            'legit_rate': [math.nan] * len(users),
            'eve_rate': [math.nan] * len(users),
            'secrecy_rate': [math.nan] * len(users),
        }
        report = self.report()
        if self.values is not None and report is not None:
            columns['power'] = list(self.values)
            columns['legit_rate'] = [u.legit_rate for u in report.users]
            columns['eve_rate'] = [u.eve_rate for u in report.users]
            columns['secrecy_rate'] = [u.secrecy_rate for u in report.users]
        frame = pd.DataFrame(columns)
        frame['status'] = self.status.value
        frame['r_o'] = self.r_o if self.feasible else math.nan
        frame['r_e'] = self.r_e
        frame['objective'] = self.objective if self.objective is not None else math.nan
        return frame


def _rate_threshold(rate: float) -> float:
    if rate < 0:
        raise ValueError(f"Rate thresholds must be nonnegative, got {rate}")
    return 2.0 ** rate - 1.0


def _index(config: SystemConfig, m: int, n: int) -> int:
    return config.user_offset(m) + n - 1


def _cluster_slice(config: SystemConfig, m: int) -> slice:
    start = config.user_offset(m)
    return slice(start, start + config.cluster_sizes[m])


def pilot_config(config: SystemConfig, q_values: Sequence[float]) -> SystemConfig:
    """Scenario with user pilot powers replaced by the flat vector; Eve powers kept"""
    rows = config.unflatten(q_values)
    return config.with_pilot_power([(config.pilot_power[m][0],) + rows[m] for m in range(config.n_clusters)])


def transmit_config(config: SystemConfig, p_values: Sequence[float]) -> SystemConfig:
    return config.with_tx_power(config.unflatten(p_values))


# Pilot-power space: BS powers fixed, Eve pilot power U_m is data.

def build_c1_in_q(config: SystemConfig, m: int, n: int, r_e: float) -> ConstraintRow:
    """
    Eve rate cap of user (m, n) as a row in the user pilot powers.

    The Eve SINR condition is multiplied through by 1 + S_m; the Eve pilot
    term and the noise land in the bound.
    """
    c_e = _rate_threshold(r_e)
    beta = config.eve_path_loss(m)
    eve_power = config.eve_pilot_power(m)
    tau = config.pilot_length
    n_antennas = config.n_antennas
    power = config.user_tx_power(m, n)
    others = config.cluster_tx_total(m) - power
    interference = beta * config.inter_cluster_power(m) + 1.0
    leakage = beta * beta * eve_power * tau * n_antennas

    coeffs = np.zeros(config.total_users)
    alphas = np.asarray(config.path_loss[m][1:])
    coeffs[_cluster_slice(config, m)] = -c_e * interference * alphas * tau
    bound = c_e * leakage * others + c_e * interference * (1.0 + beta * eve_power * tau) - leakage * power
    return ConstraintRow(coeffs, bound, 'C1', m, n)


def build_c3_in_q(config: SystemConfig, m: int, n: int, r_o: float) -> ConstraintRow:
    """Legitimate rate target of user (m, n) as a row in the user pilot powers of cluster m"""
    c_o = _rate_threshold(r_o)
    alpha = config.path_loss[m][n]
    tau = config.pilot_length
    n_antennas = config.n_antennas
    powers = config.tx_power[m]
    intra = math.fsum(powers[:n - 1]) + config.sic_residual_coeff * math.fsum(powers[n:])
    interference = alpha * config.inter_cluster_power(m) + 1.0
    eve_energy = config.eve_path_loss(m) * config.eve_pilot_power(m) * tau

    coeffs = np.zeros(config.total_users)
    alphas = np.asarray(config.path_loss[m][1:])
    coeffs[_cluster_slice(config, m)] = c_o * interference * alphas * tau
    coeffs[_index(config, m, n)] += (c_o * alpha * alpha * tau * n_antennas * intra
                                     - alpha * alpha * tau * n_antennas * powers[n - 1])
    bound = -c_o * interference * (1.0 + eve_energy)
    return ConstraintRow(coeffs, bound, 'C3', m, n)


# Transmit-power space: pilot powers (hence rho) fixed.

def _c1_in_p(config: SystemConfig, model: EstimationModel, m: int, n: int, c_e: float) -> ConstraintRow:
    beta = config.eve_path_loss(m)
    gain = beta * model.eve_rho(m) * config.n_antennas
    coeffs = np.full(config.total_users, -c_e * beta)
    coeffs[_cluster_slice(config, m)] = -c_e * gain
    coeffs[_index(config, m, n)] = gain
    return ConstraintRow(coeffs, c_e, 'C1', m, n)


def _c3_in_p(config: SystemConfig, model: EstimationModel, m: int, n: int, c_o: float) -> ConstraintRow:
    alpha = config.path_loss[m][n]
    gain = alpha * model.rho[m][n] * config.n_antennas
    coeffs = np.full(config.total_users, c_o * alpha)
    start = config.user_offset(m)
    for i in range(1, config.cluster_sizes[m] + 1):
        if i < n:
            coeffs[start + i - 1] = c_o * gain
        elif i > n:
            coeffs[start + i - 1] = c_o * config.sic_residual_coeff * gain
    coeffs[_index(config, m, n)] = -gain
    return ConstraintRow(coeffs, -c_o, 'C3', m, n)


def build_constraints_in_p(config: SystemConfig, model: Optional[EstimationModel], r_o: float,
                           r_e: float, p_tot: float) -> List[ConstraintRow]:
    """
    C1 and C3 rows for every user, the C4 budget row and the C5 ordering rows,
    all over the flat BS power vector.
    """
    if model is None:
        model = compute_rho(config)
    c_e = _rate_threshold(r_e)
    c_o = _rate_threshold(r_o)
    rows = []
    for m, n in config.users():
        rows.append(_c1_in_p(config, model, m, n, c_e))
        rows.append(_c3_in_p(config, model, m, n, c_o))
    rows.append(ConstraintRow(np.ones(config.total_users), float(p_tot), 'C4'))
    for m in range(config.n_clusters):
        for n in range(1, config.cluster_sizes[m]):
            coeffs = np.zeros(config.total_users)
            coeffs[_index(config, m, n)] = 1.0
            coeffs[_index(config, m, n + 1)] = -1.0
            rows.append(ConstraintRow(coeffs, 0.0, 'C5', m, n))
    return rows


def _q_rows(config: SystemConfig, r_o: float, r_e: float) -> List[ConstraintRow]:
    rows = []
    for m, n in config.users():
        rows.append(build_c1_in_q(config, m, n, r_e))
        rows.append(build_c3_in_q(config, m, n, r_o))
    return rows


def _lp(rows: List[ConstraintRow], n_vars: int, upper: Optional[np.ndarray] = None) -> LpProblem:
    A = np.array([row.coeffs for row in rows]).reshape(len(rows), n_vars)
    b = np.array([row.bound for row in rows])
    return LpProblem(np.ones(n_vars), A, b, upper)


def _upper_bounds(config: SystemConfig, q_max: Union[float, Sequence[float]]) -> np.ndarray:
    upper = np.broadcast_to(np.asarray(q_max, dtype=float), (config.total_users,)).copy()
    if np.any(upper < 0) or np.any(np.isnan(upper)):
        raise ValueError("q_max must be nonnegative")
    return upper


def _status_of(result: LpResult) -> SolutionStatus:
    if result.status is LpStatus.UNBOUNDED:
        return SolutionStatus.UNBOUNDED
    return SolutionStatus.OPTIMAL if result.is_optimal else SolutionStatus.INFEASIBLE


def verify_solution(config: SystemConfig, r_o: float, r_e: float,
                    slack: Optional[float] = None) -> bool:
    """Recompute closed-form rates of an applied allocation and check both thresholds"""
    slack = settings.CONSTRAINT_SLACK if slack is None else slack
    report = closed_form_report(config)
    return all(u.legit_rate >= r_o - slack and u.eve_rate <= r_e + slack for u in report.users)


# Outer one-dimensional search over the common legitimate-rate target.

FeasibilityCheck = Callable[[float], LpResult]


@dataclass(frozen=True)
class SearchOutcome:
    status: SolutionStatus
    r_o: float
    result: Optional[LpResult]
    lp_solves: int


def search_rate_target(check: FeasibilityCheck, r_start: float, r_cap: float, delta_o: float,
                       method: str) -> SearchOutcome:
    """
    Largest r_o the check reports feasible, starting from r_start.

    'stepped' advances by delta_o while feasible; 'bisection' narrows
    [r_start, r_cap] down to delta_o / 4. Both rely on feasibility being
    monotone in r_o.
    """
    if delta_o <= 0:
        raise ValueError(f"delta_o must be > 0, got {delta_o}")
    if method not in SEARCH_METHODS:
        raise ValueError(f"Unknown search method '{method}', expected one of {SEARCH_METHODS}")

    result = check(r_start)
    solves = 1
    if not result.is_optimal:
        status = (SolutionStatus.UNBOUNDED if result.status is LpStatus.UNBOUNDED
                  else SolutionStatus.INFEASIBLE_AT_START)
        return SearchOutcome(status, r_start, None, solves)

    best_rate, best = r_start, result
    if method == 'stepped':
        for step in range(settings.MAX_SEARCH_STEPS):
            candidate = r_start + (step + 1) * delta_o
            if candidate > r_cap:
                break
            result = check(candidate)
            solves += 1
            if not result.is_optimal:
                break
            best_rate, best = candidate, result
            logger.debug(f"Stepped search: r_o={candidate:.6f} feasible")
        else:
            logger.warning(f"Stepped search stopped after {settings.MAX_SEARCH_STEPS} steps")
        return SearchOutcome(SolutionStatus.OPTIMAL, best_rate, best, solves)

    low, high = r_start, max(r_cap, r_start)
    while high - low > delta_o / 4.0:
        middle = 0.5 * (low + high)
        result = check(middle)
        solves += 1
        if result.is_optimal:
            low, best = middle, result
        else:
            high = middle
        logger.debug(f"Bisection: [{low:.6f}, {high:.6f}]")
    return SearchOutcome(SolutionStatus.OPTIMAL, low, best, solves)


def _finish(space: PowerSpace, config: SystemConfig, outcome: SearchOutcome, r_e: float) -> PowerSolution:
    if outcome.status is not SolutionStatus.OPTIMAL:
        logger.warning(f"{space.value}-space problem {outcome.status.value} at r_o={outcome.r_o:.6f}")
        return PowerSolution(space, outcome.status, outcome.r_o, r_e, lp_solves=outcome.lp_solves)

    values = outcome.result.x
    applied = pilot_config(config, values) if space is PowerSpace.PILOT else transmit_config(config, values)
    if not verify_solution(applied, outcome.r_o, r_e):
        logger.warning(f"Closed-form rates miss the targets beyond slack at r_o={outcome.r_o:.6f}, "
                       f"discarding the LP point")
        return PowerSolution(space, SolutionStatus.UNVERIFIED, outcome.r_o, r_e, lp_solves=outcome.lp_solves)
    return PowerSolution(space, SolutionStatus.OPTIMAL, outcome.r_o, r_e, values,
                         outcome.result.objective, applied, outcome.lp_solves)


def _q_rate_cap(config: SystemConfig) -> float:
    return min(math.log2(1.0 + config.path_loss[m][n] * config.user_tx_power(m, n) * config.n_antennas)
               for m, n in config.users())


def _p_rate_cap(config: SystemConfig, model: EstimationModel, p_tot: float) -> float:
    return min(math.log2(1.0 + config.path_loss[m][n] * model.rho[m][n] * config.n_antennas * p_tot)
               for m, n in config.users())


def op2_maxmin_q(config: SystemConfig, r_e: float, q_max: Union[float, Sequence[float]],
                 delta_o: Optional[float] = None, method: Optional[str] = None) -> PowerSolution:
    """
    Max-min legitimate rate over user pilot powers with BS powers fixed.

    The search starts at r_o = r_e; the returned powers are the minimum-sum
    pilot powers meeting the best target found.
    """
    require_valid(config)
    delta_o = settings.DELTA_O if delta_o is None else delta_o
    method = settings.SEARCH_METHOD if method is None else method
    upper = _upper_bounds(config, q_max)
    c1_rows = [build_c1_in_q(config, m, n, r_e) for m, n in config.users()]

    def lp_at(r_o: float) -> LpResult:
        rows = c1_rows + [build_c3_in_q(config, m, n, r_o) for m, n in config.users()]
        return solve_lp(_lp(rows, config.total_users, upper))

    logger.info(f"OP2: max-min over pilot powers, r_e={r_e}, search={method}")
    outcome = search_rate_target(lp_at, r_e, _q_rate_cap(config), delta_o, method)
    return _finish(PowerSpace.PILOT, config, outcome, r_e)


def op3_minpower_q(config: SystemConfig, r_e: float, r_o: float,
                   q_max: Union[float, Sequence[float]]) -> PowerSolution:
    """Minimum total user pilot power meeting both rate thresholds"""
    require_valid(config)
    upper = _upper_bounds(config, q_max)
    result = solve_lp(_lp(_q_rows(config, r_o, r_e), config.total_users, upper))
    status = _status_of(result)
    outcome = SearchOutcome(status, r_o, result if result.is_optimal else None, 1)
    return _finish(PowerSpace.PILOT, config, outcome, r_e)


def op4_maxmin_p(config: SystemConfig, r_e: float, p_tot: float, delta_o: Optional[float] = None,
                 method: Optional[str] = None, model: Optional[EstimationModel] = None) -> PowerSolution:
    """Max-min legitimate rate over BS powers under the budget and ordering rows"""
    require_valid(config)
    delta_o = settings.DELTA_O if delta_o is None else delta_o
    method = settings.SEARCH_METHOD if method is None else method
    model = compute_rho(config) if model is None else model

    def lp_at(r_o: float) -> LpResult:
        rows = build_constraints_in_p(config, model, r_o, r_e, p_tot)
        return solve_lp(_lp(rows, config.total_users))

    logger.info(f"OP4: max-min over BS powers, r_e={r_e}, P_tot={p_tot}, search={method}")
    outcome = search_rate_target(lp_at, r_e, _p_rate_cap(config, model, p_tot), delta_o, method)
    return _finish(PowerSpace.TRANSMIT, config, outcome, r_e)


def op5_minpower_p(config: SystemConfig, r_e: float, r_o: float, p_tot: float,
                   model: Optional[EstimationModel] = None) -> PowerSolution:
    """Minimum total BS power meeting both thresholds, the budget and the ordering"""
    require_valid(config)
    model = compute_rho(config) if model is None else model
    result = solve_lp(_lp(build_constraints_in_p(config, model, r_o, r_e, p_tot), config.total_users))
    status = _status_of(result)
    outcome = SearchOutcome(status, r_o, result if result.is_optimal else None, 1)
    return _finish(PowerSpace.TRANSMIT, config, outcome, r_e)


# Baselines

def equal_allocation(config: SystemConfig, p_tot: float) -> SystemConfig:
    share = p_tot / config.total_users
    return config.with_tx_power([(share,) * size for size in config.cluster_sizes])


def fixed_proportion_allocation(config: SystemConfig, p_tot: float) -> SystemConfig:
    """P_{m,n} = n / (1 + ... + N_m) * P_tot / M"""
    per_cluster = p_tot / config.n_clusters
    rows = []
    for size in config.cluster_sizes:
        weight = size * (size + 1) / 2.0
        rows.append(tuple(n / weight * per_cluster for n in range(1, size + 1)))
    return config.with_tx_power(rows)


def min_equal_pilot_power(config: SystemConfig, r_e: float, r_o: float, q_max: float,
                          tolerance: float = 1e-10) -> PowerSolution:
    """
    Smallest common user pilot power in [0, q_max] whose closed-form rates
    meet both thresholds, bisected down to ``tolerance``.

    Raising the common power raises every user's rho and lowers the Eve's,
    so feasibility is monotone in q and the feasible end of the bracket is
    returned.
    """
    if tolerance <= 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}")

    def meets(q: float) -> bool:
        return verify_solution(config.with_user_pilot_power(q), r_o, r_e, slack=0.0)

    if not meets(q_max):
        return PowerSolution(PowerSpace.PILOT, SolutionStatus.INFEASIBLE, r_o, r_e)
    low, high = 0.0, float(q_max)
    if meets(low):
        high = low
    while high - low > tolerance:
        middle = 0.5 * (low + high)
        if meets(middle):
            high = middle
        else:
            low = middle
    values = np.full(config.total_users, high)
    return PowerSolution(PowerSpace.PILOT, SolutionStatus.OPTIMAL, r_o, r_e, values,
                         float(values.sum()), config.with_user_pilot_power(high))


def min_legit_rate(config: SystemConfig) -> float:
    return min(u.legit_rate for u in closed_form_report(config).users)


def max_eve_rate(config: SystemConfig) -> float:
    return max(u.eve_rate for u in closed_form_report(config).users)


def feasible_rows(rows: Sequence[ConstraintRow], x: Sequence[float], slack: float = 0.0) -> Tuple[bool, List[str]]:
    """Check a point against rows; returns (all satisfied, labels of violated rows)"""
    violated = [f"{row.family}({row.cluster + 1},{row.user})" for row in rows if not row.is_satisfied(x, slack)]
    return not violated, violated
