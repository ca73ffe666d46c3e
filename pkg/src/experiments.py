"""
Experiments module for noma-lab
Experiment specs, parameter sweeps and the fig2-fig7 presets, evaluated into tables
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import settings
from src.monte_carlo import run_trials, secrecy_gap_report
from src.power_optimizer import (PowerSolution, equal_allocation, fixed_proportion_allocation,
                                 min_equal_pilot_power, op2_maxmin_q, op3_minpower_q, op4_maxmin_p,
                                 op5_minpower_p)
from src.rate_analysis import closed_form_report, tdma_baseline_rate
from src.scenario import load_scenario
from src.scheduler import SweepScheduler
from src.system_model import SystemConfig, db_to_linear, require_valid

logger = logging.getLogger(__name__)

COMMANDS = ('analyze', 'simulate', 'optimize', 'sweep', 'preset')
AXES = ('n_antennas', 'psnr', 'usnr', 'qsnr', 'cluster-mode')
PROBLEMS = ('op2', 'op3', 'op4', 'op5')
PRESETS = ('fig2', 'fig3', 'fig4', 'fig5', 'fig6', 'fig7')
SWEEP_COLUMNS = ['preset', 'series', 'axis', 'value', 'sum_secrecy_rate', 'min_secrecy_rate',
                 'total_power', 'status']

# Preset grids (dB unless noted)
FIG2_PSNR = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
FIG3_PSNR = (0.0, 10.0, 20.0)
FIG3_ANTENNAS = (16, 32, 64, 128, 256, 512)
FIG4_QSNR = -5.0
FIG4_ANTENNAS = (64, 128)
FIG4_USNR = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0)
FIG5_USERS = 48
FIG5_PILOT_LENGTH = 24
FIG5_CLUSTERS = (24, 16, 12)
FIG5_PSNR = (0.0, 10.0, 20.0, 30.0)
FIG6_RATE_TARGETS = (0.05, 0.1, 0.15, 0.2, 0.25)  # bits per channel use
FIG7_PSNR = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)

DEFAULT_R_E = 0.05
DEFAULT_Q_MAX = 10.0


@dataclass(frozen=True)
class ExperimentSpec:
    """One CLI invocation: what to run, on which scenario, and where to write it"""
    command: str
    scenario_path: Optional[str] = None
    sweep_axis: Optional[str] = None
    sweep_values: Tuple[float, ...] = ()
    trials: int = field(default_factory=lambda: settings.DEFAULT_TRIALS)
    master_seed: int = field(default_factory=lambda: settings.DEFAULT_SEED)
    output_path: Optional[str] = None
    preset: Optional[str] = None
    problem: Optional[str] = None
    r_e: Optional[float] = None
    r_o: Optional[float] = None
    q_max: Optional[float] = None
    p_tot: Optional[float] = None
    delta_o: Optional[float] = None
    search: Optional[str] = None
    threads: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'sweep_values', tuple(float(v) for v in self.sweep_values))
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command '{self.command}', expected one of {COMMANDS}")
        if self.sweep_axis is not None and self.sweep_axis not in AXES:
            raise ValueError(f"Unknown sweep axis '{self.sweep_axis}', expected one of {AXES}")
        values = self.sweep_values
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("Sweep values must be strictly increasing")
        if self.command == 'sweep' and (self.sweep_axis is None or not values):
            raise ValueError("The sweep command needs --sweep AXIS=v1,v2,...")
        if self.command == 'preset' and self.preset not in PRESETS:
            raise ValueError(f"Unknown preset '{self.preset}', expected one of {PRESETS}")
        if self.problem is not None and self.problem not in PROBLEMS:
            raise ValueError(f"Unknown problem '{self.problem}', expected one of {PROBLEMS}")
        if self.command == 'optimize' and self.problem is None:
            raise ValueError("The optimize command needs --problem")
        needs_trials = self.command == 'simulate' or (self.command == 'preset' and self.preset == 'fig2')
        if needs_trials and self.trials < 100:
            raise ValueError(f"trials must be >= 100, got {self.trials}")

    @property
    def r_e_value(self) -> float:
        return DEFAULT_R_E if self.r_e is None else self.r_e

    @property
    def q_max_value(self) -> float:
        return DEFAULT_Q_MAX if self.q_max is None else self.q_max


def parse_sweep(text: str) -> Tuple[str, Tuple[float, ...]]:
    """Parse 'AXIS=v1,v2,...' into the axis name and its values"""
    if '=' not in text:
        raise ValueError(f"Sweep must look like AXIS=v1,v2,..., got '{text}'")
    axis, raw_values = text.split('=', 1)
    axis = axis.strip()
    if axis not in AXES:
        raise ValueError(f"Unknown sweep axis '{axis}', expected one of {AXES}")
    try:
        values = tuple(float(v) for v in raw_values.split(',') if v.strip())
    except ValueError:
        raise ValueError(f"Sweep values must be numbers, got '{raw_values}'")
    if not values:
        raise ValueError("Sweep needs at least one value")
    return axis, values


def load_config(spec: ExperimentSpec) -> SystemConfig:
    path = spec.scenario_path or settings.SCENARIO_FILE
    return load_scenario(settings.resolve_path(path))


def cluster_mode_config(config: SystemConfig, n_clusters: int, total_users: Optional[int] = None,
                        pilot_length: Optional[int] = None) -> SystemConfig:
    """
    Regroup K users into n_clusters equal clusters.

    Users of every cluster get log-spaced path losses over [0.1, 1.0]; Eve and
    pilot parameters come from the first cluster, BS power is re-split with the
    fixed-proportion rule at the same total.
    """
    users = config.total_users if total_users is None else total_users
    if n_clusters < 1 or users % n_clusters:
        raise ValueError(f"{users} users cannot form {n_clusters} equal clusters")
    size = users // n_clusters
    alphas = tuple(float(a) for a in np.logspace(0.0, -1.0, size)) if size > 1 else (1.0,)
    eve = (config.path_loss[0][0], config.pilot_power[0][0])
    user_pilot = config.pilot_power[0][1]
    template = dataclasses.replace(
        config,
        n_clusters=n_clusters,
        cluster_sizes=(size,) * n_clusters,
        pilot_length=config.pilot_length if pilot_length is None else pilot_length,
        path_loss=[(eve[0],) + alphas] * n_clusters,
        pilot_power=[(eve[1],) + (user_pilot,) * size] * n_clusters,
        tx_power=[(0.0,) * size] * n_clusters,
    )
    return require_valid(fixed_proportion_allocation(template, config.total_tx_power))


def apply_axis(config: SystemConfig, axis: str, value: float) -> SystemConfig:
    """Scenario at one sweep point"""
    if axis == 'n_antennas':
        return config.with_antennas(int(round(value)))
    if axis == 'psnr':
        return fixed_proportion_allocation(config, db_to_linear(value))
    if axis == 'usnr':
        return config.with_eve_power(db_to_linear(value))
    if axis == 'qsnr':
        return config.with_user_pilot_power(db_to_linear(value))
    if axis == 'cluster-mode':
        return cluster_mode_config(config, int(round(value)))
    raise ValueError(f"Unknown sweep axis '{axis}'")


@dataclass(frozen=True)
class SweepPoint:
    preset: str
    series: str
    axis: str
    value: float
    config: SystemConfig
    kind: str
    r_o: Optional[float] = None
    p_tot: Optional[float] = None


def _row(point: SweepPoint, total: float = math.nan, summed: float = math.nan,
         minimum: float = math.nan, status: str = 'ok') -> Dict:
    return {
        'preset': point.preset,
        'series': point.series,
        'axis': point.axis,
        'value': point.value,
        'sum_secrecy_rate': summed,
        'min_secrecy_rate': minimum,
        'total_power': total,
        'status': status,
    }


def _solution_row(point: SweepPoint, solution: PowerSolution) -> Dict:
    report = solution.report()
    if not solution.feasible or report is None:
        return _row(point, status=solution.status.value)
    return _row(point, solution.objective, report.system_sum, report.min_secrecy, solution.status.value)


def _solve(point: SweepPoint, spec: ExperimentSpec, problem: str) -> PowerSolution:
    config = point.config
    r_e = spec.r_e_value
    r_o = point.r_o if point.r_o is not None else spec.r_o
    p_tot = point.p_tot if point.p_tot is not None else (spec.p_tot or config.total_tx_power)
    if problem in ('op3', 'op5') and r_o is None:
        raise ValueError(f"{problem} needs a legitimate rate target (--ro)")
    if problem == 'op2':
        return op2_maxmin_q(config, r_e, spec.q_max_value, spec.delta_o, spec.search)
    if problem == 'op3':
        return op3_minpower_q(config, r_e, r_o, spec.q_max_value)
    if problem == 'op4':
        return op4_maxmin_p(config, r_e, p_tot, spec.delta_o, spec.search)
    return op5_minpower_p(config, r_e, r_o, p_tot)


def evaluate_point(point: SweepPoint, spec: ExperimentSpec) -> Dict:
    """One table row for a sweep point"""
    config = point.config
    if point.kind == 'invalid':
        return _row(point, status='invalid')
    if point.kind == 'closed-form':
        report = closed_form_report(config)
        return _row(point, config.total_tx_power, report.system_sum, report.min_secrecy)
    if point.kind == 'monte-carlo':
        secrecy = run_trials(config, spec.trials, spec.master_seed, threads=1).secrecy.mean(axis=0)
        return _row(point, config.total_tx_power, math.fsum(secrecy), float(secrecy.min()))
    if point.kind == 'tdma':
        rates = [tdma_baseline_rate(config, m, n) for m, n in config.users()]
        return _row(point, config.total_tx_power, math.fsum(rates), min(rates))
    if point.kind == 'equal-pilot':
        solution = min_equal_pilot_power(config, spec.r_e_value, point.r_o, spec.q_max_value)
        return _solution_row(point, solution)
    if point.kind in PROBLEMS:
        return _solution_row(point, _solve(point, spec, point.kind))
    raise ValueError(f"Unknown point kind '{point.kind}'")


def _failed_row(point: SweepPoint) -> Dict:
    return _row(point, status='error')


def run_points(points: Sequence[SweepPoint], spec: ExperimentSpec) -> pd.DataFrame:
    """Evaluate points in parallel; rows come back in point order"""
    scheduler = SweepScheduler(partial(evaluate_point, spec=spec), spec.threads)
    results = scheduler.run(list(points))
    rows = [result if result is not None else _failed_row(point) for point, result in zip(points, results)]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def sweep_points(config: SystemConfig, spec: ExperimentSpec) -> List[SweepPoint]:
    kind = spec.problem or 'closed-form'
    points = []
    for value in spec.sweep_values:
        try:
            point_config = apply_axis(config, spec.sweep_axis, value)
        except ValueError as e:
            logger.warning(f"Skipping {spec.sweep_axis}={value:g}: {e}")
            point_config = config
            kind_here = 'invalid'
        else:
            kind_here = kind
        p_tot = point_config.total_tx_power if spec.sweep_axis == 'psnr' else None
        points.append(SweepPoint('sweep', kind, spec.sweep_axis, value, point_config, kind_here, p_tot=p_tot))
    return points


def _fig2(base: SystemConfig, spec: ExperimentSpec) -> List[SweepPoint]:
    points = []
    for psnr in FIG2_PSNR:
        config = apply_axis(base, 'psnr', psnr)
        for kind in ('closed-form', 'monte-carlo', 'tdma'):
            points.append(SweepPoint('fig2', kind, 'psnr', psnr, config, kind))
    return points


def _fig3(base: SystemConfig, spec: ExperimentSpec) -> List[SweepPoint]:
    points = []
    for psnr in FIG3_PSNR:
        powered = apply_axis(base, 'psnr', psnr)
        for n_antennas in FIG3_ANTENNAS:
            points.append(SweepPoint('fig3', f'psnr={psnr:g}dB', 'n_antennas', n_antennas,
                                     powered.with_antennas(n_antennas), 'closed-form'))
    return points


def _fig4(base: SystemConfig, spec: ExperimentSpec) -> List[SweepPoint]:
    points = []
    piloted = apply_axis(base, 'qsnr', FIG4_QSNR)
    for n_antennas in FIG4_ANTENNAS:
        for usnr in FIG4_USNR:
            config = apply_axis(piloted.with_antennas(n_antennas), 'usnr', usnr)
            points.append(SweepPoint('fig4', f'Nt={n_antennas}', 'usnr', usnr, config, 'closed-form'))
    return points


def _fig5(base: SystemConfig, spec: ExperimentSpec) -> List[SweepPoint]:
    points = []
    for n_clusters in FIG5_CLUSTERS:
        grouped = cluster_mode_config(base, n_clusters, FIG5_USERS, FIG5_PILOT_LENGTH)
        for psnr in FIG5_PSNR:
            points.append(SweepPoint('fig5', f'clusters={n_clusters}', 'psnr', psnr,
                                     apply_axis(grouped, 'psnr', psnr), 'closed-form'))
    return points


def _fig6(base: SystemConfig, spec: ExperimentSpec) -> List[SweepPoint]:
    points = []
    for r_o in FIG6_RATE_TARGETS:
        points.append(SweepPoint('fig6', 'op3', 'r_o', r_o, base, 'op3', r_o=r_o))
        points.append(SweepPoint('fig6', 'equal-pilot', 'r_o', r_o, base, 'equal-pilot', r_o=r_o))
    return points


def _fig7(base: SystemConfig, spec: ExperimentSpec) -> List[SweepPoint]:
    points = []
    for psnr in FIG7_PSNR:
        p_tot = db_to_linear(psnr)
        points.append(SweepPoint('fig7', 'op4', 'psnr', psnr, base, 'op4', p_tot=p_tot))
        points.append(SweepPoint('fig7', 'fixed-proportion', 'psnr', psnr,
                                 fixed_proportion_allocation(base, p_tot), 'closed-form'))
        points.append(SweepPoint('fig7', 'equal', 'psnr', psnr, equal_allocation(base, p_tot), 'closed-form'))
    return points


PRESET_BUILDERS = {
    'fig2': _fig2,
    'fig3': _fig3,
    'fig4': _fig4,
    'fig5': _fig5,
    'fig6': _fig6,
    'fig7': _fig7,
}


def preset_points(name: str, base: SystemConfig, spec: ExperimentSpec) -> List[SweepPoint]:
    if name not in PRESET_BUILDERS:
        raise ValueError(f"Unknown preset '{name}', expected one of {PRESETS}")
    return PRESET_BUILDERS[name](base, spec)


def run(spec: ExperimentSpec, config: Optional[SystemConfig] = None) -> pd.DataFrame:
    """
    Execute an experiment and return its table.

    Args:
        spec: what to run
        config: scenario override; loaded from spec.scenario_path (or the
                configured default scenario) when None
    """
    if config is None:
        config = load_config(spec)
    logger.info(f"Running '{spec.command}' on {config.n_clusters} clusters, {config.total_users} users")

    if spec.command == 'analyze':
        return closed_form_report(config).to_frame()
    if spec.command == 'simulate':
        return secrecy_gap_report(config, spec.trials, spec.master_seed, spec.threads)
    if spec.command == 'optimize':
        point = SweepPoint('optimize', spec.problem, '', math.nan, config, spec.problem, p_tot=spec.p_tot)
        solution = _solve(point, spec, spec.problem)
        return solution.to_frame(config)
    if spec.command == 'sweep':
        return run_points(sweep_points(config, spec), spec)
    return run_points(preset_points(spec.preset, config, spec), spec)
