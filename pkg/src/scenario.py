"""
Scenario module for noma-lab
Reads and writes versioned scenario files: a key=value header followed by a
[users] table with one row per user and one Eve row (user 0) per cluster
"""
import io
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd
from dotenv import dotenv_values

from src.system_model import SystemConfig, validate

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
USERS_MARKER = '[users]'
TABLE_COLUMNS = ['cluster', 'user', 'path_loss', 'pilot_power', 'tx_power']
HEADER_KEYS = ('schema_version', 'n_antennas', 'pilot_length', 'sic_residual_coeff', 'enforce_power_order')
REQUIRED_KEYS = ('schema_version', 'n_antennas', 'pilot_length')

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


class ScenarioError(ValueError):
    """Malformed or invalid scenario file"""

    def __init__(self, message: str, source: str = '<string>', line: Optional[int] = None):
        self.source = source
        self.line = line
        location = f"{source}:{line}" if line is not None else source
        super().__init__(f"{location}: {message}")


def _split_sections(text: str, source: str) -> Tuple[List[Tuple[int, str]], List[Tuple[int, str]]]:
    header, table = [], []
    target = header
    seen_marker = False
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if line.lower() == USERS_MARKER:
            if seen_marker:
                raise ScenarioError(f"duplicate {USERS_MARKER} section", source, number)
            seen_marker = True
            target = table
            continue
        target.append((number, line))
    if not seen_marker:
        raise ScenarioError(f"missing {USERS_MARKER} section", source)
    return header, table


def _parse_header(lines: List[Tuple[int, str]], source: str) -> Dict[str, str]:
    key_lines = {}
    for number, line in lines:
        if '=' not in line:
            raise ScenarioError(f"expected key=value, got '{line}'", source, number)
        key = line.split('=', 1)[0].strip()
        if key not in HEADER_KEYS:
            raise ScenarioError(f"unknown key '{key}'", source, number)
        if key in key_lines:
            raise ScenarioError(f"duplicate key '{key}'", source, number)
        key_lines[key] = number

    values = dotenv_values(stream=io.StringIO('\n'.join(line for _, line in lines)))
    for key in REQUIRED_KEYS:
        if not values.get(key):
            raise ScenarioError(f"missing required key '{key}'", source)
    return values


def _as_int(values: Dict[str, str], key: str, source: str) -> int:
    try:
        return int(values[key])
    except (TypeError, ValueError):
        raise ScenarioError(f"'{key}' must be an integer, got '{values[key]}'", source)


def _as_bool(value: Optional[str], key: str, source: str) -> bool:
    if value is None or value == '':
        return False
    lowered = value.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ScenarioError(f"'{key}' must be true or false, got '{value}'", source)


def _parse_table(lines: List[Tuple[int, str]], source: str) -> pd.DataFrame:
    if not lines:
        raise ScenarioError(f"empty {USERS_MARKER} table", source)
    frame = pd.read_csv(io.StringIO('\n'.join(line for _, line in lines)),
                        comment='#', skipinitialspace=True, float_precision='round_trip')
    frame.columns = [str(column).strip() for column in frame.columns]
    if list(frame.columns) != TABLE_COLUMNS:
        raise ScenarioError(f"table columns must be {','.join(TABLE_COLUMNS)}", source, lines[0][0])
    frame['line'] = [number for number, _ in lines[1:1 + len(frame)]]
    return frame


def _row_number(row, source: str, column: str) -> float:
    value = row[column]
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"'{column}' is not a number: '{value}'", source, int(row['line']))
    return value


def parse_scenario(text: str, source: str = '<string>') -> SystemConfig:
    """Build a validated SystemConfig from scenario text"""
    header_lines, table_lines = _split_sections(text, source)
    header = _parse_header(header_lines, source)

    version = _as_int(header, 'schema_version', source)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version}, expected {SCHEMA_VERSION}", source)

    frame = _parse_table(table_lines, source)
    clusters: Dict[int, List] = {}
    for _, row in frame.iterrows():
        line = int(row['line'])
        try:
            cluster, user = int(row['cluster']), int(row['user'])
        except (TypeError, ValueError):
            raise ScenarioError("cluster and user must be integers", source, line)
        tx = row['tx_power']
        if user == 0:
            if not pd.isna(tx) and str(tx).strip() != '':
                raise ScenarioError("eavesdropper rows (user 0) must leave tx_power empty", source, line)
            tx_value = math.nan
        else:
            if pd.isna(tx):
                raise ScenarioError(f"user {user} of cluster {cluster} has no tx_power", source, line)
            tx_value = _row_number(row, source, 'tx_power')
        entry = (user, _row_number(row, source, 'path_loss'), _row_number(row, source, 'pilot_power'), tx_value, line)
        clusters.setdefault(cluster, []).append(entry)

    numbers = sorted(clusters)
    if numbers != list(range(1, len(numbers) + 1)):
        raise ScenarioError(f"clusters must be numbered 1..M contiguously, got {numbers}", source)

    path_loss, pilot_power, tx_power, sizes = [], [], [], []
    for number in numbers:
        rows = sorted(clusters[number], key=lambda entry: entry[0])
        users = [entry[0] for entry in rows]
        if users != list(range(len(users))) or len(users) < 2:
            raise ScenarioError(f"cluster {number} needs an Eve row (user 0) and users 1..N_m, got {users}",
                                source, rows[0][4])
        sizes.append(len(users) - 1)
        path_loss.append(tuple(entry[1] for entry in rows))
        pilot_power.append(tuple(entry[2] for entry in rows))
        tx_power.append(tuple(entry[3] for entry in rows[1:]))

    try:
        residual = float(header.get('sic_residual_coeff') or 0.0)
    except ValueError:
        raise ScenarioError("'sic_residual_coeff' must be a number", source)

    config = SystemConfig(
        n_antennas=_as_int(header, 'n_antennas', source),
        n_clusters=len(numbers),
        cluster_sizes=tuple(sizes),
        pilot_length=_as_int(header, 'pilot_length', source),
        path_loss=path_loss,
        pilot_power=pilot_power,
        tx_power=tx_power,
        sic_residual_coeff=residual,
        enforce_power_order=_as_bool(header.get('enforce_power_order'), 'enforce_power_order', source),
    )
    report = validate(config)
    if not report.passed:
        raise ScenarioError(f"invalid scenario: {report.first_failure}", source)
    logger.debug(f"Parsed scenario {source}: {config.n_clusters} clusters, {config.total_users} users")
    return config


def load_scenario(path: Union[str, Path]) -> SystemConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file: {e}", str(path))
    logger.info(f"Loading scenario from {path}")
    return parse_scenario(text, str(path))


def _format(value: float) -> str:
    return f"{value:.12g}"


def dump_scenario(config: SystemConfig, path: Optional[Union[str, Path]] = None) -> str:
    """
    Serialize a config in the scenario format; also writes it when ``path`` is given.

    Numbers carry 12 significant digits.
    """
    lines = [
        f"schema_version={SCHEMA_VERSION}",
        f"n_antennas={config.n_antennas}",
        f"pilot_length={config.pilot_length}",
        f"sic_residual_coeff={_format(config.sic_residual_coeff)}",
        f"enforce_power_order={'true' if config.enforce_power_order else 'false'}",
        USERS_MARKER,
        ','.join(TABLE_COLUMNS),
    ]
    for m in range(config.n_clusters):
        lines.append(f"{m + 1},0,{_format(config.path_loss[m][0])},{_format(config.pilot_power[m][0])},")
        for n in range(1, config.cluster_sizes[m] + 1):
            lines.append(f"{m + 1},{n},{_format(config.path_loss[m][n])},"
                         f"{_format(config.pilot_power[m][n])},{_format(config.tx_power[m][n - 1])}")
    text = '\n'.join(lines) + '\n'
    if path is not None:
        Path(path).write_text(text, encoding='utf-8')
        logger.info(f"Scenario written to {path}")
    return text
