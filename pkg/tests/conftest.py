"""
Shared fixtures for noma-lab tests
"""
import pytest

from src.system_model import SystemConfig, default_config


def make_config(path_loss, pilot_power, tx_power, n_antennas=16, pilot_length=None,
                sic_residual_coeff=0.0, enforce_power_order=False) -> SystemConfig:
    """Build a config from per-cluster rows (Eve first in path_loss / pilot_power)"""
    n_clusters = len(tx_power)
    return SystemConfig(
        n_antennas=n_antennas,
        n_clusters=n_clusters,
        cluster_sizes=tuple(len(row) for row in tx_power),
        pilot_length=pilot_length if pilot_length is not None else n_clusters,
        path_loss=path_loss,
        pilot_power=pilot_power,
        tx_power=tx_power,
        sic_residual_coeff=sic_residual_coeff,
        enforce_power_order=enforce_power_order,
    )


@pytest.fixture
def default():
    return default_config()


@pytest.fixture
def two_user_cluster():
    """One cluster, two users, active Eve"""
    return make_config(path_loss=[(0.3, 1.0, 0.5)], pilot_power=[(0.5, 1.0, 1.0)],
                       tx_power=[(1.0, 2.0)], n_antennas=16, pilot_length=2)


@pytest.fixture
def two_clusters():
    """Two clusters of two users, active Eves"""
    return make_config(path_loss=[(0.3, 1.0, 0.4), (0.2, 0.8, 0.5)],
                       pilot_power=[(0.5, 1.0, 1.0), (0.3, 1.0, 1.0)],
                       tx_power=[(2.0, 3.0), (2.0, 3.0)], n_antennas=32, pilot_length=2)
