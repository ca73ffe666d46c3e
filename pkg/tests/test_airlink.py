"""
Unit tests for airlink module
"""
import numpy as np
import pytest

from src.airlink import instantaneous_sinr, make_beams, order_from_gains, sic_order
from src.channel_estimation import ChannelRealization, compute_rho, simulate_estimation
from src.system_model import SeedSpec
from tests.conftest import make_config


def fixed_realization(channels, estimate):
    """Realization with hand-set channels (Eve in row 0) and a single cluster estimate"""
    estimate = np.atleast_2d(np.asarray(estimate, dtype=complex))
    return ChannelRealization(
        true_channels=(np.asarray(channels, dtype=complex),),
        despread_obs=estimate.copy(),
        estimate=estimate.copy(),
        normalized_estimate=estimate.copy(),
        degenerate=(False,),
    )


class TestMakeBeams:
    """Test cases for MRT beams"""

    def test_scaling_identity(self):
        """h_hat = (2, 0, ..., 0) gives w = (1, 0, ..., 0)"""
        realization = fixed_realization(np.zeros((2, 4)), [2, 0, 0, 0])

        beams = make_beams(realization)

        assert np.allclose(beams[0], [1, 0, 0, 0])

    def test_unit_norm(self, default):
        """Every beam has unit norm"""
        model = compute_rho(default)
        for t in range(100):
            beams = make_beams(simulate_estimation(default, SeedSpec(21, t), model))
            assert np.allclose(np.linalg.norm(beams.beams, axis=1), 1.0, atol=1e-12)

    def test_scale_invariance(self, default):
        """Beams from the raw and the normalized estimate agree"""
        realization = simulate_estimation(default, SeedSpec(22))

        from_estimate = make_beams(realization, source='estimate')
        from_normalized = make_beams(realization, source='normalized')

        assert np.allclose(from_estimate.beams, from_normalized.beams, atol=1e-12)

    def test_zero_estimate_falls_back(self):
        """A zero estimate still yields a unit beam"""
        config = make_config(path_loss=[(0.5, 1.0)], pilot_power=[(0.0, 0.0)], tx_power=[(1.0,)], pilot_length=1)
        realization = simulate_estimation(config, SeedSpec(23))

        beams = make_beams(realization, source='estimate')

        assert np.linalg.norm(beams[0]) == pytest.approx(1.0)

    def test_unknown_source(self, default):
        """Unknown beam source is rejected"""
        realization = simulate_estimation(default, SeedSpec(24))
        with pytest.raises(ValueError):
            make_beams(realization, source='true')


class TestSicOrder:
    """Test cases for SIC decoding order"""

    def test_sort(self):
        """Gains (4, 1, 9) decode in order (3, 1, 2)"""
        assert order_from_gains((4.0, 1.0, 9.0)) == (3, 1, 2)

    def test_ties_keep_index_order(self):
        """Equal gains keep the lower index first"""
        assert order_from_gains((1.0, 1.0)) == (1, 2)

    def test_first_user_is_strongest(self, default):
        """The first decoded user has the largest effective gain"""
        model = compute_rho(default)
        for t in range(100):
            realization = simulate_estimation(default, SeedSpec(25, t), model)
            record = instantaneous_sinr(default, realization, make_beams(realization))
            gains = record.effective_gains[0]
            assert sic_order(record, 0)[0] == int(np.argmax(gains)) + 1


class TestInstantaneousSinr:
    """Test cases for per-realization SINR"""

    def test_single_user_no_interference(self):
        """|h^H w|^2 = 1, alpha = 1, P = 2 gives SINR 2"""
        config = make_config(path_loss=[(0.5, 1.0)], pilot_power=[(0.0, 1.0)], tx_power=[(2.0,)],
                             n_antennas=4, pilot_length=1)
        channels = [[0, 0, 0, 0], [1, 0, 0, 0]]
        realization = fixed_realization(channels, [1, 0, 0, 0])

        record = instantaneous_sinr(config, realization, make_beams(realization))

        assert record.legit_sinr[0][0] == pytest.approx(2.0)
        assert record.eve_sinr[0][0] == 0.0

    def test_two_equal_users_scalar_channel(self):
        """N_t = 1, equal users: the second decoded user sees the first as interference"""
        config = make_config(path_loss=[(0.5, 1.0, 1.0)], pilot_power=[(0.0, 1.0, 1.0)],
                             tx_power=[(1.0, 1.0)], n_antennas=1, pilot_length=1)
        realization = fixed_realization([[0], [1], [1]], [1])

        record = instantaneous_sinr(config, realization, make_beams(realization))

        assert record.sic_orders[0] == (1, 2)
        assert record.legit_sinr[0][0] == pytest.approx(1.0)
        assert record.legit_sinr[0][1] == pytest.approx(0.5)

    def test_residual_interference(self):
        """Imperfect SIC leaves a fraction of the cancelled user"""
        config = make_config(path_loss=[(0.5, 1.0, 1.0)], pilot_power=[(0.0, 1.0, 1.0)],
                             tx_power=[(1.0, 1.0)], n_antennas=1, pilot_length=1, sic_residual_coeff=0.5)
        realization = fixed_realization([[0], [1], [1]], [1])

        record = instantaneous_sinr(config, realization, make_beams(realization))

        assert record.legit_sinr[0][0] == pytest.approx(2.0 / 3.0)

    def test_later_users_lose_from_stronger_power(self):
        """More power on a user decoded earlier never raises the SINR of users decoded after it"""
        config = make_config(path_loss=[(0.3, 1.0, 0.6, 0.3)], pilot_power=[(0.5, 1.0, 1.0, 1.0)],
                             tx_power=[(1.0, 2.0, 3.0)], n_antennas=8, pilot_length=1, sic_residual_coeff=0.1)
        model = compute_rho(config)
        for t in range(20):
            realization = simulate_estimation(config, SeedSpec(28, t), model)
            beams = make_beams(realization)
            base = instantaneous_sinr(config, realization, beams)
            order = base.sic_orders[0]
            for position, n in enumerate(order[:-1]):
                powers = list(config.tx_power[0])
                powers[n - 1] *= 2.0
                louder = instantaneous_sinr(config.with_tx_power([tuple(powers)]), realization, beams)

                assert louder.sic_orders[0] == order
                for later in order[position + 1:]:
                    assert louder.legit_sinr[0][later - 1] <= base.legit_sinr[0][later - 1]

    def test_eve_independent_of_ordering(self, default):
        """The Eve SINR does not depend on the users' SIC order"""
        realization = simulate_estimation(default, SeedSpec(26))
        beams = make_beams(realization)

        realized = instantaneous_sinr(default, realization, beams, ordering='realized')
        configured = instantaneous_sinr(default, realization, beams, ordering='configured')

        for m in range(default.n_clusters):
            assert np.array_equal(realized.eve_sinr[m], configured.eve_sinr[m])
        assert configured.sic_orders[0] == (1, 2, 3, 4)

    def test_sinr_finite_nonnegative(self, default):
        """All SINRs are finite and nonnegative"""
        model = compute_rho(default)
        for t in range(20):
            realization = simulate_estimation(default, SeedSpec(27, t), model)
            record = instantaneous_sinr(default, realization, make_beams(realization))
            values = np.concatenate(record.legit_sinr + record.eve_sinr)
            assert np.all(np.isfinite(values))
            assert np.all(values >= 0)

    def test_unknown_ordering(self, default):
        """Unknown ordering is rejected"""
        realization = simulate_estimation(default, SeedSpec(28))
        with pytest.raises(ValueError):
            instantaneous_sinr(default, realization, make_beams(realization), ordering='random')
