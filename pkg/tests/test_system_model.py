"""
Unit tests for system_model module
"""
import dataclasses
import math

import numpy as np
import pytest

from src.system_model import (SeedSpec, complex_gaussian, db_to_linear, draw_gaussian_vector,
                              linear_to_db, require_valid, validate)


class TestValidate:
    """Test cases for configuration validation"""

    def test_default_scenario_passes(self, default):
        """Default scenario (N_t=64, M=12, N_m=4) is valid"""
        report = validate(default)

        assert report.passed
        assert bool(report)
        assert default.total_users == 48
        assert default.n_antennas == 64

    def test_short_pilot_rejected(self, default):
        """pilot_length = M - 1 fails"""
        config = dataclasses.replace(default, pilot_length=default.n_clusters - 1)

        report = validate(config)

        assert not report.passed
        assert report.first_failure == 'pilot_length < n_clusters'

    def test_negative_pilot_power_rejected(self, default):
        """A negative Q_{1,2} fails with 'negative power'"""
        rows = [list(row) for row in default.pilot_power]
        rows[0][2] = -1.0
        report = validate(default.with_pilot_power(rows))

        assert 'negative power' in report.failures

    def test_non_finite_rejected(self, default):
        """NaN path loss is reported"""
        rows = [list(row) for row in default.path_loss]
        rows[1][1] = math.nan
        report = validate(default.with_path_loss(rows))

        assert report.first_failure == 'non-finite power or path loss'

    def test_dimension_mismatch_rejected(self, default):
        """tx_power rows must match cluster sizes"""
        rows = [list(row) for row in default.tx_power]
        rows[0] = rows[0][:3]
        report = validate(default.with_tx_power(rows))

        assert not report.passed
        assert 'tx_power for cluster 1' in report.first_failure

    def test_power_order_enforced(self, default):
        """Decreasing BS power inside a cluster fails when ordering is asserted"""
        rows = [list(row) for row in default.tx_power]
        rows[2] = [4.0, 3.0, 2.0, 1.0]
        report = validate(default.with_tx_power(rows))

        assert report.failures == ('tx_power decreasing within cluster 3',)

        relaxed = dataclasses.replace(default.with_tx_power(rows), enforce_power_order=False)
        assert validate(relaxed).passed

    def test_residual_coefficient_range(self, default):
        """sic_residual_coeff must lie in [0, 1]"""
        config = dataclasses.replace(default, sic_residual_coeff=1.5)

        assert 'sic_residual_coeff outside [0, 1]' in validate(config).failures

    def test_require_valid_raises(self, default):
        """require_valid raises ValueError naming the first failure"""
        config = dataclasses.replace(default, pilot_length=1)

        with pytest.raises(ValueError, match='pilot_length < n_clusters'):
            require_valid(config)


class TestSystemConfig:
    """Test cases for SystemConfig helpers"""

    def test_user_indexing(self, default):
        """Users are cluster-major with 1-based user index"""
        users = default.users()

        assert users[0] == (0, 1)
        assert users[4] == (1, 1)
        assert default.user_offset(3) == 12

    def test_power_sums(self, default):
        """Cluster totals and inter-cluster power"""
        assert default.cluster_tx_total(0) == pytest.approx(10.0)
        assert default.total_tx_power == pytest.approx(120.0)
        assert default.inter_cluster_power(5) == pytest.approx(110.0)

    def test_eve_power_override(self, default):
        """with_eve_power changes only the Eve pilot power"""
        config = default.with_eve_power(2.5)

        assert all(row[0] == 2.5 for row in config.pilot_power)
        assert all(row[1:] == (1.0,) * 4 for row in config.pilot_power)

    def test_unflatten(self, default):
        """Flat per-user vectors split back into cluster rows"""
        rows = default.unflatten(np.arange(48.0))

        assert rows[1] == (4.0, 5.0, 6.0, 7.0)
        assert len(rows) == 12


class TestRandomness:
    """Test cases for seeding and Gaussian draws"""

    def test_same_seed_same_vector(self):
        """Same seed twice gives identical vectors"""
        first = draw_gaussian_vector(SeedSpec(7, 3), 8)
        second = draw_gaussian_vector(SeedSpec(7, 3), 8)

        assert np.array_equal(first, second)

    def test_trial_index_changes_stream(self):
        """Different trial indices give different draws"""
        first = draw_gaussian_vector(SeedSpec(7, 3), 8)
        second = draw_gaussian_vector(SeedSpec(7, 4), 8)

        assert not np.array_equal(first, second)

    def test_trial_streams_uncorrelated(self):
        """Neighbouring trial streams have sample cross-correlation below 0.05 over 10^4 draws"""
        for master_seed in (0, 7, 2 ** 40):
            first = draw_gaussian_vector(SeedSpec(master_seed, 0), 10000)
            second = draw_gaussian_vector(SeedSpec(master_seed, 1), 10000)

            correlation = abs(np.vdot(first, second)) / (np.linalg.norm(first) * np.linalg.norm(second))
            assert correlation < 0.05

    def test_seed_range(self):
        """Master seeds outside the 64-bit range are rejected"""
        with pytest.raises(ValueError):
            SeedSpec(-1)
        with pytest.raises(ValueError):
            SeedSpec(2 ** 64)

    def test_squared_norm_mean(self):
        """E||h||^2 = dim for dim=8"""
        rng = SeedSpec(11).rng()
        draws = complex_gaussian(rng, (100000, 8))
        norms = np.sum(np.abs(draws) ** 2, axis=1)

        # ||h||^2 ~ Gamma(8, 1): standard deviation sqrt(8)
        sigma = math.sqrt(8.0) / math.sqrt(len(norms))
        assert abs(norms.mean() - 8.0) < 3 * sigma

    def test_unit_variance(self):
        """dim=1 draws have unit variance"""
        rng = SeedSpec(12).rng()
        draws = complex_gaussian(rng, 100000)
        power = np.abs(draws) ** 2

        sigma = 1.0 / math.sqrt(len(power))
        assert abs(power.mean() - 1.0) < 3 * sigma


class TestDecibels:
    """Test cases for dB conversion"""

    @pytest.mark.parametrize('value', [1e-6, 0.3, 1.0, 10.0, 123456.789])
    def test_round_trip(self, value):
        """linear -> dB -> linear within 1e-12 relative"""
        assert db_to_linear(linear_to_db(value)) == pytest.approx(value, rel=1e-12)

    def test_known_points(self):
        """10 dB is 10, zero power is -inf dB"""
        assert db_to_linear(10.0) == pytest.approx(10.0)
        assert db_to_linear(-5.0) == pytest.approx(0.316227766)
        assert linear_to_db(0.0) == -math.inf
