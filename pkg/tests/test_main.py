"""
Unit tests for main module
"""
import pandas as pd
import pytest

from src import main as cli
from src.scenario import dump_scenario


@pytest.fixture(autouse=True)
def no_log_files(mocker):
    """Keep tests from attaching rotating file handlers"""
    mocker.patch('src.main.setup_logging')


@pytest.fixture
def small_scenario(tmp_path, two_clusters):
    path = tmp_path / 'small.scn'
    dump_scenario(two_clusters, path)
    return path


class TestMain:
    """Test cases for the command-line entry point"""

    def test_analyze_writes_csv(self, tmp_path, small_scenario):
        """analyze writes one row per user"""
        out = tmp_path / 'analyze.csv'

        code = cli.main(['analyze', '--scenario', str(small_scenario), '--out', str(out)])

        assert code == 0
        frame = pd.read_csv(out)
        assert len(frame) == 4
        assert list(frame['mode'].unique()) == ['closed-form']

    def test_simulate_is_reproducible(self, tmp_path, small_scenario):
        """Same seed twice gives byte-identical CSV files"""
        first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
        args = ['simulate', '--scenario', str(small_scenario), '--trials', '100', '--seed', '7']

        assert cli.main(args + ['--out', str(first)]) == 0
        assert cli.main(args + ['--out', str(second)]) == 0

        assert first.read_bytes() == second.read_bytes()

    def test_optimize_infeasible_writes_na(self, tmp_path, small_scenario):
        """Infeasible problems still produce a CSV, with NA cells"""
        out = tmp_path / 'op3.csv'

        code = cli.main(['optimize', '--problem', 'op3', '--re', '0', '--ro', '1',
                         '--scenario', str(small_scenario), '--out', str(out)])

        assert code == 0
        text = out.read_text(encoding='utf-8')
        assert 'infeasible' in text
        assert ',NA,' in text

    def test_invalid_sweep(self, small_scenario):
        """A malformed --sweep is an invalid invocation"""
        assert cli.main(['sweep', '--sweep', 'bogus=1,2', '--scenario', str(small_scenario)]) == 1

    def test_too_few_trials(self, small_scenario):
        assert cli.main(['simulate', '--trials', '10', '--scenario', str(small_scenario)]) == 1

    def test_unknown_preset(self):
        """argparse rejects unknown preset names"""
        with pytest.raises(SystemExit):
            cli.main(['preset', 'fig9'])

    def test_missing_scenario(self, tmp_path):
        """An unreadable scenario fails the run"""
        assert cli.main(['analyze', '--scenario', str(tmp_path / 'absent.scn'),
                         '--out', str(tmp_path / 'x.csv')]) == 1

    def test_export_failure(self, mocker, small_scenario):
        """A failed export fails the run"""
        mocker.patch('src.main.CSVExporter.export_to_csv', return_value=None)

        assert cli.main(['analyze', '--scenario', str(small_scenario)]) == 1

    def test_run_receives_spec(self, mocker, tmp_path):
        """CLI options are carried into the experiment spec"""
        run = mocker.patch('src.main.run', return_value=pd.DataFrame({'value': [1.0]}))

        code = cli.main(['sweep', '--sweep', 'usnr=-10,0', '--re', '0.1', '--out', str(tmp_path / 's.csv')])

        assert code == 0
        spec = run.call_args[0][0]
        assert spec.sweep_axis == 'usnr'
        assert spec.sweep_values == (-10.0, 0.0)
        assert spec.r_e == 0.1
