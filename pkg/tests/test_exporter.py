"""
Unit tests for exporter module
"""
import math

import pandas as pd

from src.exporter import CSVExporter, read_csv


class TestCSVExporter:
    """Test cases for CSVExporter"""

    def test_generate_filename(self, tmp_path):
        """Test filename generation"""
        exporter = CSVExporter(output_dir=tmp_path)
        filename = exporter.generate_filename('sweep')

        assert filename.startswith('noma_lab_sweep_')
        assert filename.endswith('.csv')

    def test_export_to_csv(self, tmp_path):
        """Test CSV export to an explicit path"""
        df = pd.DataFrame({
            'cluster': [1, 1, 2],
            'user': [1, 2, 1],
            'secrecy_rate': [1.5, 0.25, 2.0],
        })
        exporter = CSVExporter(output_dir=tmp_path)

        result = exporter.export_to_csv(df, tmp_path / 'test.csv')

        assert result is not None
        assert result.exists()
        assert result.name == 'test.csv'

        df_read = read_csv(result)
        assert len(df_read) == 3
        assert list(df_read.columns) == ['cluster', 'user', 'secrecy_rate']

    def test_auto_named_file(self, tmp_path):
        """Without a path the file lands in the output directory"""
        exporter = CSVExporter(output_dir=tmp_path / 'out')

        result = exporter.export_to_csv(pd.DataFrame({'value': [1.0]}), command='analyze')

        assert result.parent == tmp_path / 'out'
        assert result.name.startswith('noma_lab_analyze_')

    def test_missing_values_written_as_na(self, tmp_path):
        """NaN cells are written as NA and read back as NaN"""
        df = pd.DataFrame({'r_o': [0.5, math.nan], 'status': ['optimal', 'infeasible']})
        exporter = CSVExporter(output_dir=tmp_path)

        result = exporter.export_to_csv(df, tmp_path / 'na.csv')

        assert result.read_text(encoding='utf-8').splitlines()[2] == 'NA,infeasible'
        assert math.isnan(read_csv(result)['r_o'][1])

    def test_twelve_significant_digits(self, tmp_path):
        """Floats carry 12 significant digits"""
        exporter = CSVExporter(output_dir=tmp_path)

        result = exporter.export_to_csv(pd.DataFrame({'value': [math.pi]}), tmp_path / 'pi.csv')

        assert result.read_text(encoding='utf-8') == 'value\n3.14159265359\n'

    def test_export_empty_dataframe(self, tmp_path):
        """Test exporting empty DataFrame"""
        exporter = CSVExporter(output_dir=tmp_path)

        result = exporter.export_to_csv(pd.DataFrame())

        assert result is None

    def test_unwritable_path(self, tmp_path):
        """Write errors are logged and give None"""
        exporter = CSVExporter(output_dir=tmp_path)

        result = exporter.export_to_csv(pd.DataFrame({'value': [1.0]}), tmp_path / 'missing' / 'x.csv')

        assert result is None
