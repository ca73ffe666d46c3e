"""
Exporter module for noma-lab
Handles CSV export of rate tables, optimizer outputs and sweep results
"""
import logging
from datetime import datetime
from pathlib import Path
from typing import Optional, Union

import pandas as pd

from config.settings import settings

logger = logging.getLogger(__name__)

NA_VALUE = 'NA'
FLOAT_FORMAT = '%.12g'


class CSVExporter:
    """Handles CSV export"""

    def __init__(self, output_dir: Optional[Union[str, Path]] = None, file_prefix: str = 'noma_lab'):
        """
        Initialize CSV Exporter

        Args:
            output_dir: Directory for auto-named files. If None, uses OUTPUT_DIR from settings.
            file_prefix: Prefix for auto-named files
        """
        self.output_dir = Path(output_dir) if output_dir is not None else settings.resolve_path(settings.OUTPUT_DIR)
        self.file_prefix = file_prefix
        self.encoding = settings.CSV_ENCODING

    def generate_filename(self, command: str) -> str:
        """
        Generate timestamped filename for CSV export

        Returns:
            Filename string (e.g., 'noma_lab_analyze_2025-12-22_143000.csv')
        """
        timestamp = datetime.now().strftime('%Y-%m-%d_%H%M%S')
        return f"{self.file_prefix}_{command}_{timestamp}.csv"

    def export_to_csv(self, dataframe: pd.DataFrame, filepath: Optional[Union[str, Path]] = None,
                      command: str = 'run') -> Optional[Path]:
        """
        Export DataFrame to CSV file

        Missing values (infeasible points, divergent limits) are written as NA and
        floats with 12 significant digits.

        Args:
            dataframe: pandas DataFrame to export
            filepath: Target path. If None, a timestamped file in the output directory

        Returns:
            Path to exported file, or None if error
        """
        try:
            if dataframe is None or dataframe.empty:
                logger.warning("Cannot export empty DataFrame")
                return None

            if filepath is None:
                self.output_dir.mkdir(parents=True, exist_ok=True)
                filepath = self.output_dir / self.generate_filename(command)
            filepath = Path(filepath)

            logger.info(f"Exporting {len(dataframe)} rows to {filepath}")

            dataframe.to_csv(
                filepath,
                index=False,
                encoding=self.encoding,
                na_rep=NA_VALUE,
                float_format=FLOAT_FORMAT,
                lineterminator='\n',
            )

            if filepath.exists():
                file_size = filepath.stat().st_size
                logger.info(f"CSV file exported successfully: {filepath} ({file_size} bytes)")
                return filepath
            else:
                logger.error("CSV file was not created")
                return None

        except Exception as e:
            logger.error(f"Error exporting to CSV: {str(e)}")
            return None


def read_csv(filepath: Union[str, Path]) -> pd.DataFrame:
    """Read an exported CSV back, NA cells as NaN"""
    return pd.read_csv(filepath, na_values=[NA_VALUE], keep_default_na=False)
