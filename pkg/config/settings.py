"""
Configuration loader for noma-lab
Loads and validates environment variables from .env file
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

PROJECT_ROOT = Path(__file__).parent.parent


class Settings:
    """Application settings loaded from environment variables"""

    # Parallelism
    THREADS = int(os.getenv('NOMA_LAB_THREADS', str(os.cpu_count() or 1)))

    # Monte Carlo defaults
    DEFAULT_TRIALS = int(os.getenv('NOMA_LAB_TRIALS', '10000'))
    DEFAULT_SEED = int(os.getenv('NOMA_LAB_SEED', '20240601'))

    # Optimizer defaults
    DELTA_O = float(os.getenv('NOMA_LAB_DELTA_O', '0.01'))
    SEARCH_METHOD = os.getenv('NOMA_LAB_SEARCH', 'bisection').strip().lower()
    MAX_SEARCH_STEPS = int(os.getenv('NOMA_LAB_MAX_STEPS', '100000'))
    LP_TOLERANCE = float(os.getenv('LP_TOLERANCE', '1e-9'))
    CONSTRAINT_SLACK = float(os.getenv('CONSTRAINT_SLACK', '1e-8'))

    # Scenario configuration
    SCENARIO_FILE = os.getenv('SCENARIO_FILE', './config/scenarios/default.scn')

    # Export Configuration
    OUTPUT_DIR = os.getenv('OUTPUT_DIR', './output')
    CSV_ENCODING = os.getenv('CSV_ENCODING', 'utf-8')

    # Logging Configuration
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('LOG_FILE', './logs/noma_lab.log')
    LOG_MAX_BYTES = int(os.getenv('LOG_MAX_BYTES', '10485760'))  # 10MB default
    LOG_BACKUP_COUNT = int(os.getenv('LOG_BACKUP_COUNT', '5'))  # Keep 5 backup files

    @classmethod
    def validate(cls):
        """Validate settings"""
        problems = []

        if cls.THREADS < 1:
            problems.append('NOMA_LAB_THREADS must be >= 1')
        if cls.DEFAULT_TRIALS < 100:
            problems.append('NOMA_LAB_TRIALS must be >= 100')
        if cls.DEFAULT_SEED < 0 or cls.DEFAULT_SEED >= 2 ** 64:
            problems.append('NOMA_LAB_SEED must be a 64-bit unsigned integer')
        if cls.DELTA_O <= 0:
            problems.append('NOMA_LAB_DELTA_O must be > 0')
        if cls.SEARCH_METHOD not in ('bisection', 'stepped'):
            problems.append("NOMA_LAB_SEARCH must be 'bisection' or 'stepped'")
        if cls.MAX_SEARCH_STEPS < 1:
            problems.append('NOMA_LAB_MAX_STEPS must be >= 1')
        if not 0 < cls.LP_TOLERANCE < 1e-3:
            problems.append('LP_TOLERANCE must be in (0, 1e-3)')
        if cls.LOG_LEVEL.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            problems.append(f'LOG_LEVEL not recognised: {cls.LOG_LEVEL}')

        if problems:
            raise ValueError(f"Invalid environment configuration: {'; '.join(problems)}")

        return True

    @classmethod
    def resolve_path(cls, path: str) -> Path:
        """Resolve a relative path against the project root"""
        candidate = Path(path)
        if not candidate.is_absolute():
            candidate = PROJECT_ROOT / candidate
        return candidate

    @classmethod
    def ensure_directories(cls):
        """Ensure required directories exist"""
        cls.resolve_path(cls.OUTPUT_DIR).mkdir(parents=True, exist_ok=True)
        cls.resolve_path(cls.LOG_FILE).parent.mkdir(parents=True, exist_ok=True)


# Create settings instance
settings = Settings()
