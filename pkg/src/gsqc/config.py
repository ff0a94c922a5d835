"""Configuration management for the gsqc laboratory."""

import logging
import os
from typing import Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class AppConfig:
    """Application configuration."""

    def __init__(self):
        self.log_level = os.getenv('LOG_LEVEL', 'INFO')
        self.debug = os.getenv('DEBUG', 'false').lower() == 'true'
        self.threads = max(1, int(os.getenv('GSQC_THREADS', '4')))
        self.output_dir = os.getenv('GSQC_OUTPUT_DIR', 'data/runs')
        self.seed = int(os.getenv('GSQC_SEED', '0'))


class SolverConfig:
    """Eigensolver and numerical tolerance configuration."""

    def __init__(self):
        self.dense_threshold = int(os.getenv('GSQC_DENSE_THRESHOLD', '4096'))
        self.max_states = int(os.getenv('GSQC_MAX_STATES', str(2 ** 24)))
        self.eig_tol = float(os.getenv('GSQC_EIG_TOL', '1e-10'))
        self.kernel_threshold = 1e-8
        self.unitary_tol = 1e-12
        self.max_iterations = int(os.getenv('GSQC_MAX_ITERATIONS', '20000'))


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging once for CLI runs."""
    if app_config.debug:
        level = 'DEBUG'
    logging.basicConfig(
        level=getattr(logging, (level or app_config.log_level).upper(), logging.INFO),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )


# Global configuration instances
app_config = AppConfig()
solver_config = SolverConfig()
