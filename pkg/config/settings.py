"""
Configuration settings for the rank-correlation engine.
Loads from environment variables with sensible defaults.

Only logging and file output are configurable here; numerical behaviour is
driven by command-line flags and config/copula_constants.py.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Base directory
BASE_DIR = Path(__file__).resolve().parent.parent

# Logging
LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING').upper()
LOG_FILE = os.getenv('LOG_FILE', 'copula_rankcorr.log')

# Reporting
REPORT_OUTPUT_DIR = Path(os.getenv('REPORT_OUTPUT_DIR', str(BASE_DIR / 'reports')))

# Feature Flags
ENABLE_PARALLEL_CURVES = os.getenv('ENABLE_PARALLEL_CURVES', 'false').lower() == 'true'
