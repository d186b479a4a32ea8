"""
Configuration settings for the application.

This module defines configuration variables such as the default charge table,
worker count, random seed and logging level. Values can be overridden through
environment variables or a .env file.
"""
import os
from typing import Optional

import psutil
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Environment
ENVIRONMENT: str = os.getenv("ENVIRONMENT", "development")
DEBUG: bool = ENVIRONMENT == "development"
LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()

# Application
APP_NAME: str = "pocket-cloud-kernels"
APP_VERSION: str = "1.0.0"

# Data Configuration
BASE_DIR: str = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
EXAMPLE_CHARGE_TABLE: str = os.path.join(BASE_DIR, "data", "charge_table_example.csv")

# Default partial-charge table used by extraction when --charges is not given
CHARGE_TABLE_PATH: str = os.getenv("POCKET_CHARGE_TABLE", EXAMPLE_CHARGE_TABLE)

# Worker pool Configuration
_jobs_env: Optional[str] = os.getenv("POCKET_JOBS")
DEFAULT_JOBS: int = int(_jobs_env) if _jobs_env else (psutil.cpu_count() or 1)

# Reproducibility
DEFAULT_SEED: int = int(os.getenv("POCKET_SEED", "0"))

# Output formatting (12 significant digits keeps outputs byte-stable)
FLOAT_FORMAT: str = "%.12g"
