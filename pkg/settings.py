"""
Runtime settings for the multiplicative chaos lab
Values come from the environment (optionally a .env file) and are read at call time
"""

import os
import logging
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

CODE_VERSION = "0.4.0"

DEFAULT_MAX_TABLE = 200_000_000


def worker_count() -> int:
    """Number of worker processes; RMF_LAB_THREADS overrides the core count"""
    raw = os.environ.get("RMF_LAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logging.getLogger(__name__).warning(f"Ignoring non-integer RMF_LAB_THREADS={raw!r}")
    return os.cpu_count() or 1


def max_table_limit() -> int:
    """Largest factor table the sieve agrees to build"""
    raw = os.environ.get("RMF_LAB_MAX_TABLE")
    return int(float(raw)) if raw else DEFAULT_MAX_TABLE


def log_level() -> str:
    return os.environ.get("RMF_LAB_LOG_LEVEL", "INFO").upper()


def output_dir() -> str:
    return os.environ.get("RMF_LAB_OUTPUT_DIR", "results")
