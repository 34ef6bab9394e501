# runtime_env.py
import logging
import os

from dotenv import load_dotenv


# Load the .env file next to the package
load_dotenv(dotenv_path=os.path.join(os.path.dirname(__file__), '.env'))

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(name)s - %(message)s'


def sweep_threads() -> int:
    raw = os.environ.get("HALFCAV_THREADS")
    if not raw:
        return os.cpu_count() or 1
    try:
        threads = int(raw)
    except ValueError:
        raise ValueError(f"HALFCAV_THREADS must be a positive integer, got {raw!r}")
    if threads < 1:
        raise ValueError(f"HALFCAV_THREADS must be a positive integer, got {raw!r}")
    return threads


def log_level(override: str = None) -> str:
    level = (override or os.environ.get("HALFCAV_LOG_LEVEL") or "INFO").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise ValueError(f"unknown log level {level!r}")
    return level


def configure_logging(override: str = None) -> None:
    # stdout stays free for JSON reports
    logging.basicConfig(level=log_level(override), format=LOG_FORMAT, force=True)
