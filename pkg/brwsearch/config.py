"""
Configuration settings for the brwsearch toolkit.
"""
import os
from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

# Load environment variables from .env file
# First try to load from the root directory
root_env_path = Path(__file__).parent.parent / ".env"
if root_env_path.exists():
    load_dotenv(root_env_path)
else:
    # If not found, try to load from the package directory
    pkg_env_path = Path(__file__).parent / ".env"
    if pkg_env_path.exists():
        load_dotenv(pkg_env_path)

# Base directories
BASE_DIR = Path(__file__).parent


def _env(name: str, default: str) -> str:
    return os.getenv(f"BRWSEARCH_{name}", default)


# Run settings
DEFAULT_SEED = int(_env("SEED", "20240101"))
DEFAULT_THREADS = int(_env("THREADS", "1"))
DEFAULT_OUT_DIR = Path(_env("OUT_DIR", "results"))
DEFAULT_FORMAT = _env("FORMAT", "csv").lower()
LOG_LEVEL = _env("LOG_LEVEL", "INFO").upper()

# Walk settings
DEFAULT_TRIALS = int(_env("TRIALS", "500"))
DEFAULT_STEP_CAP = int(float(_env("STEP_CAP", "1e7")))

# Numerical settings
ENUMERATION_BUDGET = int(float(_env("ENUMERATION_BUDGET", "1e8")))
CONDITION_LIMIT = float(_env("CONDITION_LIMIT", "1e12"))
ROW_SUM_TOLERANCE = float(_env("ROW_SUM_TOLERANCE", "1e-10"))

# Sweep settings
BETA_MAX = float(_env("BETA_MAX", "8.0"))
BETA_STEP = float(_env("BETA_STEP", "0.25"))

# Rewiring settings
REWIRE_EPS = float(_env("REWIRE_EPS", "0.01"))
REWIRE_MAX_PROPOSALS = int(float(_env("REWIRE_MAX_PROPOSALS", "5e6")))

# Experiment settings
GRAPHS_PER_TARGET = int(_env("GRAPHS_PER_TARGET", "10"))
ALPHA_TARGETS = [-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0]

WALK_CONFIG: Dict[str, Any] = {
    "trials": DEFAULT_TRIALS,
    "step_cap": DEFAULT_STEP_CAP,
    "start_mode": "transient",
}

REWIRE_CONFIG: Dict[str, Any] = {
    "eps": REWIRE_EPS,
    "max_proposals": REWIRE_MAX_PROPOSALS,
    "reconnect": True,
    "mode": "best",
}

EXPERIMENT_CONFIG: Dict[str, Any] = {
    "alpha_targets": ALPHA_TARGETS,
    "graphs_per_target": GRAPHS_PER_TARGET,
    # ER graphs of about 100 nodes
    "n": 100,
    "p": 0.05,
    "beta_max": BETA_MAX,
    "beta_step": BETA_STEP,
    "trials": DEFAULT_TRIALS,
}

# Interface settings
CLI_CONFIG: Dict[str, Any] = {
    "formats": ("csv", "json"),
    "log_format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
}
