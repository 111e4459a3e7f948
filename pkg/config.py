"""
Configuration for qmahg
Values come from the environment (a local .env is loaded first) with
desk-scale defaults; the CLI can override them from a key-value file.
"""
import os
from typing import Dict, Optional

from dotenv import dotenv_values, load_dotenv

load_dotenv()

# ============================================================================
# RUN DEFAULTS
# ============================================================================
DEFAULT_N = int(os.getenv("QMAHG_N", "1"))
DEFAULT_MODE = os.getenv("QMAHG_MODE", "rational")
DEFAULT_SEED = int(os.getenv("QMAHG_SEED", "7"))
DEFAULT_TOL = float(os.getenv("QMAHG_TOL", "1e-8"))
LOG_LEVEL = os.getenv("QMAHG_LOG_LEVEL", "WARNING")
RECORD_TIMINGS = os.getenv("QMAHG_RECORD_TIMINGS", "true").lower() == "true"

VALID_MODES = ("rational", "float")

# ============================================================================
# GUARDRAILS
# ============================================================================
MAX_N = 4
MAX_POLY_DEGREE = 16
MAX_MIXED_N = 8
HYPERHERMITIAN_RTOL = 1e-10
DEGENERACY_TOL = 1e-12
SKEW_RTOL = 1e-10
MAX_GRID_POINTS = int(os.getenv("QMAHG_MAX_GRID_POINTS", "4000000"))
GRID_CHUNK = 65536

# ============================================================================
# QUADRATURE
# ============================================================================
# Line integrals (C_q, m_q, mean values): composite Gauss-Legendre panels
GAUSS_ORDER = 8
RADIAL_CELLS = int(os.getenv("QMAHG_RADIAL_CELLS", "16"))
T_CELLS = int(os.getenv("QMAHG_T_CELLS", "16"))
REFINEMENT_LEVELS = int(os.getenv("QMAHG_REFINEMENT_LEVELS", "1"))

# Box grids for densities on the group
GRID_POINTS = int(os.getenv("QMAHG_GRID_POINTS", "6"))
GRID_RULE = os.getenv("QMAHG_GRID_RULE", "midpoint")
GRID_REFINEMENT = int(os.getenv("QMAHG_GRID_REFINEMENT", "1"))

# ============================================================================
# SAMPLING
# ============================================================================
PSH_SAMPLES = int(os.getenv("QMAHG_PSH_SAMPLES", "64"))
BOUNDARY_SAMPLES = int(os.getenv("QMAHG_BOUNDARY_SAMPLES", "1024"))
BOUNDARY_TOL = 1e-8
MOLLIFIER_SAMPLES_LOG2 = int(os.getenv("QMAHG_MOLLIFIER_SAMPLES_LOG2", "12"))
FD_STEP = 1e-3

# ============================================================================
# SUITE SIZES
# ============================================================================
IDENTITY_SAMPLES = int(os.getenv("QMAHG_IDENTITY_SAMPLES", "200"))
THEOREM_SAMPLES = int(os.getenv("QMAHG_THEOREM_SAMPLES", "50"))
MATRIX_SAMPLES = int(os.getenv("QMAHG_MATRIX_SAMPLES", "100"))

# Keys accepted in a --config file; they mirror the long CLI flags
CONFIG_FILE_KEYS = {
    "n": int,
    "mode": str,
    "seed": int,
    "tol": float,
    "report": str,
    "log_level": str,
    "refine": int,
    "points": int,
    "rule": str,
}


def validate_mode(mode: str) -> str:
    """Return the mode if it is supported."""
    if mode not in VALID_MODES:
        raise ValueError(f"Mode must be one of {', '.join(VALID_MODES)}, got '{mode}'.")
    return mode


def load_config_file(path: Optional[str]) -> Dict:
    """Read a key-value config file (KEY=VALUE lines) into typed settings.

    Keys are matched case-insensitively against the long CLI flag names;
    dashes and underscores are interchangeable. Unknown keys are rejected
    so typos do not silently fall back to defaults.
    """
    if not path:
        return {}
    if not os.path.exists(path):
        raise ValueError(f"Config file not found: {path}")

    settings = {}
    for raw_key, raw_value in dotenv_values(path).items():
        key = raw_key.strip().lower().replace("-", "_")
        if key not in CONFIG_FILE_KEYS:
            raise ValueError(f"Unknown config key '{raw_key}' in {path}")
        if raw_value is None:
            continue
        try:
            settings[key] = CONFIG_FILE_KEYS[key](raw_value)
        except ValueError:
            raise ValueError(f"Config key '{raw_key}' has invalid value '{raw_value}'")
    if "mode" in settings:
        validate_mode(settings["mode"])
    return settings
