"""
Default tolerances, grid sizes and runtime knobs.

Every numeric default used across the package lives here so that the
experiment harness and the tests agree on what "passes".
"""

import json
import logging
import os

log = logging.getLogger(__name__)

# Residual tolerances
DEFAULT_TOL = 1e-10      # absolute, cocycle/Gamma/multiplier pipelines
EXACT_TOL = 1e-12        # identities that hold up to rounding only
EIG_TOL = 1e-8           # relative, PSD / CPD certification
PINV_CUTOFF = 1e-10      # relative to the largest eigenvalue
HERMITIAN_TOL = 1e-10    # relative, Gram symmetry check

# Branch tracking
BRANCH_GUARD = 1.0           # |ratio - 1| must stay below this
BRANCH_REFINE_LEVELS = 4     # extra dyadic refinements before giving up

# Fock space
DEFAULT_TRUNCATION = 8

# Grids
HORIZON_FACTOR = 3       # n_max * h >= HORIZON_FACTOR * (largest t used)
DEFAULT_STEP = 1.0 / 64
DEFAULT_NMAX = 192
DEFAULT_SEED = 20240611

# Overflow guard for exp(g / n)
MAX_EXPONENT = 700.0

THREADS_ENV = "PATHSPACE_THREADS"


def thread_count():
    """
    Number of worker threads allowed for Gram assembly.

    Returns:
        int: value of PATHSPACE_THREADS, or 1 when unset or invalid
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        log.warning("ignoring %s=%r (not an integer)", THREADS_ENV, raw)
        return 1
    if n < 1:
        log.warning("ignoring %s=%r (must be positive)", THREADS_ENV, raw)
        return 1
    return n


def load_config(path):
    """
    Read an experiment config file.

    Args:
        path: JSON file whose keys mirror the command-line flags
              (dashes or underscores both accepted)

    Returns:
        dict: normalized keys (underscored) to values
    """
    from .errors import ConfigError

    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return {str(k).replace("-", "_"): v for k, v in data.items()}
