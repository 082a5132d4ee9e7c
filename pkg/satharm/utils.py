# File: satharm/utils.py
import io
import logging
import os
from typing import Dict, Optional, Union

import numpy as np
from dotenv import dotenv_values

# --- Constants ---
THREADS_ENV_VAR: str = "SATHARM_THREADS"
DB_FLOOR: float = 1e-30

ArrayOrFloat = Union[float, np.ndarray]


def resolve_workers(default: int = 0) -> int:
    """Worker count for thread fan-outs: SATHARM_THREADS if set, else the CPU count."""
    fallback = default or os.cpu_count() or 1
    raw = os.getenv(THREADS_ENV_VAR)
    if not raw:
        return fallback
    try:
        value = int(raw)
    except ValueError:
        logging.warning(f"Ignoring non-integer {THREADS_ENV_VAR}={raw!r}. Using {fallback} worker(s).")
        return fallback
    if value < 1:
        logging.warning(f"{THREADS_ENV_VAR} must be >= 1, got {value}. Using 1 worker.")
        return 1
    return value


def power_db(power: ArrayOrFloat) -> ArrayOrFloat:
    """10·log10 of a linear power, floored so silence maps to a finite value."""
    return 10.0 * np.log10(np.maximum(power, DB_FLOOR))


def parse_key_values(text: str) -> Dict[str, Optional[str]]:
    """Raw ``key = value`` pairs of a scenario, manifest or report block; ``#`` starts a comment."""
    return dict(dotenv_values(stream=io.StringIO(text), interpolate=False))
