"""Counter-based random streams.

Every Monte Carlo path gets its own independent stream derived from
(master seed, path index), so runs are reproducible and paths can be
computed in any order or in parallel without sharing state.
"""

from __future__ import annotations

import os

import numpy as np


def stream(master_seed: int, path_index: int = 0) -> np.random.Generator:
    """Independent generator for one path, keyed by (master_seed, path_index)."""
    return np.random.Generator(np.random.Philox(key=(master_seed, path_index)))


def worker_count(n_tasks: int) -> int:
    """Parallel width honoring the LLT_LAB_THREADS cap."""
    env = os.environ.get("LLT_LAB_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(n_tasks, cap))
