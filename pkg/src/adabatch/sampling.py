"""Seeded batch selection.

The generator is numpy's PCG64, which has a documented, platform-independent
stream, so a recorded seed reproduces every batch of a run bit-exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import BatchTooLarge

WITH_REPLACEMENT = "with_replacement"
WITHOUT_REPLACEMENT = "without_replacement"
MODES = (WITH_REPLACEMENT, WITHOUT_REPLACEMENT)


class BatchSampler:
    """Single-owner uniform batch source over indices 0..n_samples-1.

    Batches come back sorted so downstream reductions run in a reproducible
    order. Draws mutate the generator state; do not share across threads.
    """

    def __init__(self, seed: int, n_samples: int, mode: str = WITHOUT_REPLACEMENT):
        if mode not in MODES:
            raise ValueError(f"unknown sampling mode {mode!r}")
        if n_samples < 1:
            raise ValueError("n_samples must be positive")
        self.seed = int(seed)
        self.n_samples = int(n_samples)
        self.mode = mode
        self._rng = np.random.default_rng(self.seed)

    def draw(self, size: int) -> np.ndarray:
        if size < 1:
            raise ValueError("batch size must be >= 1")
        if self.mode == WITHOUT_REPLACEMENT:
            if size > self.n_samples:
                raise BatchTooLarge(size, self.n_samples)
            batch = self._rng.choice(self.n_samples, size=size, replace=False)
        else:
            batch = self._rng.integers(0, self.n_samples, size=size)
        return np.sort(batch)
