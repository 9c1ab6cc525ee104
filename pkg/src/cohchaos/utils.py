"""Small helpers shared across modules: index windows and reproducible RNG streams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def central_slice(n: int, fraction: float) -> slice:
    """Central ``fraction`` of ``n`` indices, rounded outward so the window stays centred.

    The count is ``ceil(fraction * n)``, bumped by one if needed so that the
    same number of indices is dropped on both sides.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"window fraction must lie in (0, 1], got {fraction!r}")
    if n < 1:
        raise ValueError("need at least one index")
    count = min(n, math.ceil(fraction * n - 1e-12))
    if (n - count) % 2:
        count += 1
    start = (n - count) // 2
    return slice(start, start + count)


def sample_rng(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for sample ``index`` of a run seeded by ``master_seed``.

    Streams depend only on the pair, so samples can be drawn in any order
    or in parallel without changing the result.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def mean_and_stderr(samples) -> tuple[float, float]:
    """Sample mean and standard error (``ddof=1``); the error is 0 for one sample."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("no samples")
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    samples: int

    @classmethod
    def from_samples(cls, samples) -> "MonteCarloEstimate":
        x = np.asarray(samples, dtype=float)
        mean, err = mean_and_stderr(x)
        return cls(mean, err, int(x.size))

    def within(self, value: float, sigmas: float = 3.0) -> bool:
        return abs(self.mean - value) <= sigmas * self.stderr
