"""Counter-based standard normal variates keyed by ``(seed, m, l, n)``.

Each variate is a pure function of its key: a splitmix64-style hash of the
key gives 53 uniform bits, which are pushed through the normal quantile.
Enlarging a truncation therefore extends the set of variates without
changing any that were already in use, and evaluation order is irrelevant.
"""
from __future__ import annotations

import numpy as np
from scipy.special import ndtri

__all__ = ["GaussianSource", "derive_seed", "mix64", "normals"]

_MASK = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TAG_REPLICATE = np.uint64(0x5245504C49434154)
_TAG_TERM = np.uint64(0x5445524D5345454E)


def _u64(x) -> np.ndarray:
    if isinstance(x, (int, np.integer)):
        return np.uint64(int(x) & _MASK)
    return np.asarray(x).astype(np.uint64)


def mix64(x):
    """splitmix64 finaliser applied to ``x + golden``; works on scalars and arrays."""
    with np.errstate(over="ignore"):
        z = _u64(x) + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def _combine(h, v):
    with np.errstate(over="ignore"):
        return mix64(_u64(h) ^ (_u64(v) * _M1))


def derive_seed(seed: int, replicate: int) -> int:
    """Seed of replicate ``replicate``: a keyed hash of ``(seed, replicate)``."""
    return int(_combine(_combine(_TAG_REPLICATE, seed), replicate))


def normals(seeds, m: int, l: int, n: int) -> np.ndarray:
    """Standard normal variate for key ``(seed, m, l, n)``, vectorised over ``seeds``."""
    h = _combine(_combine(_combine(_combine(_TAG_TERM, seeds), m), l), n)
    u = ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


class GaussianSource:
    """Keyed mapping ``(m, l, n) -> N(0, 1)`` for one 64-bit seed."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK

    def __call__(self, m: int, l: int, n: int) -> float:
        return float(normals(self.seed, m, l, n))

    def __repr__(self) -> str:
        return f"GaussianSource(seed={self.seed})"
