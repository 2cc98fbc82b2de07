"""Exact sampling from the distinguishable-particle distribution.

Each photon entering input column ``j`` leaves in output mode ``i`` with
probability ``|U_ij|^2``, independently of the others, so one draw costs
``O(mn)``. Draws with two photons in the same mode are discarded and
redrawn, which restricts the distribution to collision-free patterns
without changing relative weights.
"""

from __future__ import annotations

import numpy as np

from ..linalg import DimensionError, Interferometer
from ._base import SampleSet


def column_cdfs(u: np.ndarray, cols) -> np.ndarray:
    """Cumulative ``|U_ij|^2`` over output modes, one column per input."""
    probs = np.abs(np.asarray(u)[:, np.asarray(cols)]) ** 2
    cdf = np.cumsum(probs, axis=0)
    cdf /= cdf[-1]
    return cdf


def _route(cdf: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    m, k = cdf.shape
    draws = rng.random((size, k))
    out = np.empty((size, k), dtype=np.int64)
    for j in range(k):
        out[:, j] = np.searchsorted(cdf[:, j], draws[:, j], side="right")
    np.minimum(out, m - 1, out=out)
    return out


def route_particles(cdf: np.ndarray, size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Raw routing draws (collisions kept) and a collision-free mask.

    Rows of the returned pattern array are sorted.
    """
    raw = np.sort(_route(cdf, size, rng), axis=1)
    if raw.shape[1] > 1:
        ok = np.all(np.diff(raw, axis=1) > 0, axis=1)
    else:
        ok = np.ones(size, dtype=bool)
    return raw, ok


def draw_collision_free(cdf: np.ndarray, count: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Draw ``count`` collision-free patterns; also return the raw draw count."""
    k = cdf.shape[1]
    out = np.empty((count, k), dtype=np.int64)
    filled = 0
    raw_total = 0
    rate = 1.0
    while filled < count:
        need = count - filled
        size = int(min(max(need / rate * 1.1 + 16, 64), 1 << 18))
        raw, ok = route_particles(cdf, size, rng)
        raw_total += size
        good = raw[ok]
        take = min(len(good), need)
        if take < len(good):
            # the surplus was never looked at: only count draws up to the last one used
            raw_total -= size - (np.flatnonzero(ok)[take - 1] + 1)
        out[filled:filled + take] = good[:take]
        filled += take
        rate = max(ok.mean(), 1e-3)
    return out, raw_total


def sample_distinguishable(u, n: int, count: int, seed: int, cols=None) -> SampleSet:
    """Draw ``count`` collision-free patterns of ``n`` distinguishable particles.

    ``stats["raw_draws"]`` counts every routing drawn, collisions included,
    so ``count / raw_draws`` estimates the collision-free probability.
    """
    interferometer = u if isinstance(u, Interferometer) else Interferometer(u)
    m = interferometer.m
    if not 1 <= n <= m:
        raise DimensionError(f"need 1 <= n <= m={m}, got n={n}")
    if count < 0:
        raise ValueError("count must be non-negative")
    cols = np.arange(n) if cols is None else np.asarray(cols)
    rng = np.random.default_rng(seed)
    patterns, raw = draw_collision_free(column_cdfs(interferometer.u, cols), count, rng)
    return SampleSet(n, m, patterns, "distinguishable", seed, interferometer.fingerprint,
                     stats={"raw_draws": raw})


def cfs_fraction_distinguishable(u, n: int, draws: int = 10**6, seed: int = 0, cols=None) -> float:
    """Collision-free fraction of ``draws`` raw distinguishable routings."""
    interferometer = u if isinstance(u, Interferometer) else Interferometer(u)
    cols = np.arange(n) if cols is None else np.asarray(cols)
    cdf = column_cdfs(interferometer.u, cols)
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < draws:
        size = min(1 << 17, draws - done)
        _, ok = route_particles(cdf, size, rng)
        hits += int(ok.sum())
        done += size
    return hits / draws
