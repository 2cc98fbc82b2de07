"""Brute-force sampling from the full collision-free distribution."""

from __future__ import annotations

from math import comb

import numba as nb
import numpy as np

from ..linalg import DimensionError, Interferometer
from ..permanent import SizeLimitError, binomial_table, enumerate_weights
from ._base import SampleSet

MAX_PATTERNS = 10**7


def _check(interferometer: Interferometer, n: int, max_patterns: int) -> int:
    if not 1 <= n <= interferometer.m:
        raise DimensionError(f"need 1 <= n <= m={interferometer.m}, got n={n}")
    total = comb(interferometer.m, n)
    if total > max_patterns:
        raise SizeLimitError(
            f"C({interferometer.m},{n}) = {total} patterns exceeds max_patterns={max_patterns}"
        )
    return total


def exact_weights(u, n: int, cols=None, max_patterns: int = MAX_PATTERNS) -> np.ndarray:
    """``|Per(A_S)|^2`` for every collision-free ``S``, indexed by colex rank.

    Computes each of the ``C(m, n)`` permanents exactly once.
    """
    interferometer = u if isinstance(u, Interferometer) else Interferometer(u)
    _check(interferometer, n, max_patterns)
    cols = np.arange(n) if cols is None else np.asarray(cols)
    return enumerate_weights(interferometer.u[:, cols], n)


def exact_distribution(u, n: int, cols=None, max_patterns: int = MAX_PATTERNS) -> np.ndarray:
    """The collision-free distribution renormalised to sum to one."""
    w = exact_weights(u, n, cols, max_patterns)
    return w / w.sum()


@nb.njit(cache=True)
def _unrank_many(ranks, n, m, binom):
    out = np.empty((ranks.shape[0], n), dtype=np.int64)
    for t in range(ranks.shape[0]):
        r = ranks[t]
        c = m - 1
        for i in range(n, 0, -1):
            while binom[c, i] > r:
                c -= 1
            out[t, i - 1] = c
            r -= binom[c, i]
            c -= 1
    return out


def unrank_many(ranks, n: int, m: int) -> np.ndarray:
    """Vectorised inverse of the colex rank."""
    return _unrank_many(np.asarray(ranks, dtype=np.int64), n, m, binomial_table(m, n))


def sample_brute_force(u, n: int, count: int, seed: int, max_patterns: int = MAX_PATTERNS) -> SampleSet:
    """Draw ``count`` i.i.d. patterns by inverse-CDF over all ``C(m, n)`` weights.

    ``max_patterns`` bounds the enumeration (the default keeps memory near
    80 MB); raise it deliberately for larger instances.
    """
    interferometer = u if isinstance(u, Interferometer) else Interferometer(u)
    total = _check(interferometer, n, max_patterns)
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = np.random.default_rng(seed)
    cdf = enumerate_weights(interferometer.columns(n), n)
    np.cumsum(cdf, out=cdf)
    z = float(cdf[-1])
    ranks = np.searchsorted(cdf, rng.random(count) * z, side="right")
    np.minimum(ranks, total - 1, out=ranks)
    del cdf
    patterns = unrank_many(ranks, n, interferometer.m)
    return SampleSet(n, interferometer.m, patterns, "brute", seed, interferometer.fingerprint,
                     stats={"complex_evals": total, "cfs_mass": z})
