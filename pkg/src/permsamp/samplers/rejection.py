"""Rejection sampling with a uniform proposal and a hill-climbed envelope.

The envelope ``mu`` should be ``max_S |Per(A_S)|^2``. It is estimated by
random-restart hill climbing; proposals whose weight exceeds ``mu`` are
rejected, so an underestimate samples the distribution truncated above
``mu`` (total-variation error equal to the mass above ``mu``).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numba as nb
import numpy as np

from ..linalg import DimensionError, Interferometer
from ..permanent import _perm_small, batch_weights
from ._base import SampleSet


@nb.njit(cache=True)
def _weight(a, rows, sub):
    n = rows.shape[0]
    for i in range(n):
        for j in range(n):
            sub[i, j] = a[rows[i], j]
    p = _perm_small(sub)
    return p.real * p.real + p.imag * p.imag


@nb.njit(cache=True)
def _climb(a, start):
    """Greedy row replacement until a full pass brings no improvement.

    For each position the best unused row is taken if it strictly
    increases the weight; a pass costs ``n (m - n)`` evaluations.
    """
    m, n = a.shape
    cur = start.copy()
    used = np.zeros(m, dtype=np.bool_)
    for i in range(n):
        used[cur[i]] = True
    sub = np.empty((n, n), dtype=np.complex128)
    best = _weight(a, cur, sub)
    evals = 1
    trial = cur.copy()
    improved = True
    while improved:
        improved = False
        for pos in range(n):
            best_row = -1
            best_here = best
            for r in range(m):
                if used[r]:
                    continue
                for i in range(n):
                    trial[i] = cur[i]
                trial[pos] = r
                w = _weight(a, trial, sub)
                evals += 1
                if w > best_here:
                    best_here = w
                    best_row = r
            if best_row >= 0:
                used[cur[pos]] = False
                used[best_row] = True
                cur[pos] = best_row
                best = best_here
                improved = True
    return best, cur, evals


@nb.njit(cache=True)
def _climb_all(a, starts):
    best = -1.0
    best_rows = starts[0].copy()
    evals = 0
    for s in range(starts.shape[0]):
        w, rows, e = _climb(a, starts[s])
        evals += e
        if w > best:
            best = w
            best_rows = rows
    return best, best_rows, evals


def uniform_patterns(m: int, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` uniformly random sorted ``n``-subsets of ``range(m)``."""
    keys = rng.random((size, m))
    if n < m:
        idx = np.argpartition(keys, n - 1, axis=1)[:, :n]
    else:
        idx = np.broadcast_to(np.arange(m), (size, m)).copy()
    return np.sort(idx, axis=1).astype(np.int64)


@dataclass(frozen=True)
class HillClimbResult:
    mu: float
    pattern: tuple
    evaluations: int
    restarts: int


def hill_climb(u, n: int, restarts: int | None = None, seed: int = 0) -> HillClimbResult:
    """Random-restart hill climbing for the largest ``|Per(A_S)|^2``.

    ``restarts`` defaults to ``4 m``.
    """
    interferometer = u if isinstance(u, Interferometer) else Interferometer(u)
    m = interferometer.m
    if not 1 <= n <= m:
        raise DimensionError(f"need 1 <= n <= m={m}, got n={n}")
    if restarts is None:
        restarts = 4 * m
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    starts = uniform_patterns(m, n, restarts, rng)
    a = np.ascontiguousarray(interferometer.columns(n))
    mu, rows, evals = _climb_all(a, starts)
    return HillClimbResult(float(mu), tuple(int(x) for x in np.sort(rows)), int(evals), restarts)


def estimate_mu(u, n: int, restarts: int | None = None, seed: int = 0) -> float:
    """Envelope estimate: the best weight found by :func:`hill_climb`."""
    return hill_climb(u, n, restarts, seed).mu


def sample_rejection(u, n: int, count: int, mu: float, seed: int, batch: int = 4096) -> SampleSet:
    """Rejection sampling with uniform proposals over collision-free patterns.

    A proposal ``S`` is accepted with probability ``|Per(A_S)|^2 / mu``;
    proposals above ``mu`` are always rejected. ``stats`` records the
    number of proposals and the mean proposals per accepted pattern.
    """
    interferometer = u if isinstance(u, Interferometer) else Interferometer(u)
    m = interferometer.m
    if not 1 <= n <= m:
        raise DimensionError(f"need 1 <= n <= m={m}, got n={n}")
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = np.random.default_rng(seed)
    cols = np.arange(n)
    out = np.empty((count, n), dtype=np.int64)
    filled = 0
    proposals = 0
    above = 0
    while filled < count:
        props = uniform_patterns(m, n, batch, rng)
        f, _ = batch_weights(interferometer.u, props, cols, True, False)
        coins = rng.random(batch)
        accept = (coins * mu < f) & (f <= mu)
        idx = np.flatnonzero(accept)
        take = min(len(idx), count - filled)
        if take:
            out[filled:filled + take] = props[idx[:take]]
            filled += take
        used = batch if filled < count else int(idx[take - 1]) + 1
        proposals += used
        above += int(np.count_nonzero(f[:used] > mu))
    stats = {
        "proposals": proposals,
        "complex_evals": proposals,
        "proposals_above_mu": above,
        "mean_proposals_per_sample": proposals / count if count else float("nan"),
        "mu": float(mu),
        "cfs_size": comb(m, n),
    }
    return SampleSet(n, m, out, "rejection", seed, interferometer.fingerprint,
                     acceptance_rate=count / proposals if proposals else None, stats=stats)
