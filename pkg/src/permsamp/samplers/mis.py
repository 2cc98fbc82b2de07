"""Metropolised independence sampling (MIS) over collision-free patterns.

Proposals come from the distinguishable-particle distribution, with
weight ``g(x) = Per(|A_x|^2)``; the target weight is
``f(x) = |Per(A_x)|^2``. A proposal ``x'`` replaces the current state
``x`` with probability ``min(1, f(x') g(x) / (f(x) g(x')))``; both
normalisations cancel.

Because proposals do not depend on the chain state, a chain's proposals
and their permanents are computed as a batch before the (cheap, strictly
sequential) accept/reject walk.

Step accounting: a chain that emits ``c`` patterns visits exactly
``tau_burn + c * tau_thin`` states, the first being the initial draw,
and evaluates one complex and one real permanent per state.
"""

from __future__ import annotations

from math import ceil

import numba as nb
import numpy as np

from ..linalg import DimensionError, Interferometer, check_pattern
from ..permanent import batch_weights
from ._base import ChainConfig, LossConfig, SampleSet, split_seeds
from .distinguishable import column_cdfs, draw_collision_free

_SEGMENT = 1 << 15


def acceptance_probability(f_cur: float, g_cur: float, f_prop: float, g_prop: float) -> float:
    """``min(1, f(x') g(x) / (f(x) g(x')))`` with zero-weight states handled.

    A current state of zero target weight moves to any proposal of
    positive weight.
    """
    if f_cur <= 0.0:
        return 1.0 if f_prop > 0.0 else 0.0
    num = f_prop * g_cur
    den = f_cur * g_prop
    if den <= 0.0:
        return 1.0 if num > 0.0 else 0.0
    return min(1.0, num / den)


@nb.njit(cache=True)
def _walk(f0, g0, f, g, coins):
    """Accept/reject over a batch of proposals.

    Returns, for every step, the index of the chain state afterwards
    (``-1`` for the state carried in), and the number of acceptances.
    """
    cur = -1
    fc = f0
    gc = g0
    state = np.empty(f.shape[0], dtype=np.int64)
    accepted = 0
    for t in range(f.shape[0]):
        # coin < ratio without division; a zero-weight state leaves for any f > 0
        if coins[t] * fc * g[t] < f[t] * gc or (fc <= 0.0 and f[t] > 0.0):
            cur = t
            fc = f[t]
            gc = g[t]
            accepted += 1
        state[t] = cur
    return state, accepted


class _Chain:
    """One MIS chain over a fixed set of input columns."""

    def __init__(self, u: np.ndarray, cols: np.ndarray, rng: np.random.Generator):
        self.u = u
        self.cols = np.asarray(cols, dtype=np.int64)
        self.cdf = column_cdfs(u, self.cols)
        self.rng = rng
        self.complex_evals = 0
        self.real_evals = 0
        self.steps = 0
        self.accepted = 0
        self.state = None
        self.f = self.g = 0.0

    def _proposals(self, size: int):
        props, _ = draw_collision_free(self.cdf, size, self.rng)
        f, g = batch_weights(self.u, props, self.cols)
        self.complex_evals += size
        self.real_evals += size
        return props, f, g

    def start(self) -> None:
        props, f, g = self._proposals(1)
        self.state, self.f, self.g = props[0], float(f[0]), float(g[0])

    def advance(self, steps: int, keep_from: int = -1, keep_every: int = 1) -> np.ndarray:
        """Run ``steps`` transitions.

        Returns the states ``x_t`` with ``t >= keep_from`` and
        ``(t - keep_from) % keep_every == 0``, where ``t`` counts
        transitions since :meth:`start` (``x_0`` is the initial draw).
        """
        kept = []
        done = 0
        while done < steps:
            size = min(_SEGMENT, steps - done)
            props, f, g = self._proposals(size)
            coins = self.rng.random(size)
            idx, acc = _walk(self.f, self.g, f, g, coins)
            self.accepted += int(acc)
            if keep_from >= 0:
                # local position p is absolute step t = self.steps + done + p + 1
                t0 = self.steps + done + 1
                first = max(keep_from - t0, (keep_from - t0) % keep_every)
                for p in range(first, size, keep_every):
                    i = idx[p]
                    kept.append(self.state if i < 0 else props[i])
            last = idx[-1]
            if last >= 0:
                self.state, self.f, self.g = props[last], float(f[last]), float(g[last])
            done += size
        self.steps += steps
        if not kept:
            return np.empty((0, len(self.cols)), dtype=np.int64)
        return np.array(kept, dtype=np.int64)


def mis_step(u, current, current_f: float, current_g: float, rng: np.random.Generator, cols=None):
    """One MIS transition from ``current``.

    Draws a proposal from the distinguishable distribution and evaluates
    one complex and one real permanent for it.

    Returns
    -------
    tuple
        ``(pattern, f, g, accepted)`` for the state after the step.
    """
    interferometer = u if isinstance(u, Interferometer) else Interferometer(u)
    current = np.asarray(check_pattern(current, len(tuple(current)), interferometer.m))
    cols = np.arange(len(current)) if cols is None else np.asarray(cols)
    props, _ = draw_collision_free(column_cdfs(interferometer.u, cols), 1, rng)
    f, g = batch_weights(interferometer.u, props, cols)
    p = acceptance_probability(current_f, current_g, float(f[0]), float(g[0]))
    if rng.random() < p:
        return tuple(int(x) for x in props[0]), float(f[0]), float(g[0]), True
    return tuple(int(x) for x in current), current_f, current_g, False


def _emit_counts(count: int, chains: int) -> list[int]:
    return [max(0, ceil((count - c) / chains)) for c in range(chains)]


def sample_mis(u, n: int, count: int, config: ChainConfig = ChainConfig()) -> SampleSet:
    """Draw ``count`` patterns with thinned MIS chains.

    Each chain starts from a distinguishable-particle draw, discards its
    first ``tau_burn`` states and then keeps every ``tau_thin``-th state.
    Chain ``c`` (seeded by ``split_seeds(config.seed, chains)[c]``)
    supplies output positions ``c, c + chains, ...``.
    """
    interferometer = u if isinstance(u, Interferometer) else Interferometer(u)
    m = interferometer.m
    if not 1 <= n <= m:
        raise DimensionError(f"need 1 <= n <= m={m}, got n={n}")
    if count < 0:
        raise ValueError("count must be non-negative")
    cols = np.arange(n)
    out = np.empty((count, n), dtype=np.int64)
    per_chain = []
    accepted = steps = evals_c = evals_r = 0
    for c, (ss, k) in enumerate(zip(split_seeds(config.seed, config.chains),
                                    _emit_counts(count, config.chains))):
        if k == 0:
            per_chain.append({"emitted": 0, "steps": 0, "evals": 0})
            continue
        chain = _Chain(interferometer.u, cols, np.random.default_rng(ss))
        chain.start()
        # emitted states are x_t for t = tau_burn + j*tau_thin - 1, j = 1..k
        first = config.tau_burn + config.tau_thin - 1
        last = config.tau_burn + k * config.tau_thin - 1
        x0 = chain.state.copy()
        kept = chain.advance(last, keep_from=first, keep_every=config.tau_thin)
        if first == 0:
            # tau_burn = 0 and tau_thin = 1: the initial draw is emitted too
            kept = np.vstack([x0[None, :], kept])
        out[c::config.chains] = kept
        accepted += chain.accepted
        steps += chain.steps
        evals_c += chain.complex_evals
        evals_r += chain.real_evals
        per_chain.append({"emitted": k, "steps": chain.steps, "evals": chain.complex_evals})
    stats = {
        "complex_evals": evals_c,
        "real_evals": evals_r,
        "transitions": steps,
        "accepted": accepted,
        "per_chain": per_chain,
    }
    rate = accepted / steps if steps else None
    return SampleSet(n, m, out, "mis", config.seed, interferometer.fingerprint, config=config,
                     acceptance_rate=rate, stats=stats)


def _fresh_chain_samples(interferometer: Interferometer, col_sets: np.ndarray, tau_burn: int,
                         rng: np.random.Generator):
    """One fresh chain per column set; emit the state after ``tau_burn`` transitions."""
    k = col_sets.shape[1]
    out = np.empty((len(col_sets), k), dtype=np.int64)
    accepted = steps = evals = 0
    for i, cols in enumerate(col_sets):
        chain = _Chain(interferometer.u, cols, rng)
        chain.start()
        if tau_burn:
            chain.advance(tau_burn)
        out[i] = chain.state
        accepted += chain.accepted
        steps += chain.steps
        evals += chain.complex_evals
    return out, accepted, steps, evals


def sample_mis_lossy(u, loss: LossConfig, count: int, config: ChainConfig = ChainConfig()) -> SampleSet:
    """MIS for input-loss boson sampling.

    For every output pattern a ``k``-subset ``T`` of the ``n`` occupied
    inputs is drawn uniformly, then a fresh chain over the ``k x k``
    submatrices ``A_{S,T}`` runs ``tau_burn`` transitions and its final
    state is emitted (thinning does not apply across inputs). With
    ``k == n`` this is exactly :func:`sample_mis`.
    """
    interferometer = u if isinstance(u, Interferometer) else Interferometer(u)
    n, k = loss.n_prepared, loss.k_detected
    m = interferometer.m
    if n > m:
        raise DimensionError(f"n={n} photons do not fit in m={m} modes")
    if k == n:
        base = sample_mis(interferometer, n, count, config)
        return SampleSet(n, m, base.patterns, "mis_lossy", config.seed, base.matrix_fingerprint,
                         config=config, acceptance_rate=base.acceptance_rate,
                         inputs=np.broadcast_to(np.arange(n), (count, n)), stats=base.stats)
    rng = np.random.default_rng(config.seed)
    col_sets = np.sort(np.argsort(rng.random((count, n)), axis=1)[:, :k], axis=1)
    out, accepted, steps, evals = _fresh_chain_samples(interferometer, col_sets, config.tau_burn, rng)
    stats = {"complex_evals": evals, "real_evals": evals, "transitions": steps, "accepted": accepted,
             "n_prepared": n}
    return SampleSet(k, m, out, "mis_lossy", config.seed, interferometer.fingerprint, config=config,
                     acceptance_rate=accepted / steps if steps else None, inputs=col_sets, stats=stats)


def sample_mis_scattershot(u, n: int, count: int, config: ChainConfig = ChainConfig()) -> SampleSet:
    """MIS for scattershot boson sampling.

    Each pattern gets a uniformly random ``n``-subset of all ``m`` input
    modes followed by a fresh ``tau_burn``-step chain. With ``m == n`` the
    only input is every mode, and the result is :func:`sample_mis`.
    """
    interferometer = u if isinstance(u, Interferometer) else Interferometer(u)
    m = interferometer.m
    if not 1 <= n <= m:
        raise DimensionError(f"need 1 <= n <= m={m}, got n={n}")
    if m == n:
        base = sample_mis(interferometer, n, count, config)
        return SampleSet(n, m, base.patterns, "mis_scattershot", config.seed, base.matrix_fingerprint,
                         config=config, acceptance_rate=base.acceptance_rate,
                         inputs=np.broadcast_to(np.arange(n), (count, n)), stats=base.stats)
    rng = np.random.default_rng(config.seed)
    col_sets = np.sort(np.argsort(rng.random((count, m)), axis=1)[:, :n], axis=1)
    out, accepted, steps, evals = _fresh_chain_samples(interferometer, col_sets, config.tau_burn, rng)
    stats = {"complex_evals": evals, "real_evals": evals, "transitions": steps, "accepted": accepted}
    return SampleSet(n, m, out, "mis_scattershot", config.seed, interferometer.fingerprint,
                     config=config, acceptance_rate=accepted / steps if steps else None,
                     inputs=col_sets, stats=stats)
