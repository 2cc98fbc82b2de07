"""Estimator-style wrappers around the samplers.

The shape follows scikit-learn density estimators such as
``KernelDensity``: hyperparameters go to ``__init__``, ``fit(U)`` binds
an interferometer, ``sample(count)`` draws patterns and
``score_samples(patterns)`` returns log-weights. ``get_params`` and
``set_params`` come from :class:`sklearn.base.BaseEstimator`, so the
objects clone and print like any other estimator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .linalg import DimensionError, Interferometer
from .permanent import batch_weights
from .samplers import (
    ChainConfig,
    LossConfig,
    SampleSet,
    estimate_mu,
    sample_brute_force,
    sample_distinguishable,
    sample_mis,
    sample_mis_lossy,
    sample_mis_scattershot,
    sample_rejection,
)
from .samplers.exact import MAX_PATTERNS


def check_interferometer(u) -> Interferometer:
    """Validate ``u`` as a unitary and wrap it; pass interferometers through."""
    if isinstance(u, Interferometer):
        return u
    arr = np.asarray(u)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-d unitary, got {arr.ndim} dimensions")
    return Interferometer(arr)


def check_patterns(patterns, n: int, m: int) -> np.ndarray:
    """Coerce to an ``(count, n)`` int array of sorted, distinct, in-range modes."""
    arr = np.atleast_2d(np.asarray(patterns, dtype=np.int64))
    if arr.shape[1] != n:
        raise DimensionError(f"patterns must have {n} modes, got {arr.shape[1]}")
    if arr.size and (arr.min() < 0 or arr.max() >= m):
        raise DimensionError(f"mode index out of range [0, {m})")
    if n > 1 and not np.all(np.diff(arr, axis=1) > 0):
        raise ValueError("patterns must be strictly increasing (collision-free, sorted)")
    return arr


class _PatternSampler(BaseEstimator):
    # subclasses set n_photons and implement _draw(count, seed)

    def fit(self, U, y=None):
        self.interferometer_ = check_interferometer(U)
        self.n_modes_ = self.interferometer_.m
        if not 1 <= self._pattern_size() <= self.n_modes_:
            raise DimensionError(f"cannot place {self._pattern_size()} photons in {self.n_modes_} modes")
        self._after_fit()
        return self

    def _after_fit(self):
        pass

    def _pattern_size(self) -> int:
        return self.n_photons

    def _columns(self):
        return np.arange(self._pattern_size())

    def sample(self, count: int = 1) -> SampleSet:
        check_is_fitted(self, "interferometer_")
        return self._draw(int(count))

    def score_samples(self, patterns) -> np.ndarray:
        """``ln |Per(A_S)|^2`` of each pattern (``-inf`` for zero weight)."""
        check_is_fitted(self, "interferometer_")
        pats = check_patterns(patterns, self._pattern_size(), self.n_modes_)
        f, _ = batch_weights(self.interferometer_.u, pats, self._columns(), True, False)
        with np.errstate(divide="ignore"):
            return np.log(f)


class BruteForceSampler(_PatternSampler):
    """Exact i.i.d. sampling by enumerating every collision-free pattern."""

    def __init__(self, n_photons: int = 3, seed: int = 0, max_patterns: int = MAX_PATTERNS):
        self.n_photons = n_photons
        self.seed = seed
        self.max_patterns = max_patterns

    def _draw(self, count):
        return sample_brute_force(self.interferometer_, self.n_photons, count, self.seed,
                                  self.max_patterns)


class RejectionSampler(_PatternSampler):
    """Uniform-proposal rejection sampling; ``mu=None`` estimates it on fit."""

    def __init__(self, n_photons: int = 3, mu: float | None = None, restarts: int | None = None,
                 seed: int = 0):
        self.n_photons = n_photons
        self.mu = mu
        self.restarts = restarts
        self.seed = seed

    def _after_fit(self):
        self.mu_ = self.mu if self.mu is not None else estimate_mu(
            self.interferometer_, self.n_photons, self.restarts, self.seed)

    def _draw(self, count):
        return sample_rejection(self.interferometer_, self.n_photons, count, self.mu_, self.seed)


class DistinguishableSampler(_PatternSampler):
    """Distinguishable-particle routing restricted to collision-free outcomes."""

    def __init__(self, n_photons: int = 3, seed: int = 0):
        self.n_photons = n_photons
        self.seed = seed

    def _draw(self, count):
        return sample_distinguishable(self.interferometer_, self.n_photons, count, self.seed)


class MISSampler(_PatternSampler):
    """Metropolised independence sampling with a distinguishable-particle proposal."""

    def __init__(self, n_photons: int = 3, tau_burn: int = 100, tau_thin: int = 100, chains: int = 1,
                 seed: int = 0):
        self.n_photons = n_photons
        self.tau_burn = tau_burn
        self.tau_thin = tau_thin
        self.chains = chains
        self.seed = seed

    def _config(self) -> ChainConfig:
        return ChainConfig(self.tau_burn, self.tau_thin, self.seed, self.chains)

    def _draw(self, count):
        return sample_mis(self.interferometer_, self.n_photons, count, self._config())


class LossyMISSampler(MISSampler):
    """MIS with ``n_photons - n_detected`` photons lost at the input."""

    def __init__(self, n_photons: int = 3, n_detected: int = 2, tau_burn: int = 100,
                 tau_thin: int = 100, chains: int = 1, seed: int = 0):
        super().__init__(n_photons, tau_burn, tau_thin, chains, seed)
        self.n_detected = n_detected

    def _after_fit(self):
        self.loss_ = LossConfig(self.n_photons, self.n_detected)
        if self.n_photons > self.n_modes_:
            raise DimensionError(f"cannot place {self.n_photons} photons in {self.n_modes_} modes")

    def _pattern_size(self) -> int:
        return self.n_detected

    def score_samples(self, patterns) -> np.ndarray:
        """``ln`` of the input-loss weight averaged over all detected-input subsets."""
        from .samplers.weights import lossy_weight

        check_is_fitted(self, "interferometer_")
        pats = check_patterns(patterns, self.n_detected, self.n_modes_)
        w = np.array([lossy_weight(self.interferometer_, p, self.loss_) for p in pats])
        with np.errstate(divide="ignore"):
            return np.log(w)

    def _draw(self, count):
        return sample_mis_lossy(self.interferometer_, self.loss_, count, self._config())


class ScattershotMISSampler(MISSampler):
    """MIS with a uniformly random ``n``-subset of input modes per pattern.

    ``score_samples`` scores patterns against the first ``n`` inputs; use
    the ``inputs`` recorded on the returned sample for per-pattern inputs.
    """

    def _draw(self, count):
        return sample_mis_scattershot(self.interferometer_, self.n_photons, count, self._config())


__all__ = [
    "BruteForceSampler",
    "DistinguishableSampler",
    "LossyMISSampler",
    "MISSampler",
    "RejectionSampler",
    "ScattershotMISSampler",
    "check_interferometer",
    "check_patterns",
]
