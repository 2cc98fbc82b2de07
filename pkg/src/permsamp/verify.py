"""Statistical checks on sample sets.

* bootstrap two-sample Kolmogorov-Smirnov on ``-ln |Per(A_S)|^2``;
* the likelihood-ratio test of boson sampling against distinguishable
  particles, reported as the posterior probability ``P_ind`` of the
  boson-sampling hypothesis under equal priors;
* sample autocorrelation with the white-noise 95% band.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from math import comb, lgamma

import numpy as np
from scipy.special import expit

from .linalg import Interferometer
from .permanent import batch_weights
from .samplers._base import LossConfig, SampleSet
from .samplers.distinguishable import cfs_fraction_distinguishable
from .samplers.exact import exact_weights, unrank_many
from .samplers.weights import MAX_LOSSY_TERMS

LOG_CLAMP = 700.0


def _interferometer(u) -> Interferometer:
    return u if isinstance(u, Interferometer) else Interferometer(u)


def _columns(sample: SampleSet) -> np.ndarray:
    if sample.inputs is not None:
        return np.asarray(sample.inputs, dtype=np.int64)
    return np.arange(sample.n)


def log_weight_series(u, sample: SampleSet) -> np.ndarray:
    """``-ln |Per(A_S)|^2`` for each pattern, in sample order.

    Lossy and scattershot samples use their recorded input columns.
    """
    interferometer = _interferometer(u)
    f, _ = batch_weights(interferometer.u, sample.patterns, _columns(sample), True, False)
    with np.errstate(divide="ignore"):
        return -np.log(f)


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    bootstrap_reps: int


def ks_statistic(a, b) -> float:
    """Two-sample KS statistic ``sup |F_a - F_b|``."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def ks_bootstrap(a, b, reps: int = 1000, seed: int = 0) -> KsResult:
    """Two-sample KS test with a pooled-bootstrap p-value.

    Under the null both samples come from one distribution, so pairs of
    samples of the original sizes are redrawn with replacement from the
    pooled data. The p-value is the fraction of redrawn statistics at
    least as large as the observed one.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_bootstrap needs two non-empty samples")
    if reps < 100:
        raise ValueError(f"reps must be >= 100, got {reps}")
    observed = ks_statistic(a, b)
    pooled = np.concatenate([a, b])
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(reps):
        ra = pooled[rng.integers(0, pooled.size, a.size)]
        rb = pooled[rng.integers(0, pooled.size, b.size)]
        # tolerance keeps exact ties (e.g. identical inputs) counted as hits
        if ks_statistic(ra, rb) >= observed - 1e-12:
            hits += 1
    return KsResult(observed, hits / reps, reps)


# ---------------------------------------------------------------------------
# likelihood-ratio test


def p_cfs(n: int, m: int) -> float:
    """Haar-average collision-free probability ``C(m, n) / C(m + n - 1, n)``."""
    if not 1 <= n <= m:
        raise ValueError(f"need 1 <= n <= m, got n={n}, m={m}")
    return float(np.exp(lgamma(m + 1) - lgamma(m - n + 1) - lgamma(m + n) + lgamma(m)))


@dataclass(frozen=True)
class LrtCurve:
    """``p_ind[i]`` is the posterior after ``events[i]`` patterns (``p_ind[0] = 1/2``)."""

    events: np.ndarray
    p_ind: np.ndarray
    clamped: int
    normalization: str


def _lossy_weights(u: np.ndarray, patterns: np.ndarray, loss: LossConfig):
    n, k = loss.n_prepared, loss.k_detected
    terms = comb(n, k)
    if terms > MAX_LOSSY_TERMS:
        raise ValueError(f"lossy likelihood needs C({n},{k}) = {terms} terms, limit {MAX_LOSSY_TERMS}")
    f = np.zeros(len(patterns))
    g = np.zeros(len(patterns))
    for cols in combinations(range(n), k):
        ft, gt = batch_weights(u, patterns, np.array(cols))
        f += ft
        g += gt
    return f / terms, g / terms


def likelihood_ratio_curve(u, sample: SampleSet, alt: str = "distinguishable",
                           normalization: str = "haar", z_draws: int = 10**6, seed: int = 0,
                           loss: LossConfig | None = None, z_r: float | None = None) -> LrtCurve:
    """Cumulative posterior of boson sampling (Q) against distinguishable particles (R).

    ``q_x = |Per(A_S)|^2 / Z_Q`` and ``r_x = Per(|A_S|^2) / Z_R``. With
    ``normalization="haar"``, ``Z_Q`` is the Haar-average collision-free
    probability :func:`p_cfs` and ``Z_R`` the collision-free fraction of
    ``z_draws`` distinguishable routings. ``"exact"`` enumerates both
    collision-free masses and is for small instances only.

    ``P_ind`` after ``N`` events is ``1 / (1 + prod r/q)``, accumulated in
    log space. Events with a zero weight have their log-ratio clamped to
    ``+-700``; ``clamped`` counts them.

    For lossy samples pass ``loss``; each likelihood then averages over
    all ``k``-subsets of the prepared inputs. ``z_r`` supplies a
    precomputed ``Z_R`` (useful when scoring many samples of one
    instance); it is ignored for ``normalization="exact"``.
    """
    if alt != "distinguishable":
        raise ValueError(f"unknown alternative hypothesis {alt!r}")
    if normalization not in ("haar", "exact"):
        raise ValueError(f"normalization must be 'haar' or 'exact', got {normalization!r}")
    interferometer = _interferometer(u)
    n, m = sample.n, sample.m
    if loss is not None:
        if loss.k_detected != n:
            raise ValueError("loss.k_detected must match the sample's pattern size")
        f, g = _lossy_weights(interferometer.u, sample.patterns, loss)
        cols_all = None
    else:
        cols_all = _columns(sample)
        if cols_all.ndim == 2:
            raise ValueError("per-pattern inputs need a loss model; scattershot LRT is not defined here")
        f, g = batch_weights(interferometer.u, sample.patterns, cols_all)

    if normalization == "haar":
        z_q = p_cfs(n, m)
        if z_r is not None:
            pass
        elif loss is None:
            z_r = cfs_fraction_distinguishable(interferometer, n, z_draws, seed)
        else:
            # T is uniform over k-subsets, so mix the routing fractions over T
            z_r = np.mean([cfs_fraction_distinguishable(interferometer, n, z_draws, seed, cols=list(t))
                           for t in combinations(range(loss.n_prepared), n)])
    else:
        if loss is None:
            z_q = float(exact_weights(interferometer, n).sum())
            z_r = _exact_dist_mass(interferometer.u, n, cols_all)
        else:
            sets = list(combinations(range(loss.n_prepared), n))
            z_q = float(np.mean([exact_weights(interferometer, n, cols=list(t)).sum() for t in sets]))
            z_r = float(np.mean([_exact_dist_mass(interferometer.u, n, np.array(t)) for t in sets]))

    with np.errstate(divide="ignore", invalid="ignore"):
        step = (np.log(f) - np.log(z_q)) - (np.log(g) - np.log(z_r))
    bad = ~np.isfinite(step) | (np.abs(step) > LOG_CLAMP)
    step = np.where(np.isnan(step), 0.0, step)
    step = np.clip(step, -LOG_CLAMP, LOG_CLAMP)
    llr = np.concatenate([[0.0], np.cumsum(step)])
    return LrtCurve(np.arange(len(llr)), expit(llr), int(bad.sum()), normalization)


def _exact_dist_mass(u: np.ndarray, n: int, cols) -> float:
    m = u.shape[0]
    ranks = np.arange(comb(m, n), dtype=np.int64)
    patterns = unrank_many(ranks, n, m)
    _, g = batch_weights(u, patterns, np.asarray(cols), False, True)
    return float(g.sum())


# ---------------------------------------------------------------------------
# autocorrelation


@dataclass(frozen=True)
class Autocorrelation:
    lags: np.ndarray
    acf: np.ndarray
    band: float

    @property
    def inside(self) -> np.ndarray:
        return np.abs(self.acf) <= self.band

    @property
    def fraction_inside(self) -> float:
        return float(self.inside.mean()) if self.acf.size else 1.0


def autocorrelation(series, max_lag: int = 100) -> Autocorrelation:
    """Sample autocorrelation at lags ``1..max_lag`` with band ``+-1.96/sqrt(N)``.

    Uses the standard biased estimator (lag covariances divided by ``N``).
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ValueError("autocorrelation needs at least two values")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    if not 1 <= max_lag < n:
        raise ValueError(f"max_lag must be in [1, {n - 1}], got {max_lag}")
    x = x - x.mean()
    var = float(x @ x)
    if var <= 1e-300 * n:
        raise ValueError("degenerate series: zero variance, autocorrelation undefined")
    size = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(x, size)
    acov = np.fft.irfft(spec * spec.conj(), size)[: max_lag + 1]
    return Autocorrelation(np.arange(1, max_lag + 1), acov[1:] / var, 1.96 / np.sqrt(n))


# ---------------------------------------------------------------------------
# reports


def _round(x, digits: int = 12):
    if isinstance(x, float):
        return float(f"{x:.{digits}g}")
    return x


def write_report(path, test: str, inputs: dict, seed: int | None, statistic=None, p_value=None,
                 p_ind_curve=None, reps=None, extra: dict | None = None) -> dict:
    """Write the JSON verification report and return it."""
    report = {"test": test, "inputs": inputs, "seed": seed}
    if statistic is not None:
        report["statistic"] = _round(float(statistic))
    if p_value is not None:
        report["p_value"] = _round(float(p_value))
    if p_ind_curve is not None:
        report["p_ind_curve"] = [_round(float(v)) for v in p_ind_curve]
    if reps is not None:
        report["reps"] = int(reps)
    if extra:
        report.update({k: _round(v) for k, v in extra.items()})
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return report


def write_lrt_csv(path, curve: LrtCurve, comments: dict | None = None) -> None:
    """CSV with header ``events,p_ind``, optional ``# key: value`` lines first."""
    with open(path, "w") as fh:
        for key, value in (comments or {}).items():
            fh.write(f"# {key}: {value}\n")
        fh.write("events,p_ind\n")
        for e, p in zip(curve.events, curve.p_ind):
            fh.write(f"{int(e)},{float(p):.12g}\n")


def read_lrt_csv(path) -> LrtCurve:
    events, p = [], []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("events"):
                continue
            e, v = line.strip().split(",")
            events.append(int(e))
            p.append(float(v))
    return LrtCurve(np.array(events), np.array(p), 0, "unknown")


__all__ = [
    "Autocorrelation",
    "KsResult",
    "LrtCurve",
    "autocorrelation",
    "ks_bootstrap",
    "ks_statistic",
    "likelihood_ratio_curve",
    "log_weight_series",
    "p_cfs",
    "read_lrt_csv",
    "write_lrt_csv",
    "write_report",
]
