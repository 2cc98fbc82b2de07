"""Unnormalised pattern weights under the boson and distinguishable models."""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from ..linalg import DimensionError, Interferometer, check_pattern, submatrix
from ..permanent import batch_weights, per_ryser, per_ryser_real
from ._base import LossConfig

MAX_LOSSY_TERMS = 10**4


def _matrix(u) -> np.ndarray:
    return u.u if isinstance(u, Interferometer) else np.asarray(u, dtype=np.complex128)


def _input_columns(n: int, m: int, cols=None) -> np.ndarray:
    if cols is None:
        if n > m:
            raise DimensionError(f"n={n} photons do not fit in m={m} modes")
        return np.arange(n)
    cols = np.asarray(cols, dtype=np.int64)
    if cols.shape != (n,):
        raise DimensionError(f"need {n} input columns, got {cols.shape}")
    return cols


def bs_weight(u, s, cols=None) -> float:
    """``|Per(A_S)|^2`` for a collision-free pattern ``s``.

    ``cols`` selects the input columns (default: the first ``len(s)``).
    """
    u = _matrix(u)
    m = u.shape[0]
    s = check_pattern(s, len(tuple(s)), m)
    p = per_ryser(submatrix(u, s, _input_columns(len(s), m, cols)))
    return p.real * p.real + p.imag * p.imag


def dist_weight(u, s, cols=None) -> float:
    """``Per(|A_S|^2)``, the distinguishable-particle weight of ``s``."""
    u = _matrix(u)
    m = u.shape[0]
    s = check_pattern(s, len(tuple(s)), m)
    sub = submatrix(u, s, _input_columns(len(s), m, cols))
    return per_ryser_real(np.abs(sub) ** 2)


def pattern_weights(u, patterns, cols=None, want_f=True, want_g=True):
    """Vectorised :func:`bs_weight` / :func:`dist_weight` over a pattern array.

    ``cols`` is ``None`` (first ``n`` columns), one column list, or one
    column list per pattern.
    """
    u = _matrix(u)
    patterns = np.asarray(patterns, dtype=np.int64)
    n = patterns.shape[1]
    if cols is None:
        cols = _input_columns(n, u.shape[0])
    return batch_weights(u, patterns, cols, want_f, want_g)


def lossy_weight(u, s, loss: LossConfig, distinguishable: bool = False,
                 max_terms: int = MAX_LOSSY_TERMS) -> float:
    """Input-loss weight: mean of ``|Per(A_{S,T})|^2`` over all ``k``-subsets ``T``.

    ``s`` has ``k_detected`` modes; ``T`` ranges over the ``k``-subsets of
    the ``n_prepared`` occupied input columns. With ``distinguishable`` the
    summand is ``Per(|A_{S,T}|^2)`` instead. Each evaluation costs
    ``C(n, k)`` permanents, so more than ``max_terms`` is refused.
    """
    u = _matrix(u)
    n, k = loss.n_prepared, loss.k_detected
    s = check_pattern(s, k, u.shape[0])
    terms = comb(n, k)
    if terms > max_terms:
        raise ValueError(f"C({n},{k}) = {terms} terms exceeds the limit of {max_terms}")
    subsets = np.array(list(combinations(range(n), k)), dtype=np.int64)
    rows = np.broadcast_to(np.asarray(s, dtype=np.int64), subsets.shape)
    f, g = batch_weights(u, rows, subsets, not distinguishable, distinguishable)
    return float((g if distinguishable else f).mean())
