"""Exact matrix permanents.

Three independent routes are provided so that each can check the others:

* :func:`per_naive` sums over all ``n!`` permutations (oracle, ``n <= 10``).
* :func:`per_ryser` is Ryser's inclusion-exclusion formula walked in
  Gray-code order, one row-sum update per subset, ``O(n 2^n)``.
* :func:`per_glynn` is the Balasubramanian-Bax/Franklin-Glynn formula
  over ``+-1`` vectors, also Gray-code ordered.

Large matrices split the Gray-code index range into a fixed number of
contiguous blocks. Each block rebuilds its starting row sums in
``O(n^2)``, so total work stays ``O(n 2^n)``; block partials are combined
pairwise. The partition does not depend on the thread count, so results
are bit-identical for any ``PERMSAMP_THREADS``.
"""

from __future__ import annotations

import itertools
import os
import time
from dataclasses import dataclass

import numba as nb
import numpy as np

MAX_NAIVE_N = 10
MAX_N = 64
_BLOCKED_MIN_N = 14
_N_BLOCKS = 64


class SizeLimitError(ValueError):
    """Raised when a matrix is too large for the requested algorithm."""


def configure_threads(threads: int | None = None) -> int:
    """Set the numba thread count from ``threads`` or ``PERMSAMP_THREADS``.

    ``0`` (the default) means all available cores.
    """
    if threads is None:
        threads = int(os.environ.get("PERMSAMP_THREADS", "0") or 0)
    limit = nb.config.NUMBA_NUM_THREADS
    threads = limit if threads <= 0 else min(threads, limit)
    nb.set_num_threads(threads)
    return threads


def _as_square(a, dtype) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    if np.iscomplexobj(a) and dtype is np.float64:
        raise TypeError("per_ryser_real needs a real matrix")
    return np.ascontiguousarray(a, dtype=dtype)


# ---------------------------------------------------------------------------
# kernels


@nb.njit(cache=True, inline="always")
def _trailing_zeros(k):
    tz = 0
    while (k & 1) == 0:
        k >>= 1
        tz += 1
    return tz


@nb.njit(cache=True)
def _ryser_range(a, k0, k1):
    """Signed Ryser partial sum over Gray-code indices ``k0..k1`` inclusive.

    Nijenhuis-Wilf form: row sums start from ``a[:, -1] - rowsum(a) / 2``
    and the walk covers subsets of the first ``n - 1`` columns. The
    centring keeps the terms within a small factor of the result (plain
    inclusion-exclusion loses ~7 digits on the 20x20 all-ones matrix).
    """
    n = a.shape[0]
    r = np.empty(n, dtype=a.dtype)
    for i in range(n):
        acc = a[i, 0] * 0
        for j in range(n):
            acc += a[i, j]
        r[i] = a[i, n - 1] - 0.5 * acc
    g = k0 ^ (k0 >> 1)
    for j in range(n - 1):
        if (g >> j) & 1:
            for i in range(n):
                r[i] += a[i, j]
    total = a[0, 0] * 0
    k = k0
    while True:
        p = a[0, 0] * 0 + 1
        for i in range(n):
            p *= r[i]
        # parity of popcount(gray(k)) equals parity of k
        if k & 1:
            total -= p
        else:
            total += p
        if k == k1:
            break
        k += 1
        j = _trailing_zeros(k)
        g ^= 1 << j
        if (g >> j) & 1:
            for i in range(n):
                r[i] += a[i, j]
        else:
            for i in range(n):
                r[i] -= a[i, j]
    return total


@nb.njit(cache=True)
def _glynn_range(a, k0, k1):
    """Unnormalised Glynn partial sum over Gray-code indices ``k0..k1``."""
    n = a.shape[0]
    s = np.zeros(n, dtype=a.dtype)
    g = k0 ^ (k0 >> 1)
    # row i+1 carries delta = -1 when bit i of g is set; row 0 is fixed at +1
    for i in range(n):
        sign = 1.0
        if i > 0 and (g >> (i - 1)) & 1:
            sign = -1.0
        for j in range(n):
            s[j] += sign * a[i, j]
    total = a[0, 0] * 0
    k = k0
    while True:
        p = a[0, 0] * 0 + 1
        for j in range(n):
            p *= s[j]
        if k & 1:
            total -= p
        else:
            total += p
        if k == k1:
            break
        k += 1
        b = _trailing_zeros(k)
        g ^= 1 << b
        row = b + 1
        if (g >> b) & 1:
            for j in range(n):
                s[j] -= 2 * a[row, j]
        else:
            for j in range(n):
                s[j] += 2 * a[row, j]
    return total


@nb.njit(cache=True)
def _pairwise_sum(x):
    buf = x.copy()
    size = buf.shape[0]
    while size > 1:
        half = size // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if size & 1:
            buf[half] = buf[size - 1]
            size = half + 1
        else:
            size = half
    return buf[0]


@nb.njit(cache=True, parallel=True)
def _ryser_blocked(a, nblocks):
    n = a.shape[0]
    last = (1 << (n - 1)) - 1
    step = (last + 1) // nblocks
    parts = np.zeros(nblocks, dtype=a.dtype)
    for b in nb.prange(nblocks):
        parts[b] = _ryser_range(a, b * step, (b + 1) * step - 1)
    return _pairwise_sum(parts)


@nb.njit(cache=True, parallel=True)
def _glynn_blocked(a, nblocks):
    n = a.shape[0]
    last = (1 << (n - 1)) - 1
    step = (last + 1) // nblocks
    parts = np.zeros(nblocks, dtype=a.dtype)
    for b in nb.prange(nblocks):
        parts[b] = _glynn_range(a, b * step, (b + 1) * step - 1)
    return _pairwise_sum(parts)


@nb.njit(cache=True)
def _ryser_serial(a):
    n = a.shape[0]
    total = 2 * _ryser_range(a, 0, (1 << (n - 1)) - 1)
    if n & 1:
        return total
    return -total


@nb.njit(cache=True)
def _glynn_serial(a):
    n = a.shape[0]
    return _glynn_range(a, 0, (1 << (n - 1)) - 1) / 2.0 ** (n - 1)


# ---------------------------------------------------------------------------
# public single-matrix API


def _check_size(n: int, limit: int = MAX_N) -> None:
    if n > limit:
        raise SizeLimitError(f"matrix size {n} exceeds the limit of {limit}")


def per_naive(a) -> complex:
    """Permanent by direct enumeration of all ``n!`` permutations.

    Exponentially slower than :func:`per_ryser`; kept as an independent
    oracle and refuses ``n > 10``.
    """
    a = _as_square(a, np.complex128)
    n = a.shape[0]
    _check_size(n, MAX_NAIVE_N)
    if n == 0:
        return 1 + 0j
    rows = np.arange(n)
    total = 0j
    perms = itertools.permutations(range(n))
    while True:
        chunk = np.array(list(itertools.islice(perms, 50000)), dtype=np.intp)
        if chunk.size == 0:
            break
        total += a[rows, chunk].prod(axis=1).sum()
    return complex(total)


def per_ryser(a) -> complex:
    """Permanent of a complex square matrix by Gray-code Ryser."""
    a = _as_square(a, np.complex128)
    return complex(_ryser(a))


def per_ryser_real(a) -> float:
    """Permanent of a real square matrix by Gray-code Ryser."""
    a = _as_square(a, np.float64)
    return float(_ryser(a))


def _ryser(a):
    n = a.shape[0]
    _check_size(n)
    if n == 0:
        return 1.0
    if n >= _BLOCKED_MIN_N:
        total = 2 * _ryser_blocked(a, _N_BLOCKS)
        return total if n & 1 else -total
    return _ryser_serial(a)


def per_glynn(a) -> complex:
    """Permanent of a complex square matrix by the Glynn formula."""
    a = _as_square(a, np.complex128)
    n = a.shape[0]
    _check_size(n)
    if n == 0:
        return 1 + 0j
    if n >= _BLOCKED_MIN_N:
        return complex(_glynn_blocked(a, _N_BLOCKS) / 2.0 ** (n - 1))
    return complex(_glynn_serial(a))


def permanent(a):
    """Ryser permanent, real or complex according to the input dtype."""
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return per_ryser(a)
    return per_ryser_real(a)


# ---------------------------------------------------------------------------
# batched kernels used by the samplers


@nb.njit(cache=True, inline="always")
def _gather(u, rows, cols, out_c):
    n = rows.shape[0]
    for i in range(n):
        for j in range(n):
            out_c[i, j] = u[rows[i], cols[j]]


@nb.njit(cache=True)
def _perm_small(a):
    n = a.shape[0]
    total = 2 * _ryser_range(a, 0, (1 << (n - 1)) - 1)
    if n & 1:
        return total
    return -total


@nb.njit(cache=True, parallel=True)
def _batch_weights(u, rows, cols, want_f, want_g):
    """``|Per(U[rows_b, cols_b])|^2`` and ``Per(|U[rows_b, cols_b]|^2)`` per batch row."""
    count = rows.shape[0]
    n = rows.shape[1]
    f = np.zeros(count)
    g = np.zeros(count)
    for b in nb.prange(count):
        sub = np.empty((n, n), dtype=np.complex128)
        _gather(u, rows[b], cols[b], sub)
        if want_f:
            p = _perm_small(sub)
            f[b] = p.real * p.real + p.imag * p.imag
        if want_g:
            sq = np.empty((n, n))
            for i in range(n):
                for j in range(n):
                    z = sub[i, j]
                    sq[i, j] = z.real * z.real + z.imag * z.imag
            g[b] = _perm_small(sq)
    return f, g


def batch_weights(u, rows, cols, want_f: bool = True, want_g: bool = True):
    """Evaluate boson and distinguishable weights for many submatrices.

    Parameters
    ----------
    u : ndarray, shape (m, m')
        Transfer matrix (complex).
    rows : ndarray of int, shape (count, n)
        Output modes per pattern.
    cols : ndarray of int, shape (count, n) or (n,)
        Input columns per pattern; a single row is broadcast.

    Returns
    -------
    f, g : ndarray of float, shape (count,)
        ``|Per(A_S)|^2`` and ``Per(|A_S|^2)``; a skipped quantity is zeros.
    """
    u = np.ascontiguousarray(u, dtype=np.complex128)
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    if rows.ndim != 2:
        raise ValueError("rows must be a 2-d array of patterns")
    cols = np.asarray(cols, dtype=np.int64)
    if cols.ndim == 1:
        cols = np.broadcast_to(cols, rows.shape)
    cols = np.ascontiguousarray(cols)
    if cols.shape != rows.shape:
        raise ValueError(f"cols shape {cols.shape} does not match rows shape {rows.shape}")
    if rows.shape[0] == 0 or rows.shape[1] == 0:
        ones = np.ones(rows.shape[0])
        return ones, ones.copy()
    return _batch_weights(u, rows, cols, want_f, want_g)


@nb.njit(cache=True)
def _unrank_colex(r, n, m, binom, out):
    c = m - 1
    for i in range(n, 0, -1):
        while binom[c, i] > r:
            c -= 1
        out[i - 1] = c
        r -= binom[c, i]
        c -= 1


@nb.njit(cache=True)
def _next_colex(c, m):
    """Advance ``c`` to the next combination in colex order; False when exhausted."""
    n = c.shape[0]
    for i in range(n):
        limit = c[i + 1] if i + 1 < n else m
        if c[i] + 1 < limit:
            c[i] += 1
            for t in range(i):
                c[t] = t
            return True
    return False


def binomial_table(m: int, n: int) -> np.ndarray:
    """Table ``binom[c, i] = C(c, i)`` as int64 for ``c <= m``, ``i <= n``."""
    from math import comb

    table = np.zeros((m + 1, n + 1), dtype=np.int64)
    for c in range(m + 1):
        for i in range(min(c, n) + 1):
            table[c, i] = comb(c, i)
    return table


@nb.njit(cache=True, parallel=True)
def _enumerate_weights(a, n, m, binom, total, chunk, out):
    nchunks = (total + chunk - 1) // chunk
    for ci in nb.prange(nchunks):
        start = ci * chunk
        stop = min(total, start + chunk)
        c = np.empty(n, dtype=np.int64)
        _unrank_colex(start, n, m, binom, c)
        sub = np.empty((n, n), dtype=np.complex128)
        for r in range(start, stop):
            for i in range(n):
                for j in range(n):
                    sub[i, j] = a[c[i], j]
            p = _perm_small(sub)
            out[r] = p.real * p.real + p.imag * p.imag
            if r + 1 < stop:
                _next_colex(c, m)


def enumerate_weights(a: np.ndarray, n: int) -> np.ndarray:
    """``|Per(A_S)|^2`` for every collision-free pattern, indexed by colex rank.

    ``a`` is the ``m x n`` matrix of input columns.
    """
    from math import comb

    a = np.ascontiguousarray(a, dtype=np.complex128)
    m = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"expected {n} input columns, got {a.shape[1]}")
    total = comb(m, n)
    out = np.empty(total)
    _enumerate_weights(a, n, m, binomial_table(m, n), total, 1 << 14, out)
    return out


# ---------------------------------------------------------------------------
# benchmarking


@dataclass
class BenchRow:
    n: int
    mean_seconds: float
    stderr_seconds: float
    repeats: int
    kind: str


def bench_permanent(n_min: int, n_max: int, repeats: int = 5, kind: str = "complex",
                    seed: int = 0, min_time: float = 0.05) -> list[BenchRow]:
    """Mean wall-clock time per permanent over fresh random matrices.

    Each of the ``repeats`` samples times one fresh random matrix; small
    sizes loop the same matrix until ``min_time`` has elapsed so that
    timer resolution does not dominate.
    """
    if not 2 <= n_min <= n_max <= 30:
        raise ValueError(f"need 2 <= n_min <= n_max <= 30, got {n_min}, {n_max}")
    if kind not in ("complex", "real"):
        raise ValueError(f"kind must be 'complex' or 'real', got {kind!r}")
    rng = np.random.default_rng(seed)
    func = per_ryser if kind == "complex" else per_ryser_real
    func(rng.random((n_min, n_min)) + (0j if kind == "complex" else 0))  # compile
    rows = []
    for n in range(n_min, n_max + 1):
        times = []
        for _ in range(repeats):
            if kind == "complex":
                a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
            else:
                a = rng.random((n, n))
            loops = 0
            t0 = time.perf_counter()
            while True:
                func(a)
                loops += 1
                elapsed = time.perf_counter() - t0
                if elapsed >= min_time:
                    break
            times.append(elapsed / loops)
        t = np.asarray(times)
        se = float(t.std(ddof=1) / np.sqrt(len(t))) if len(t) > 1 else 0.0
        rows.append(BenchRow(n, float(t.mean()), se, repeats, kind))
    return rows


BENCH_HEADER = "n,mean_seconds,stderr_seconds,repeats,kind"


def write_bench_csv(path, rows: list[BenchRow], comments: dict | None = None) -> None:
    """Write the benchmark table; ``comments`` become leading ``# key: value`` lines."""
    lines = [f"# {k}: {v}" for k, v in (comments or {}).items()]
    lines.append(BENCH_HEADER)
    lines += [f"{r.n},{r.mean_seconds:.12g},{r.stderr_seconds:.12g},{r.repeats},{r.kind}" for r in rows]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_bench_csv(path) -> list[BenchRow]:
    import csv

    with open(path) as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        return [BenchRow(int(r["n"]), float(r["mean_seconds"]), float(r["stderr_seconds"]),
                         int(r["repeats"]), r["kind"]) for r in reader]
