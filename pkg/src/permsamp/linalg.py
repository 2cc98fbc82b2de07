"""Matrix primitives shared by the samplers.

Interferometers, Haar-random unitaries, submatrix extraction and the
colexicographic (combinadic) indexing of collision-free output patterns.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np

UNITARITY_TOL = 1e-10


class DimensionError(ValueError):
    """Raised for empty, non-square or mismatched matrix dimensions."""


def unitarity_error(u: np.ndarray) -> float:
    """Max-norm of ``U^dagger U - I``."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


@dataclass(frozen=True, eq=False)
class Interferometer:
    """An ``m``-mode linear-optical transfer matrix.

    The matrix is copied and made read-only on construction.
    """

    u: np.ndarray
    m: int = field(init=False)

    def __post_init__(self):
        u = np.array(self.u, dtype=np.complex128, copy=True)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] == 0:
            raise DimensionError(f"expected a non-empty square matrix, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError("matrix entries must be finite")
        err = unitarity_error(u)
        if err > UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary: max|U^H U - I| = {err:.3e}")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "m", u.shape[0])

    @property
    def fingerprint(self) -> str:
        """Short SHA-256 digest of the matrix entries."""
        return matrix_fingerprint(self.u)

    def columns(self, n: int) -> np.ndarray:
        """The column-orthonormal ``m x n`` matrix of the first ``n`` columns."""
        if not 0 < n <= self.m:
            raise DimensionError(f"need 1 <= n <= m={self.m}, got n={n}")
        return self.u[:, :n]


def matrix_fingerprint(u: np.ndarray) -> str:
    u = np.ascontiguousarray(u, dtype="<c16")
    h = hashlib.sha256()
    h.update(str(u.shape).encode())
    h.update(u.tobytes())
    return h.hexdigest()[:16]


def haar_unitary(m: int, seed: int) -> Interferometer:
    """Draw an ``m x m`` unitary from the Haar measure.

    A complex Ginibre matrix is QR-factorised and the columns of ``Q`` are
    rescaled by the phases of ``diag(R)``; without that correction the
    result is not Haar distributed.

    Parameters
    ----------
    m : int
        Number of modes, ``m >= 1``.
    seed : int
        Seed for :func:`numpy.random.default_rng`. Equal seeds give
        identical matrices.
    """
    if m < 1:
        raise DimensionError(f"mode count must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return Interferometer(q)


def submatrix(u: np.ndarray, rows, cols) -> np.ndarray:
    """Square submatrix with entry ``(i, j) = u[rows[i], cols[j]]``."""
    u = np.asarray(u)
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    if rows.ndim != 1 or cols.ndim != 1 or rows.size != cols.size:
        raise DimensionError(
            f"row and column index lists must have equal length, got {rows.size} and {cols.size}"
        )
    if rows.size and (rows.min() < 0 or rows.max() >= u.shape[0]):
        raise IndexError(f"row index out of range for {u.shape[0]} rows")
    if cols.size and (cols.min() < 0 or cols.max() >= u.shape[1]):
        raise IndexError(f"column index out of range for {u.shape[1]} columns")
    return u[np.ix_(rows, cols)]


def check_pattern(pattern, n: int, m: int) -> tuple[int, ...]:
    """Validate a collision-free output pattern and return it as a tuple."""
    p = tuple(int(x) for x in pattern)
    if len(p) != n:
        raise ValueError(f"pattern {p} has length {len(p)}, expected {n}")
    if any(b <= a for a, b in zip(p, p[1:])):
        raise ValueError(f"pattern {p} is not strictly increasing")
    if p and (p[0] < 0 or p[-1] >= m):
        raise ValueError(f"pattern {p} has modes outside [0, {m})")
    return p


def pattern_rank(pattern, m: int) -> int:
    """Colexicographic rank of a sorted pattern among ``C(m, n)`` patterns."""
    p = check_pattern(pattern, len(tuple(pattern)), m)
    return sum(comb(c, i + 1) for i, c in enumerate(p))


def pattern_unrank(r: int, n: int, m: int) -> tuple[int, ...]:
    """Inverse of :func:`pattern_rank`."""
    total = comb(m, n)
    if not 0 <= r < total:
        raise ValueError(f"rank {r} out of range [0, {total})")
    out = [0] * n
    c = m - 1
    for i in range(n, 0, -1):
        while comb(c, i) > r:
            c -= 1
        out[i - 1] = c
        r -= comb(c, i)
        c -= 1
    return tuple(out)


def occupation_to_pattern(occupation) -> tuple[int, ...]:
    """Convert an occupation tuple ``(s_1, ..., s_m)`` with ``s_i <= 1`` to mode indices."""
    occ = np.asarray(occupation, dtype=int)
    if np.any(occ < 0) or np.any(occ > 1):
        raise ValueError("only collision-free occupations (entries 0 or 1) are supported")
    return tuple(int(i) for i in np.flatnonzero(occ))


def pattern_to_occupation(pattern, m: int) -> tuple[int, ...]:
    occ = [0] * m
    for i in check_pattern(pattern, len(tuple(pattern)), m):
        occ[i] = 1
    return tuple(occ)


def _format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_unitary(path, interferometer: Interferometer, seed: int | None = None,
                  meta: dict | None = None) -> None:
    """Write ``{m, seed, entries: [[re, im], ...]}`` with 17 significant digits.

    ``meta`` (provenance such as tool version) is stored under ``"meta"``.
    """
    u = interferometer.u
    rows = ",\n".join(
        "    [" + _format_float(z.real) + ", " + _format_float(z.imag) + "]" for z in u.ravel()
    )
    seed_txt = "null" if seed is None else str(int(seed))
    meta_txt = f'  "meta": {json.dumps(meta, sort_keys=True)},\n' if meta else ""
    text = (f'{{\n  "m": {interferometer.m},\n  "seed": {seed_txt},\n{meta_txt}'
            f'  "entries": [\n{rows}\n  ]\n}}\n')
    Path(path).write_text(text)


def read_unitary(path) -> tuple[Interferometer, int | None]:
    """Read a unitary file written by :func:`write_unitary`."""
    data = json.loads(Path(path).read_text())
    m = int(data["m"])
    entries = np.asarray(data["entries"], dtype=float)
    if entries.shape != (m * m, 2):
        raise DimensionError(f"expected {m * m} [re, im] entries, got array of shape {entries.shape}")
    u = (entries[:, 0] + 1j * entries[:, 1]).reshape(m, m)
    return Interferometer(u), data.get("seed")
