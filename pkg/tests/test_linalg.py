import json
from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permsamp.linalg import (
    DimensionError,
    Interferometer,
    check_pattern,
    haar_unitary,
    occupation_to_pattern,
    pattern_rank,
    pattern_to_occupation,
    pattern_unrank,
    read_unitary,
    submatrix,
    unitarity_error,
    write_unitary,
)

from .conftest import random_complex


# --- oracles -----------------------------------------------------------------

def test_haar_second_moment_matches_one_over_m():
    # E|U_ij|^2 = 1/m under the Haar measure
    m, draws = 16, 10_000
    vals = np.empty((draws, 3))
    for k in range(draws):
        u = haar_unitary(m, k).u
        vals[k] = abs(u[0, 0]) ** 2, abs(u[3, 7]) ** 2, abs(u[15, 2]) ** 2
    se = vals.std(axis=0, ddof=1) / np.sqrt(draws)
    assert np.all(np.abs(vals.mean(axis=0) - 1 / m) < 3 * se)


def test_haar_phases_are_uniform():
    # a QR without the phase fix leaves diag(R) > 0 and biases arg(U_00); check it is flat
    phases = np.array([np.angle(haar_unitary(3, k).u[0, 0]) for k in range(4000)])
    hist, _ = np.histogram(phases, bins=8, range=(-np.pi, np.pi))
    expected = len(phases) / 8
    chi2 = ((hist - expected) ** 2 / expected).sum()
    assert chi2 < 24.3  # chi-square 7 dof, p = 0.001


def test_submatrix_matches_direct_indexing(rng):
    u = random_complex(rng, 4)
    sub = submatrix(u, (1, 3), (0, 2))
    assert sub.shape == (2, 2)
    for i, r in enumerate((1, 3)):
        for j, c in enumerate((0, 2)):
            assert sub[i, j] == u[r, c]


def test_rank_enumeration_small():
    pats = list(combinations(range(4), 2))
    ranks = [pattern_rank(p, 4) for p in pats]
    assert sorted(ranks) == list(range(6))
    for p, r in zip(pats, ranks):
        assert pattern_unrank(r, 2, 4) == p


# --- trivial cases -----------------------------------------------------------

def test_haar_dim_one_is_a_phase():
    u = haar_unitary(1, 5).u
    assert u.shape == (1, 1)
    assert abs(abs(u[0, 0]) - 1) < 1e-14


def test_haar_deterministic():
    a, b = haar_unitary(9, 7), haar_unitary(9, 7)
    assert np.array_equal(a.u, b.u)
    assert a.fingerprint == b.fingerprint
    assert not np.array_equal(a.u, haar_unitary(9, 8).u)


@pytest.mark.parametrize("m", [1, 2, 9, 64, 300])
def test_haar_unitary_within_tolerance(m):
    assert unitarity_error(haar_unitary(m, 1).u) <= 1e-10


def test_haar_zero_modes():
    with pytest.raises(DimensionError):
        haar_unitary(0, 1)


def test_submatrix_identity():
    eye = np.eye(3)
    assert np.array_equal(submatrix(eye, (0, 1, 2), (0, 1, 2)), eye)
    assert np.array_equal(submatrix(eye, (0, 2), (0, 1)), [[1, 0], [0, 0]])


def test_submatrix_errors():
    eye = np.eye(3)
    with pytest.raises(DimensionError):
        submatrix(eye, (0, 1), (0,))
    with pytest.raises(IndexError):
        submatrix(eye, (0, 3), (0, 1))


def test_rank_endpoints():
    assert pattern_rank((0, 1, 2), 9) == 0
    assert pattern_rank((6, 7, 8), 9) == 83
    with pytest.raises(ValueError):
        pattern_unrank(84, 3, 9)


def test_interferometer_rejects_non_unitary():
    with pytest.raises(ValueError):
        Interferometer(np.ones((2, 2)))
    with pytest.raises(DimensionError):
        Interferometer(np.ones((2, 3)))


def test_interferometer_is_read_only():
    u = haar_unitary(3, 0)
    with pytest.raises(ValueError):
        u.u[0, 0] = 1


def test_check_pattern():
    assert check_pattern((0, 4), 2, 5) == (0, 4)
    for bad in [(1, 1), (2, 1), (0, 5)]:
        with pytest.raises(ValueError):
            check_pattern(bad, 2, 5)


def test_occupation_round_trip():
    occ = (0, 1, 0, 1, 1)
    assert occupation_to_pattern(occ) == (1, 3, 4)
    assert pattern_to_occupation((1, 3, 4), 5) == occ
    with pytest.raises(ValueError):
        occupation_to_pattern((2, 0))


def test_unitary_file_round_trip(tmp_path):
    u = haar_unitary(9, 1)
    path = tmp_path / "u.json"
    write_unitary(path, u, seed=1)
    v, seed = read_unitary(path)
    assert seed == 1
    assert np.array_equal(u.u, v.u)
    data = json.loads(path.read_text())
    assert set(data) == {"m", "seed", "entries"}
    assert len(data["entries"]) == 81


# --- properties --------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10).flatmap(lambda m: st.tuples(st.just(m), st.integers(1, min(m, 4)))).flatmap(
    lambda mn: st.tuples(st.just(mn[0]), st.just(mn[1]), st.integers(0, comb(mn[0], mn[1]) - 1))))
def test_unrank_rank_round_trip(args):
    m, n, r = args
    p = pattern_unrank(r, n, m)
    assert pattern_rank(p, m) == r
    assert list(p) == sorted(set(p))


@pytest.mark.parametrize("m", range(1, 11))
def test_rank_exhaustive(m):
    for n in range(1, min(m, 4) + 1):
        for p in combinations(range(m), n):
            assert pattern_unrank(pattern_rank(p, m), n, m) == p


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_submatrix_composition(seed):
    rng = np.random.default_rng(seed)
    u = random_complex(rng, 6)
    rows = np.sort(rng.choice(6, 4, replace=False))
    cols = np.sort(rng.choice(6, 4, replace=False))
    inner_r = np.sort(rng.choice(4, 2, replace=False))
    inner_c = np.sort(rng.choice(4, 2, replace=False))
    nested = submatrix(submatrix(u, rows, cols), inner_r, inner_c)
    assert np.array_equal(nested, submatrix(u, rows[inner_r], cols[inner_c]))
