from itertools import combinations, combinations_with_replacement, product
from math import comb, factorial

import numpy as np
import pytest

from permsamp.linalg import Interferometer, haar_unitary, pattern_rank
from permsamp.permanent import SizeLimitError, per_naive
from permsamp.samplers import (
    ChainConfig,
    LossConfig,
    SampleSet,
    bs_weight,
    cfs_fraction_distinguishable,
    dist_weight,
    estimate_mu,
    exact_distribution,
    exact_weights,
    hill_climb,
    lossy_weight,
    pattern_weights,
    read_sample_csv,
    sample_brute_force,
    sample_distinguishable,
    sample_rejection,
    uniform_patterns,
    write_sample_csv,
)

from .conftest import total_variation


def _freqs(sample):
    return sample.frequencies()


# --- weight oracles ----------------------------------------------------------

def test_cfs_mass_plus_bunched_mass_is_one(u4):
    # full Fock space at n=2, m=4: bunched outcomes carry 1/prod(s_i!)
    u = u4.u
    total = 0.0
    for rows in combinations_with_replacement(range(4), 2):
        sub = u[np.ix_(rows, [0, 1])]
        norm = np.prod([factorial(rows.count(r)) for r in set(rows)])
        total += abs(per_naive(sub)) ** 2 / norm
    cfs = sum(bs_weight(u4, s) for s in combinations(range(4), 2))
    assert total == pytest.approx(1.0, abs=1e-12)
    assert cfs < 1
    bunched = total - cfs
    assert cfs == pytest.approx(1 - bunched, abs=1e-12)


def test_dist_weight_matches_routing_enumeration(u9):
    # probability that 3 distinguishable photons land on the set S, summed over routings
    p = np.abs(u9.u[:, :3]) ** 2
    routed = {}
    for outs in product(range(9), repeat=3):
        if len(set(outs)) < 3:
            continue
        key = tuple(sorted(outs))
        routed[key] = routed.get(key, 0.0) + p[outs[0], 0] * p[outs[1], 1] * p[outs[2], 2]
    for s, prob in routed.items():
        assert dist_weight(u9, s) == pytest.approx(prob, rel=1e-12)


def test_weights_identity():
    eye = Interferometer(np.eye(5))
    assert bs_weight(eye, (0, 1, 2)) == 1
    assert bs_weight(eye, (0, 1, 3)) == 0
    assert dist_weight(eye, (0, 1, 2)) == 1


def test_single_photon_weights(u9):
    for i in range(9):
        assert dist_weight(u9, (i,)) == pytest.approx(abs(u9.u[i, 0]) ** 2)
        assert bs_weight(u9, (i,)) == pytest.approx(abs(u9.u[i, 0]) ** 2)


def test_pattern_weights_vectorised(u9):
    pats = np.array(list(combinations(range(9), 3)))
    f, g = pattern_weights(u9, pats)
    for row, fi, gi in zip(pats[:10], f, g):
        assert fi == pytest.approx(bs_weight(u9, row))
        assert gi == pytest.approx(dist_weight(u9, row))


def test_lossy_weight_is_subset_average(u9):
    s = (1, 4)
    loss = LossConfig(3, 2)
    expected = np.mean([bs_weight(u9, s, cols=list(t)) for t in combinations(range(3), 2)])
    assert lossy_weight(u9, s, loss) == pytest.approx(expected)
    assert lossy_weight(u9, s, LossConfig(2, 2)) == pytest.approx(bs_weight(u9, s))
    with pytest.raises(ValueError):
        lossy_weight(u9, (1,), LossConfig(30, 15), max_terms=100)


def test_loss_config_validation():
    with pytest.raises(ValueError):
        LossConfig(3, 4)
    with pytest.raises(ValueError):
        LossConfig(3, 0)


# --- exact / brute force -----------------------------------------------------

def test_exact_weights_indexed_by_rank(u9):
    w = exact_weights(u9, 3)
    assert len(w) == 84
    for s in [(0, 1, 2), (2, 5, 7), (6, 7, 8)]:
        assert w[pattern_rank(s, 9)] == pytest.approx(bs_weight(u9, s), rel=1e-12)


def test_brute_force_single_photon_split():
    u = haar_unitary(2, 4)
    s = sample_brute_force(u, 1, 100_000, seed=1)
    p0 = abs(u.u[0, 0]) ** 2
    freq = np.mean(s.patterns[:, 0] == 0)
    assert abs(freq - p0) < 3 * np.sqrt(p0 * (1 - p0) / 100_000)


def test_brute_force_counts_each_permanent_once(u9):
    s = sample_brute_force(u9, 3, 1000, seed=0)
    assert s.stats["complex_evals"] == 84
    assert s.stats["cfs_mass"] == pytest.approx(exact_weights(u9, 3).sum())


def test_brute_force_matches_exact(u9):
    s = sample_brute_force(u9, 3, 20_000, seed=2)
    assert total_variation(_freqs(s), exact_distribution(u9, 3)) < 0.05


def test_brute_force_empty_and_guard(u9):
    assert len(sample_brute_force(u9, 3, 0, seed=0)) == 0
    with pytest.raises(SizeLimitError):
        sample_brute_force(haar_unitary(60, 0), 10, 1, seed=0)


# --- distinguishable ---------------------------------------------------------

def test_distinguishable_identity():
    s = sample_distinguishable(np.eye(6), 3, 50, seed=0)
    assert np.all(s.patterns == [0, 1, 2])


def test_distinguishable_frequencies(u4):
    s = sample_distinguishable(u4, 2, 100_000, seed=3)
    g = np.zeros(6)
    for s_ in combinations(range(4), 2):
        g[pattern_rank(s_, 4)] = dist_weight(u4, s_)
    p = g / g.sum()
    freq = _freqs(s)
    sigma = np.sqrt(p * (1 - p) / len(s))
    assert np.all(np.abs(freq - p) < 4 * sigma)


def test_distinguishable_retry_count(u9):
    s = sample_distinguishable(u9, 3, 20_000, seed=4)
    mass = sum(dist_weight(u9, p) for p in combinations(range(9), 3))
    tries = s.stats["raw_draws"] / len(s)
    assert tries == pytest.approx(1 / mass, rel=0.03)
    assert cfs_fraction_distinguishable(u9, 3, 200_000, seed=1) == pytest.approx(mass, abs=0.005)


# --- hill climbing and rejection ---------------------------------------------

def test_mu_identity():
    res = hill_climb(np.eye(7), 3, seed=0)
    assert res.mu == pytest.approx(1)
    assert res.pattern == (0, 1, 2)


def test_hill_climb_finds_global_max_mostly():
    hits = 0
    for k in range(20):
        u = haar_unitary(16, 100 + k)
        hits += estimate_mu(u, 4, seed=k) == pytest.approx(exact_weights(u, 4).max(), rel=1e-12)
    assert hits >= 19


def test_hill_climb_evaluation_count():
    # one start, one pass, no improvement at the identity optimum: n(m-n) trials + the start
    u = Interferometer(np.eye(5))
    res = hill_climb(u, 2, restarts=1, seed=0)
    assert res.evaluations >= 1 + 2 * 3


def test_uniform_patterns_are_uniform():
    rng = np.random.default_rng(0)
    pats = uniform_patterns(6, 2, 60_000, rng)
    counts = np.bincount([pattern_rank(p, 6) for p in pats], minlength=15)
    expected = 60_000 / 15
    assert ((counts - expected) ** 2 / expected).sum() < 36.1  # chi2 14 dof, p=0.001


def test_rejection_identity():
    s = sample_rejection(np.eye(6), 3, 200, mu=1.0, seed=0)
    assert np.all(s.patterns == [0, 1, 2])


def test_rejection_matches_exact(u9):
    w = exact_weights(u9, 3)
    mu = w.max()
    s = sample_rejection(u9, 3, 20_000, mu, seed=5)
    assert total_variation(_freqs(s), w / w.sum()) <= 0.05
    expected = mu * 84 / w.sum()
    assert s.stats["mean_proposals_per_sample"] == pytest.approx(expected, rel=0.05)
    assert s.stats["proposals_above_mu"] == 0


def test_rejection_truncates_above_mu(u9):
    w = exact_weights(u9, 3)
    mu = np.sort(w)[-3]  # two patterns sit above the envelope
    s = sample_rejection(u9, 3, 5000, mu, seed=6)
    ranks = set(s.ranks().tolist())
    assert not ranks & set(np.argsort(w)[-2:].tolist())


def test_rejection_bad_mu(u9):
    with pytest.raises(ValueError):
        sample_rejection(u9, 3, 1, 0.0, seed=0)


# --- sample files ------------------------------------------------------------

def test_sample_csv_round_trip(tmp_path, u9):
    s = sample_brute_force(u9, 3, 50, seed=1)
    path = tmp_path / "s.csv"
    write_sample_csv(path, s, extra={"command": "permsamp sample --seed 1"})
    first = path.read_text().splitlines()[0]
    assert first == f"# n=3 m=9 sampler=brute seed=1 fingerprint={u9.fingerprint} tau_burn=none tau_thin=none"
    back, meta = read_sample_csv(path)
    assert np.array_equal(back.patterns, s.patterns)
    assert back.sampler_id == "brute"
    assert meta["command"] == "permsamp sample --seed 1"


def test_sample_csv_with_inputs(tmp_path):
    s = SampleSet(2, 5, [[0, 3], [1, 2]], "mis_lossy", 3, "abc", config=ChainConfig(seed=3),
                  inputs=[[0, 2], [1, 2]], acceptance_rate=0.5)
    path = tmp_path / "l.csv"
    write_sample_csv(path, s)
    assert path.read_text().splitlines()[-1] == "1,2 | input=1,2"
    back, _ = read_sample_csv(path)
    assert np.array_equal(back.inputs, [[0, 2], [1, 2]])
    assert back.config == ChainConfig(seed=3)


def test_sample_set_validation():
    with pytest.raises(ValueError):
        SampleSet(2, 5, [[1, 1]], "mis", 0, "x")
    with pytest.raises(ValueError):
        SampleSet(2, 5, [[1, 5]], "mis", 0, "x")
    with pytest.raises(ValueError):
        SampleSet(2, 5, [[1, 2]], "nope", 0, "x")
    with pytest.raises(ValueError):
        SampleSet(2, 5, [[1, 2]], "mis", 0, "x", acceptance_rate=1.5)


def test_chain_config_validation():
    for bad in [dict(tau_burn=-1), dict(tau_thin=0), dict(chains=0)]:
        with pytest.raises(ValueError):
            ChainConfig(**bad)


def test_colex_ranks_huge_space():
    s = SampleSet(40, 200, [list(range(40)), list(range(160, 200))], "mis", 0, "x")
    ranks = s.ranks()
    assert ranks[0] == 0
    assert ranks[1] == comb(200, 40) - 1
