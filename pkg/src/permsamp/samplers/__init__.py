"""Classical samplers over the collision-free boson-sampling distribution."""

from ._base import (
    SAMPLER_IDS,
    ChainConfig,
    LossConfig,
    SampleSet,
    colex_ranks,
    read_sample_csv,
    split_seeds,
    write_sample_csv,
)
from .distinguishable import cfs_fraction_distinguishable, sample_distinguishable
from .exact import MAX_PATTERNS, exact_distribution, exact_weights, sample_brute_force, unrank_many
from .mis import (
    acceptance_probability,
    mis_step,
    sample_mis,
    sample_mis_lossy,
    sample_mis_scattershot,
)
from .rejection import HillClimbResult, estimate_mu, hill_climb, sample_rejection, uniform_patterns
from .weights import bs_weight, dist_weight, lossy_weight, pattern_weights

__all__ = [
    "SAMPLER_IDS",
    "ChainConfig",
    "LossConfig",
    "SampleSet",
    "colex_ranks",
    "read_sample_csv",
    "split_seeds",
    "write_sample_csv",
    "cfs_fraction_distinguishable",
    "sample_distinguishable",
    "MAX_PATTERNS",
    "exact_distribution",
    "exact_weights",
    "sample_brute_force",
    "unrank_many",
    "acceptance_probability",
    "mis_step",
    "sample_mis",
    "sample_mis_lossy",
    "sample_mis_scattershot",
    "HillClimbResult",
    "estimate_mu",
    "hill_climb",
    "sample_rejection",
    "uniform_patterns",
    "bs_weight",
    "dist_weight",
    "lossy_weight",
    "pattern_weights",
]
