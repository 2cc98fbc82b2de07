"""Sample containers, chain/loss configuration and the sample CSV format."""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np

from ..permanent import binomial_table

SAMPLER_IDS = ("brute", "rejection", "mis", "distinguishable", "mis_lossy", "mis_scattershot")


@dataclass(frozen=True)
class ChainConfig:
    """Burn-in, thinning, seed and chain count for the MIS samplers."""

    tau_burn: int = 100
    tau_thin: int = 100
    seed: int = 0
    chains: int = 1

    def __post_init__(self):
        if self.tau_burn < 0:
            raise ValueError(f"tau_burn must be >= 0, got {self.tau_burn}")
        if self.tau_thin < 1:
            raise ValueError(f"tau_thin must be >= 1, got {self.tau_thin}")
        if self.chains < 1:
            raise ValueError(f"chains must be >= 1, got {self.chains}")


@dataclass(frozen=True)
class LossConfig:
    """``n_prepared`` photons of which ``k_detected`` survive input loss."""

    n_prepared: int
    k_detected: int

    def __post_init__(self):
        if not 1 <= self.k_detected <= self.n_prepared:
            raise ValueError(
                f"need 1 <= k_detected <= n_prepared, got k={self.k_detected}, n={self.n_prepared}"
            )


def split_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    """Independent child seeds: ``SeedSequence(seed).spawn(count)``."""
    return np.random.SeedSequence(int(seed)).spawn(count)


def colex_ranks(patterns: np.ndarray, m: int) -> np.ndarray:
    """Colexicographic rank of each row of a sorted pattern array."""
    patterns = np.asarray(patterns, dtype=np.int64)
    n = patterns.shape[1]
    if comb(m, n) >= 2**63:
        return np.array([sum(comb(int(c), i + 1) for i, c in enumerate(row)) for row in patterns],
                        dtype=object)
    table = binomial_table(m, n)
    ranks = np.zeros(len(patterns), dtype=np.int64)
    for i in range(n):
        ranks += table[patterns[:, i], i + 1]
    return ranks


@dataclass
class SampleSet:
    """An ordered collection of collision-free output patterns plus provenance.

    ``patterns`` is an integer array of shape ``(count, n)`` with each row
    strictly increasing. ``inputs`` holds the input columns used for each
    pattern by the lossy and scattershot samplers. ``stats`` carries
    sampler bookkeeping such as permanent-evaluation counts.
    """

    n: int
    m: int
    patterns: np.ndarray
    sampler_id: str
    seed: int
    matrix_fingerprint: str
    config: ChainConfig | None = None
    acceptance_rate: float | None = None
    inputs: np.ndarray | None = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sampler_id not in SAMPLER_IDS:
            raise ValueError(f"unknown sampler id {self.sampler_id!r}")
        p = np.asarray(self.patterns, dtype=np.int64).reshape(-1, self.n)
        if p.size:
            if p.min() < 0 or p.max() >= self.m:
                raise ValueError(f"pattern modes must lie in [0, {self.m})")
            if self.n > 1 and np.any(np.diff(p, axis=1) <= 0):
                raise ValueError("every pattern must be strictly increasing (collision-free)")
        self.patterns = p
        if self.inputs is not None:
            self.inputs = np.asarray(self.inputs, dtype=np.int64).reshape(len(p), -1)
        if self.acceptance_rate is not None and not 0.0 <= self.acceptance_rate <= 1.0:
            raise ValueError(f"acceptance_rate must lie in [0, 1], got {self.acceptance_rate}")

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        for row in self.patterns:
            yield tuple(int(x) for x in row)

    def ranks(self) -> np.ndarray:
        return colex_ranks(self.patterns, self.m)

    def frequencies(self) -> np.ndarray:
        """Empirical probability of every pattern, indexed by colex rank."""
        total = comb(self.m, self.n)
        counts = np.bincount(self.ranks().astype(np.int64), minlength=total)
        return counts / max(len(self), 1)


# ---------------------------------------------------------------------------
# CSV format


def _fmt(x) -> str:
    if x is None:
        return "none"
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def write_sample_csv(path, sample: SampleSet, extra: dict | None = None) -> None:
    """Write a sample file.

    The first line is
    ``# n=<n> m=<m> sampler=<id> seed=<s> fingerprint=<hex> tau_burn=<b> tau_thin=<t>``;
    further ``#`` lines hold ``key: value`` metadata. Each data line is the
    comma-separated sorted modes, followed by ``| input=<cols>`` when the
    sample records per-pattern inputs.
    """
    cfg = sample.config
    head = (
        f"# n={sample.n} m={sample.m} sampler={sample.sampler_id} seed={sample.seed} "
        f"fingerprint={sample.matrix_fingerprint} "
        f"tau_burn={_fmt(cfg.tau_burn if cfg else None)} tau_thin={_fmt(cfg.tau_thin if cfg else None)}"
    )
    lines = [head]
    meta = {}
    if cfg is not None:
        meta["chains"] = cfg.chains
    if sample.acceptance_rate is not None:
        meta["acceptance_rate"] = sample.acceptance_rate
    meta.update({k: v for k, v in sorted(sample.stats.items()) if np.isscalar(v)})
    if extra:
        meta.update(extra)
    lines += [f"# {k}: {_fmt(v)}" for k, v in meta.items()]
    if sample.inputs is not None:
        body = [
            ",".join(map(str, row)) + " | input=" + ",".join(map(str, inp))
            for row, inp in zip(sample.patterns.tolist(), sample.inputs.tolist())
        ]
    else:
        body = [",".join(map(str, row)) for row in sample.patterns.tolist()]
    Path(path).write_text("\n".join(lines + body) + "\n")


def _parse_value(v: str):
    if v == "none":
        return None
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def read_sample_csv(path) -> tuple[SampleSet, dict]:
    """Read a sample file; returns the sample and the extra metadata lines."""
    header: dict = {}
    meta: dict = {}
    patterns, inputs = [], []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if not header and "=" in body and ": " not in body:
                header = dict(tok.split("=", 1) for tok in shlex.split(body))
            elif ": " in body:
                k, v = body.split(": ", 1)
                meta[k] = _parse_value(v)
            continue
        modes, _, inp = line.partition("|")
        patterns.append([int(x) for x in modes.split(",")])
        if inp:
            inputs.append([int(x) for x in inp.strip().removeprefix("input=").split(",")])
    if not header:
        raise ValueError(f"{path}: missing '# n=... m=...' header line")
    n, m = int(header["n"]), int(header["m"])
    tb, tt = _parse_value(header.get("tau_burn", "none")), _parse_value(header.get("tau_thin", "none"))
    config = None
    if tb is not None and tt is not None:
        config = ChainConfig(int(tb), int(tt), int(header["seed"]), int(meta.get("chains", 1)))
    sample = SampleSet(
        n=n,
        m=m,
        patterns=np.asarray(patterns, dtype=np.int64).reshape(-1, n),
        sampler_id=header["sampler"],
        seed=int(header["seed"]),
        matrix_fingerprint=header["fingerprint"],
        config=config,
        acceptance_rate=meta.pop("acceptance_rate", None),
        inputs=np.asarray(inputs, dtype=np.int64) if inputs else None,
    )
    return sample, meta
