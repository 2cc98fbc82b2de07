"""Runtime models for classical and photonic boson sampling.

Classical: ``c_t(n) = a(n) * tau * n * 2**n`` seconds per sample, where
``a`` is the time of one complex plus one real permanent per ``n 2^n``
unit and ``tau`` the MIS thinning interval.

Quantum: ``q_t(n) = 1 / (R * P_CFS * eta**n)`` with overall transmission
``eta = eta_f * eta_0**d`` and depth ``d`` growing with the circuit.

The quantum advantage ``QA = max(0, log10(c_t / q_t))`` is in orders of
magnitude. ``QS1`` asks for ``QA > 10``; ``QS2`` for a quantum sample in
under a week while the classical one takes over a century.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from math import comb, e, log10
from typing import Callable, Union

import numpy as np

from .verify import p_cfs

WEEK = 604800.0
CENTURY = 100 * 365.25 * 86400.0

# laptop reference constants per permanent, s / (n 2^n)
REFERENCE_C_COMPLEX = 5.180e-10
REFERENCE_C_REAL = 2.106e-10

Number = Union[float, Callable[[int], float]]


def supercomputer_a(n: int) -> float:
    """``a(n) = 3n x 1e-15`` s, giving ``c_t = 3e-13 n^2 2^n`` at ``tau = 100``."""
    return 3e-15 * n


def laptop_a(n: int) -> float:
    """Reference laptop-class constants, one complex plus one real permanent."""
    return REFERENCE_C_COMPLEX + REFERENCE_C_REAL


def _at(x: Number, n: int) -> float:
    return float(x(n)) if callable(x) else float(x)


@dataclass(frozen=True)
class RuntimeParams:
    """Experimental and classical model constants.

    ``a`` and ``R`` may be numbers or functions of ``n``. ``depth_law`` is
    ``"linear_4n"`` (``d = 4n``) or ``"quadratic_m"`` (``d = m``);
    ``mode_law`` is ``"m=4n"`` or ``"m=n^2"``. ``pcfs`` selects the exact
    Haar-average collision-free probability (``"exact"``) or the ``1/e``
    approximation (``"e"``, only meaningful for ``m = n^2``).
    """

    a: Number = supercomputer_a
    R: Number = 1e6
    eta_f: float = 1.0
    eta_0: float = 1.0
    depth_law: str = "linear_4n"
    mode_law: str = "m=4n"
    tau: int = 100
    pcfs: str = "exact"
    name: str = "custom"

    def __post_init__(self):
        if not 0 < self.eta_f <= 1 or not 0 < self.eta_0 <= 1:
            raise ValueError("eta_f and eta_0 must be in (0, 1]")
        if self.depth_law not in ("linear_4n", "quadratic_m"):
            raise ValueError(f"unknown depth_law {self.depth_law!r}")
        if self.mode_law not in ("m=4n", "m=n^2"):
            raise ValueError(f"unknown mode_law {self.mode_law!r}")
        if self.pcfs not in ("exact", "e"):
            raise ValueError(f"pcfs must be 'exact' or 'e', got {self.pcfs!r}")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        for label, value in (("a", self.a), ("R", self.R)):
            if not callable(value) and not value > 0:
                raise ValueError(f"{label} must be positive")

    def modes(self, n: int) -> int:
        return 4 * n if self.mode_law == "m=4n" else n * n

    def depth(self, n: int) -> int:
        return 4 * n if self.depth_law == "linear_4n" else self.modes(n)

    def eta(self, n: int) -> float:
        return self.eta_f * self.eta_0 ** self.depth(n)

    def collision_free(self, n: int, m: int | None = None) -> float:
        m = self.modes(n) if m is None else m
        if self.pcfs == "e":
            return 1.0 / e
        return p_cfs(n, m)

    def describe(self) -> dict:
        def show(x):
            return getattr(x, "__name__", x) if callable(x) else x

        return {
            "name": self.name, "a": show(self.a), "R": show(self.R), "eta_f": self.eta_f,
            "eta_0": self.eta_0, "depth_law": self.depth_law, "mode_law": self.mode_law,
            "tau": self.tau, "pcfs": self.pcfs,
        }


def _rate_76mhz(n: int) -> float:
    return 76e6 / n


_rate_76mhz.__name__ = "76MHz/n"

# near-future source/interferometer figures for a quantum-dot demultiplexed source
NEARTERM_ETA_F = 0.74 * 0.845 * 0.95
NEARTERM_ETA_0 = 0.99 ** (1 / 9)

PRESETS = {
    "nearterm_linear": RuntimeParams(a=supercomputer_a, R=_rate_76mhz, eta_f=NEARTERM_ETA_F,
                                 eta_0=NEARTERM_ETA_0, depth_law="linear_4n", mode_law="m=4n",
                                 name="nearterm_linear"),
    "nearterm_quadratic": RuntimeParams(a=supercomputer_a, R=_rate_76mhz, eta_f=NEARTERM_ETA_F,
                                    eta_0=NEARTERM_ETA_0, depth_law="quadratic_m", mode_law="m=n^2",
                                    name="nearterm_quadratic"),
    "ghz_quadratic": RuntimeParams(a=supercomputer_a, R=1e10, depth_law="quadratic_m",
                                   mode_law="m=n^2", name="ghz_quadratic"),
    "mhz_linear": RuntimeParams(a=supercomputer_a, R=_rate_76mhz, depth_law="linear_4n",
                                mode_law="m=4n", name="mhz_linear"),
}


def classical_time(n: int, a: Number, tau: int = 100) -> float:
    """``c_t = a(n) * tau * n * 2**n`` seconds."""
    return _at(a, n) * tau * n * 2.0**n


def quantum_time(n: int, params: RuntimeParams, eta: float | None = None) -> float:
    """``q_t = 1 / (R * P_CFS * eta**n)`` seconds; ``eta`` overrides the depth model."""
    eta = params.eta(n) if eta is None else eta
    if not 0 < eta <= 1:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    return 1.0 / (_at(params.R, n) * params.collision_free(n) * eta**n)


@dataclass(frozen=True)
class SupremacyVerdict:
    qa: float
    qs1: bool
    qs2: bool
    classical_seconds: float = float("nan")
    quantum_seconds: float = float("nan")
    k: int | None = None


def verdict(c_t: float, q_t: float, k: int | None = None) -> SupremacyVerdict:
    qa = max(0.0, log10(c_t / q_t)) if c_t > 0 else 0.0
    return SupremacyVerdict(qa, qa > 10, bool(q_t < WEEK and c_t > CENTURY), c_t, q_t, k)


def quantum_advantage(n: int, params: RuntimeParams, a: Number | None = None,
                      eta: float | None = None) -> SupremacyVerdict:
    """QA, QS1 and QS2 at ``n`` photons; ``a`` overrides ``params.a``."""
    a = params.a if a is None else a
    return verdict(classical_time(n, a, params.tau), quantum_time(n, params, eta))


def lossy_quantum_time(n: int, k: int, params: RuntimeParams, eta: float | None = None) -> float:
    """Seconds per event with exactly ``k`` of ``n`` photons surviving.

    Binomial survival: ``R * C(n, k) eta^k (1 - eta)^(n - k) * P_CFS(k, m(n))``.
    """
    eta = params.eta(n) if eta is None else eta
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    m = params.modes(n)
    survive = comb(n, k) * eta**k * (1.0 - eta) ** (n - k)
    if survive <= 0:
        return float("inf")
    return 1.0 / (_at(params.R, n) * survive * params.collision_free(k, m))


def lossy_advantage(n: int, params: RuntimeParams, max_lost: int, eta: float | None = None
                    ) -> SupremacyVerdict:
    """Best verdict over ``k = n - max_lost .. n`` detected photons.

    ``k`` maximises ``log10(c_t(k) / q_t(k))`` before clamping; ties go to
    the larger ``k``. Classical time uses ``k``-photon permanents.
    """
    if max_lost < 0:
        raise ValueError("max_lost must be non-negative")
    best, best_k = -np.inf, n
    for k in range(n, max(1, n - max_lost) - 1, -1):
        c = classical_time(k, params.a, params.tau)
        q = lossy_quantum_time(n, k, params, eta)
        score = log10(c / q) if np.isfinite(q) else -np.inf
        if score > best:
            best, best_k = score, k
    c = classical_time(best_k, params.a, params.tau)
    q = lossy_quantum_time(n, best_k, params, eta)
    return verdict(c, q, best_k)


# ---------------------------------------------------------------------------
# maps


@dataclass
class AdvantageMap:
    n: np.ndarray
    eta: np.ndarray
    qa: np.ndarray
    qs1: np.ndarray
    qs2: np.ndarray
    k_opt: np.ndarray
    params: RuntimeParams
    max_lost: int = 0
    meta: dict = field(default_factory=dict)

    def threshold(self, flag: str = "both") -> tuple[float, int] | None:
        """Smallest ``eta`` and smallest ``n`` of any cell meeting the criteria."""
        mask = {"qs1": self.qs1, "qs2": self.qs2, "both": self.qs1 & self.qs2}[flag]
        if not mask.any():
            return None
        _, etas = np.meshgrid(self.n, self.eta, indexing="ij")
        ns, _ = np.meshgrid(self.n, self.eta, indexing="ij")
        return float(etas[mask].min()), int(ns[mask].min())


def advantage_map(n_range, eta_range, params: RuntimeParams, max_lost: int = 0) -> AdvantageMap:
    """QA over a grid of photon numbers and overall transmissions ``eta``.

    ``eta`` here replaces the depth model. With ``max_lost > 0`` each cell
    takes the best ``k`` from :func:`lossy_advantage`.
    """
    ns = np.asarray(list(n_range), dtype=int)
    etas = np.asarray(list(eta_range), dtype=float)
    shape = (len(ns), len(etas))
    qa = np.zeros(shape)
    qs1 = np.zeros(shape, dtype=bool)
    qs2 = np.zeros(shape, dtype=bool)
    k_opt = np.zeros(shape, dtype=int)
    for i, n in enumerate(ns):
        for j, eta in enumerate(etas):
            if max_lost:
                v = lossy_advantage(int(n), params, max_lost, eta)
            else:
                v = quantum_advantage(int(n), params, eta=eta)
                v = replace(v, k=int(n))
            qa[i, j], qs1[i, j], qs2[i, j], k_opt[i, j] = v.qa, v.qs1, v.qs2, v.k
    return AdvantageMap(ns, etas, qa, qs1, qs2, k_opt, params, max_lost)


def write_advantage_csv(path, amap: AdvantageMap, meta: dict | None = None) -> None:
    """CSV ``n,eta,qa,qs1,qs2,k_opt`` plus a ``.json`` sidecar with the parameters."""
    with open(path, "w") as fh:
        fh.write("n,eta,qa,qs1,qs2,k_opt\n")
        for i, n in enumerate(amap.n):
            for j, eta in enumerate(amap.eta):
                fh.write(f"{n},{eta:.12g},{amap.qa[i, j]:.12g},{int(amap.qs1[i, j])},"
                         f"{int(amap.qs2[i, j])},{amap.k_opt[i, j]}\n")
    sidecar = {"params": amap.params.describe(), "max_lost": amap.max_lost,
               "week_seconds": WEEK, "century_seconds": CENTURY}
    both = amap.threshold("both")
    sidecar["threshold_both"] = None if both is None else {"eta_min": both[0], "n_min": both[1]}
    sidecar.update(meta or {})
    with open(f"{path}.json", "w") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# calibration


@dataclass(frozen=True)
class PermFit:
    kind: str
    c: float
    r_squared: float
    n_fitted: tuple


def fit_perm_constant(rows, fraction: float = 0.5) -> dict[str, PermFit]:
    """Least-squares ``t = c n 2^n`` per kind on the largest-``n`` part of a bench table.

    ``rows`` are :class:`permsamp.permanent.BenchRow` items (or tuples
    ``(n, mean_seconds, ..., kind)``). ``fraction`` of the distinct ``n``
    values, rounded up, are kept from the top; small sizes carry fixed
    overheads that the model omits. ``r_squared`` is computed on the
    fitted points.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    by_kind: dict[str, list[tuple[int, float]]] = {}
    for row in rows:
        n, t, kind = (row.n, row.mean_seconds, row.kind) if hasattr(row, "kind") else (row[0], row[1], row[-1])
        by_kind.setdefault(kind, []).append((int(n), float(t)))
    fits = {}
    for kind, pts in by_kind.items():
        pts.sort()
        keep = pts[len(pts) - int(np.ceil(len(pts) * fraction)):]
        if len(keep) < 2:
            raise ValueError(f"need at least two points to fit kind {kind!r}")
        n = np.array([p[0] for p in keep], dtype=float)
        t = np.array([p[1] for p in keep])
        x = n * 2.0**n
        c = float(x @ t / (x @ x))
        resid = t - c * x
        ss_tot = float(((t - t.mean()) ** 2).sum())
        r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
        fits[kind] = PermFit(kind, c, r2, tuple(int(v) for v in n))
    return fits
