"""Command-line front end: ``permsamp <subcommand> ...``.

Exit status is 0 on success, 2 on a usage error and 1 when the command
itself fails. All randomness derives from the single ``--seed`` flag.
Every file written carries the tool version, the command line, the seed
and the fingerprints of its inputs.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .advantage import (
    REFERENCE_C_COMPLEX,
    REFERENCE_C_REAL,
    PRESETS,
    RuntimeParams,
    advantage_map,
    fit_perm_constant,
    laptop_a,
    lossy_advantage,
    quantum_advantage,
    supercomputer_a,
    write_advantage_csv,
)
from .linalg import haar_unitary, read_unitary, write_unitary
from .permanent import bench_permanent, configure_threads, read_bench_csv, write_bench_csv
from .samplers import (
    ChainConfig,
    LossConfig,
    MAX_PATTERNS,
    hill_climb,
    read_sample_csv,
    sample_brute_force,
    sample_distinguishable,
    sample_mis,
    sample_mis_lossy,
    sample_mis_scattershot,
    sample_rejection,
    write_sample_csv,
)
from .verify import (
    autocorrelation,
    ks_bootstrap,
    likelihood_ratio_curve,
    log_weight_series,
    write_lrt_csv,
    write_report,
)


class UsageError(Exception):
    """Flag combination that parses but makes no sense; exits with status 2."""


def _round(x):
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.12g}")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


def _emit(obj) -> None:
    print(json.dumps(_round(obj), sort_keys=True))


class _Ctx:
    def __init__(self, argv):
        self.command = "permsamp " + shlex.join(argv)

    def provenance(self, seed=None, **fingerprints) -> dict:
        out = {"tool": f"permsamp {__version__}", "command": self.command}
        if seed is not None:
            out["seed"] = seed
        out.update({k: v for k, v in fingerprints.items() if v is not None})
        return out


# ---------------------------------------------------------------------------
# subcommands


def _cmd_haar(args, ctx):
    u = haar_unitary(args.modes, args.seed)
    write_unitary(args.out, u, args.seed, meta=ctx.provenance(args.seed))
    _emit({"m": u.m, "fingerprint": u.fingerprint, "out": str(args.out)})


def _load_unitary(args):
    if args.unitary is None:
        u = haar_unitary(args.modes, args.seed)
        return u, None
    u, _ = read_unitary(args.unitary)
    if args.modes is not None and args.modes != u.m:
        raise UsageError(f"--modes {args.modes} does not match the {u.m}-mode unitary in {args.unitary}")
    return u, str(args.unitary)


def _chain(args) -> ChainConfig:
    return ChainConfig(args.burn, args.thin, args.seed, args.chains)


def _write_sample(args, ctx, sample, u, source, extra=None):
    meta = ctx.provenance(args.seed, unitary=source or f"haar(m={u.m}, seed={args.seed})")
    meta.update(extra or {})
    write_sample_csv(args.out, sample, extra=meta)
    summary = {"count": len(sample), "sampler": sample.sampler_id, "fingerprint": u.fingerprint,
               "acceptance_rate": sample.acceptance_rate, "out": str(args.out)}
    summary.update({k: v for k, v in sample.stats.items() if np.isscalar(v)})
    _emit(summary)


def _cmd_sample(args, ctx):
    u, source = _load_unitary(args)
    extra = {}
    if args.method == "brute":
        s = sample_brute_force(u, args.photons, args.count, args.seed, args.max_patterns)
    elif args.method == "rejection":
        if args.mu is None:
            hc = hill_climb(u, args.photons, args.restarts, args.seed)
            mu = hc.mu
            extra = {"mu_source": "hill_climb", "restarts": hc.restarts}
        else:
            mu = args.mu
            extra = {"mu_source": "flag"}
        s = sample_rejection(u, args.photons, args.count, mu, args.seed)
    elif args.method == "mis":
        s = sample_mis(u, args.photons, args.count, _chain(args))
    else:
        s = sample_distinguishable(u, args.photons, args.count, args.seed)
    _write_sample(args, ctx, s, u, source, extra)


def _cmd_sample_lossy(args, ctx):
    u, source = _load_unitary(args)
    loss = LossConfig(args.photons, args.detected)
    s = sample_mis_lossy(u, loss, args.count, _chain(args))
    _write_sample(args, ctx, s, u, source, {"n_prepared": args.photons, "k_detected": args.detected})


def _cmd_sample_scattershot(args, ctx):
    u, source = _load_unitary(args)
    s = sample_mis_scattershot(u, args.photons, args.count, _chain(args))
    _write_sample(args, ctx, s, u, source)


def _read_checked(path, u):
    sample, meta = read_sample_csv(path)
    if sample.m != u.m:
        raise UsageError(f"{path} has m={sample.m} but the unitary has m={u.m}")
    if sample.matrix_fingerprint not in (u.fingerprint, "none"):
        print(f"warning: {path} was drawn from unitary {sample.matrix_fingerprint}, "
              f"scoring against {u.fingerprint}", file=sys.stderr)
    return sample, meta


def _cmd_verify_ks(args, ctx):
    u, _ = read_unitary(args.unitary)
    a, _ = _read_checked(args.sample, u)
    b, _ = _read_checked(args.against, u)
    res = ks_bootstrap(log_weight_series(u, a), log_weight_series(u, b), args.reps, args.seed)
    inputs = {"sample": str(args.sample), "against": str(args.against), "unitary": u.fingerprint,
              "samplers": [a.sampler_id, b.sampler_id], "sizes": [len(a), len(b)]}
    extra = ctx.provenance()
    if args.out:
        write_report(args.out, "ks", inputs, args.seed, res.statistic, res.p_value, reps=res.bootstrap_reps,
                     extra=extra)
    _emit({"statistic": res.statistic, "p_value": res.p_value, "reps": res.bootstrap_reps})


def _cmd_verify_lrt(args, ctx):
    u, _ = read_unitary(args.unitary)
    s, meta = _read_checked(args.sample, u)
    loss = None
    if args.prepared is not None:
        loss = LossConfig(args.prepared, s.n)
    elif s.sampler_id == "mis_lossy" and "n_prepared" in meta:
        loss = LossConfig(int(meta["n_prepared"]), s.n)
    if s.sampler_id == "mis_scattershot":
        raise UsageError("the likelihood-ratio test needs a fixed input; scattershot samples are not supported")
    if loss is not None:
        s.inputs = None
    curve = likelihood_ratio_curve(u, s, normalization=args.normalization, z_draws=args.z_draws,
                                   seed=args.seed, loss=loss)
    comments = ctx.provenance(args.seed, unitary=u.fingerprint, sample=str(args.sample))
    comments["normalization"] = args.normalization
    comments["clamped_events"] = curve.clamped
    write_lrt_csv(args.out, curve, comments)
    if args.report:
        inputs = {"sample": str(args.sample), "unitary": u.fingerprint, "normalization": args.normalization,
                  "z_draws": args.z_draws}
        write_report(args.report, "lrt", inputs, args.seed, p_ind_curve=curve.p_ind,
                     extra={**ctx.provenance(), "clamped_events": curve.clamped})
    _emit({"events": int(curve.events[-1]), "p_ind_final": float(curve.p_ind[-1]),
           "clamped_events": curve.clamped, "out": str(args.out)})


def _cmd_verify_autocorr(args, ctx):
    u, _ = read_unitary(args.unitary)
    s, _ = _read_checked(args.sample, u)
    ac = autocorrelation(log_weight_series(u, s), args.max_lag)
    result = {"max_lag": args.max_lag, "band": ac.band, "fraction_inside": ac.fraction_inside,
              "lags_outside": [int(x) for x in ac.lags[~ac.inside]]}
    if args.out:
        inputs = {"sample": str(args.sample), "unitary": u.fingerprint, "max_lag": args.max_lag}
        write_report(args.out, "autocorr", inputs, None, statistic=float(np.max(np.abs(ac.acf))),
                     extra={**ctx.provenance(), "band": ac.band, "fraction_inside": ac.fraction_inside,
                            "acf": [float(f"{v:.12g}") for v in ac.acf]})
    _emit(result)


def _cmd_bench(args, ctx):
    configure_threads()
    rows = []
    for kind in args.kind:
        rows += bench_permanent(args.n_min, args.n_max, args.repeats, kind, args.seed)
    write_bench_csv(args.out, rows, ctx.provenance(args.seed))
    _emit({"rows": len(rows), "out": str(args.out)})


def _cmd_fit(args, ctx):
    rows = read_bench_csv(args.bench)
    if args.n_min is not None:
        rows = [r for r in rows if r.n >= args.n_min]
    fits = fit_perm_constant(rows, args.fraction)
    out = {kind: {"c": f.c, "r_squared": f.r_squared, "n_fitted": list(f.n_fitted)} for kind, f in fits.items()}
    out["reference_c"] = {"complex": REFERENCE_C_COMPLEX, "real": REFERENCE_C_REAL}
    if args.out:
        Path(args.out).write_text(json.dumps(_round({**out, **ctx.provenance()}), indent=2, sort_keys=True) + "\n")
    _emit(out)


def _params(args) -> RuntimeParams:
    base = PRESETS[args.preset] if args.preset else RuntimeParams()
    changes = {}
    if args.a is not None:
        changes["a"] = {"supercomputer": supercomputer_a, "laptop": laptop_a}.get(args.a) or float(args.a)
    if args.rate is not None:
        changes["R"] = PRESETS["mhz_linear"].R if args.rate == "76mhz/n" else float(args.rate)
    for flag, key in (("eta_f", "eta_f"), ("eta_0", "eta_0"), ("depth_law", "depth_law"),
                      ("mode_law", "mode_law"), ("tau", "tau"), ("pcfs", "pcfs")):
        value = getattr(args, flag)
        if value is not None:
            changes[key] = value
    if not changes:
        return base
    return replace(base, name=f"{base.name}+overrides", **changes)


def _cmd_advantage_point(args, ctx):
    p = _params(args)
    if args.max_lost:
        v = lossy_advantage(args.photons, p, args.max_lost, args.eta)
    else:
        v = quantum_advantage(args.photons, p, eta=args.eta)
    eta = p.eta(args.photons) if args.eta is None else args.eta
    _emit({"n": args.photons, "m": p.modes(args.photons), "eta": eta, "classical_seconds": v.classical_seconds,
           "quantum_seconds": v.quantum_seconds, "q_over_c": v.quantum_seconds / v.classical_seconds,
           "qa": v.qa, "qs1": v.qs1, "qs2": v.qs2, "k": v.k, "params": p.describe()})


def _cmd_advantage_map(args, ctx):
    p = _params(args)
    ns = range(args.n_min, args.n_max + 1, args.n_step)
    count = int(round((args.eta_max - args.eta_min) / args.eta_step)) + 1
    etas = np.round(args.eta_min + args.eta_step * np.arange(count), 12)
    if etas.min() <= 0 or etas.max() > 1:
        raise UsageError("eta grid must lie in (0, 1]")
    amap = advantage_map(ns, etas, p, args.max_lost)
    write_advantage_csv(args.out, amap, {"provenance": ctx.provenance()})
    both = amap.threshold("both")
    _emit({"cells": int(amap.qa.size), "out": str(args.out),
           "threshold_both": None if both is None else {"eta_min": both[0], "n_min": both[1]}})


# ---------------------------------------------------------------------------
# parser


class _Formatter(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    pass


def _add_unitary(p, required=False):
    p.add_argument("--unitary", type=Path, required=required,
                   help="unitary JSON file (from `permsamp haar`)"
                   + ("" if required else "; omitted: a Haar unitary drawn from --seed"))


def _add_chain(p):
    p.add_argument("--burn", type=int, default=100, help="burn-in transitions tau_burn")
    p.add_argument("--thin", type=int, default=100, help="thinning interval tau_thin")
    p.add_argument("--chains", type=int, default=1, help="independent chains, interleaved round-robin")


def _add_params(p):
    p.add_argument("--preset", choices=sorted(PRESETS), default=None,
                   help="named parameter family; other flags override it")
    p.add_argument("--a", default=None,
                   help="permanent time constant: 'supercomputer' (3n e-15 s), 'laptop' or seconds")
    p.add_argument("--rate", default=None, help="n-photon rate R in Hz, or '76mhz/n'")
    p.add_argument("--eta-f", type=float, default=None, help="fixed transmission eta_f")
    p.add_argument("--eta-0", type=float, default=None, help="transmission per depth unit eta_0")
    p.add_argument("--depth-law", choices=["linear_4n", "quadratic_m"], default=None,
                   help="interferometer depth d: 4n or m")
    p.add_argument("--mode-law", choices=["m=4n", "m=n^2"], default=None, help="modes as a function of n")
    p.add_argument("--tau", type=int, default=None, help="permanents per classical sample (model default 100)")
    p.add_argument("--pcfs", choices=["exact", "e"], default=None,
                   help="collision-free probability: exact Haar average or the 1/e approximation")
    p.add_argument("--max-lost", type=int, default=0, help="allow up to L lost photons, optimising k")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permsamp", formatter_class=_Formatter,
                                     description="Classical boson sampling, verification and runtime models.")
    parser.add_argument("--version", action="version", version=f"permsamp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("haar", help="draw and store a Haar-random unitary", formatter_class=_Formatter)
    p.add_argument("--modes", "-m", type=int, required=True, help="number of modes m")
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    p.add_argument("--out", type=Path, required=True, help="unitary JSON output")
    p.set_defaults(func=_cmd_haar)

    p = sub.add_parser("sample", help="draw collision-free output patterns", formatter_class=_Formatter)
    p.add_argument("--method", choices=["brute", "rejection", "mis", "distinguishable"], default="mis",
                   help="sampler")
    p.add_argument("--photons", "-n", type=int, required=True, help="photons n")
    p.add_argument("--modes", "-m", type=int, default=None, help="modes m (checked against --unitary)")
    p.add_argument("--count", type=int, required=True, help="patterns to emit")
    _add_chain(p)
    p.add_argument("--mu", type=float, default=None, help="rejection envelope; default: hill-climb estimate")
    p.add_argument("--restarts", type=int, default=None, help="hill-climb restarts; None means 4m")
    p.add_argument("--max-patterns", type=int, default=MAX_PATTERNS, help="brute-force enumeration guard")
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    _add_unitary(p)
    p.add_argument("--out", type=Path, required=True, help="sample CSV output")
    p.set_defaults(func=_cmd_sample)

    for name, func, lossy in (("sample-lossy", _cmd_sample_lossy, True),
                              ("sample-scattershot", _cmd_sample_scattershot, False)):
        p = sub.add_parser(name, formatter_class=_Formatter,
                           help="MIS with input loss" if lossy else "MIS with random input modes")
        p.add_argument("--photons", "-n", type=int, required=True,
                       help="prepared photons n" if lossy else "photons n")
        if lossy:
            p.add_argument("--detected", "-k", type=int, required=True, help="detected photons k")
        p.add_argument("--modes", "-m", type=int, default=None, help="modes m (checked against --unitary)")
        p.add_argument("--count", type=int, required=True, help="patterns to emit")
        _add_chain(p)
        p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
        _add_unitary(p)
        p.add_argument("--out", type=Path, required=True, help="sample CSV output")
        p.set_defaults(func=func)

    pv = sub.add_parser("verify", help="statistical tests on sample files", formatter_class=_Formatter)
    vsub = pv.add_subparsers(dest="test", required=True, metavar="TEST")
    p = vsub.add_parser("ks", help="bootstrap two-sample KS on -ln|Per|^2", formatter_class=_Formatter)
    p.add_argument("--sample", type=Path, required=True, help="sample CSV")
    p.add_argument("--against", type=Path, required=True, help="second sample CSV")
    _add_unitary(p, required=True)
    p.add_argument("--reps", type=int, default=1000, help="bootstrap resamples")
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    p.add_argument("--out", type=Path, default=None, help="JSON report")
    p.set_defaults(func=_cmd_verify_ks)

    p = vsub.add_parser("lrt", help="likelihood-ratio test vs distinguishable particles",
                        formatter_class=_Formatter)
    p.add_argument("--sample", type=Path, required=True, help="sample CSV")
    _add_unitary(p, required=True)
    p.add_argument("--normalization", choices=["haar", "exact"], default="haar",
                   help="haar: Haar-average Z_Q and sampled Z_R; exact: enumerate both (small m only)")
    p.add_argument("--z-draws", type=int, default=10**6, help="distinguishable draws for the R normalisation")
    p.add_argument("--prepared", type=int, default=None, help="prepared photons n for lossy samples")
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    p.add_argument("--out", type=Path, required=True, help="CSV events,p_ind")
    p.add_argument("--report", type=Path, default=None, help="also write a JSON report")
    p.set_defaults(func=_cmd_verify_lrt)

    p = vsub.add_parser("autocorr", help="autocorrelation of -ln|Per|^2", formatter_class=_Formatter)
    p.add_argument("--sample", type=Path, required=True, help="sample CSV")
    _add_unitary(p, required=True)
    p.add_argument("--max-lag", type=int, default=100, help="largest lag")
    p.add_argument("--out", type=Path, default=None, help="JSON report")
    p.set_defaults(func=_cmd_verify_autocorr)

    pb = sub.add_parser("bench", help="timing benchmarks", formatter_class=_Formatter)
    bsub = pb.add_subparsers(dest="target", required=True, metavar="TARGET")
    p = bsub.add_parser("permanent", help="time Ryser permanents (threads: PERMSAMP_THREADS)",
                        formatter_class=_Formatter)
    p.add_argument("--n-min", type=int, default=10, help="smallest n")
    p.add_argument("--n-max", type=int, default=25, help="largest n")
    p.add_argument("--repeats", type=int, default=5, help="fresh matrices per n")
    p.add_argument("--kind", choices=["complex", "real"], nargs="+", default=["complex", "real"],
                   help="permanent kinds to time")
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    p.add_argument("--out", type=Path, required=True, help="bench CSV output")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("fit", help="fit t = c n 2^n to a benchmark CSV", formatter_class=_Formatter)
    p.add_argument("--bench", type=Path, required=True, help="bench CSV")
    p.add_argument("--fraction", type=float, default=0.5, help="largest-n fraction of sizes used in the fit")
    p.add_argument("--n-min", type=int, default=None, help="drop rows below this n first")
    p.add_argument("--out", type=Path, default=None, help="JSON output")
    p.set_defaults(func=_cmd_fit)

    pa = sub.add_parser("advantage", help="quantum advantage model", formatter_class=_Formatter)
    asub = pa.add_subparsers(dest="mode", required=True, metavar="MODE")
    p = asub.add_parser("point", help="runtimes and verdict at one n", formatter_class=_Formatter)
    p.add_argument("--photons", "-n", type=int, required=True, help="photons n")
    p.add_argument("--eta", type=float, default=None, help="overall transmission; default from the depth model")
    _add_params(p)
    p.set_defaults(func=_cmd_advantage_point)
    p = asub.add_parser("map", help="QA grid over n and eta", formatter_class=_Formatter)
    p.add_argument("--n-min", type=int, default=2, help="smallest n")
    p.add_argument("--n-max", type=int, default=100, help="largest n")
    p.add_argument("--n-step", type=int, default=5, help="n step")
    p.add_argument("--eta-min", type=float, default=0.05, help="smallest eta")
    p.add_argument("--eta-max", type=float, default=1.0, help="largest eta")
    p.add_argument("--eta-step", type=float, default=0.05, help="eta step")
    _add_params(p)
    p.add_argument("--out", type=Path, required=True, help="CSV n,eta,qa,qs1,qs2,k_opt (+ .json sidecar)")
    p.set_defaults(func=_cmd_advantage_map)
    return parser


def run(argv=None) -> int:
    """Parse ``argv`` and run the subcommand; returns the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args, _Ctx(argv))
    except UsageError as exc:
        print(f"permsamp: usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError, OSError, KeyError) as exc:
        print(f"permsamp: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


__all__ = ["build_parser", "main", "run"]
