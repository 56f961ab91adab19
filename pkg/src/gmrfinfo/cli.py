"""Command-line front end: rate computations, Monte Carlo verification,
scaling sweeps, and the optimal-density search, with CSV output suitable for
external plotting plus a JSON metadata sidecar per run.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .gmrf_mc import mc_kli_estimate
from .inforates import kli_rate_sfcar, mi_rate_sfcar, optimal_zeta, sfcar_info_rates
from .network import (
    InfeasibleEnergyError,
    NetworkConfig,
    optimal_density,
    sweep_energy_fixed_all,
    sweep_fixed_density,
    sweep_infinite_density,
    sweep_spacing,
)
from .spectra import InvalidModelError, SingularModelError, sfcar_for_snr
from ._util import parallel_map

__all__ = ["main", "emit_plotdata", "DEFAULT_SEED"]

# Fixed default seed so that every run is reproducible unless overridden.
DEFAULT_SEED = 1729

_THREADS_ENV = "GMRFINFO_THREADS"


def emit_plotdata(rows: Sequence[dict], schema: Sequence[str], path: str) -> None:
    """Write rows as CSV: header from schema, floats at 12 significant digits.

    Any non-finite value aborts with a diagnostic naming the offending row
    and column; nothing is written in that case.
    """
    if not rows:
        raise ValueError("refusing to write an empty data series")
    rendered = []
    for idx, row in enumerate(rows):
        out = []
        for col in schema:
            value = row[col]
            if isinstance(value, float):
                if not math.isfinite(value):
                    raise ValueError(f"non-finite value in row {idx} column {col!r}")
                out.append(f"{value:.12g}")
            else:
                out.append(str(value))
        rendered.append(out)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(schema)
        writer.writerows(rendered)


def _write_metadata(path: str, command: str, config: dict, extras: dict) -> None:
    meta = {
        "command": command,
        "config": config,
        "version": __version__,
        **extras,
    }
    with open(path + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _snr_linear(args) -> float:
    if args.snr_linear is not None:
        return args.snr_linear
    if args.snr_db is not None:
        return 10.0 ** (args.snr_db / 10.0)
    raise ValueError("one of --snr-db or --snr-linear is required")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", type=int, default=512, help="quadrature side count (default 512)")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"RNG seed (default {DEFAULT_SEED})")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${_THREADS_ENV} or 1)")
    parser.add_argument("--output", type=str, default=None, help="CSV output path")
    parser.add_argument("--config", type=str, default=None,
                        help="JSON file of defaults; explicit flags win")


def _add_snr(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--snr-db", type=float, default=None, help="measurement SNR in dB")
    parser.add_argument("--snr-linear", type=float, default=None, help="measurement SNR, linear ratio")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmrfinfo",
        description="Information rates of hidden lattice Gauss-Markov fields "
                    "and sensor-network scaling experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="per-node KLI/MI rates at one (SNR, zeta)")
    _add_snr(p)
    p.add_argument("--zeta", type=float, required=True)
    _add_common(p)

    p = sub.add_parser("sweep-zeta", help="rates over a zeta range at fixed SNR")
    _add_snr(p)
    p.add_argument("--zeta-min", type=float, default=0.0)
    p.add_argument("--zeta-max", type=float, default=0.25)
    p.add_argument("--points", type=int, default=101)
    _add_common(p)

    p = sub.add_parser("sweep-snr", help="rates over an SNR range at fixed zeta")
    p.add_argument("--zeta", type=float, required=True)
    p.add_argument("--snr-db-min", type=float, default=-10.0)
    p.add_argument("--snr-db-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=41)
    _add_common(p)

    p = sub.add_parser("optimal-zeta", help="information-maximizing zeta over an SNR range")
    p.add_argument("--snr-db-min", type=float, default=-10.0)
    p.add_argument("--snr-db-max", type=float, default=10.0)
    p.add_argument("--step-db", type=float, default=0.5)
    _add_common(p)

    p = sub.add_parser("mc-verify", help="Monte Carlo check of the per-node KLI limit")
    _add_snr(p)
    p.add_argument("--zeta", type=float, required=True)
    p.add_argument("--n", type=int, default=64, help="lattice side")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--sigma2", type=float, default=1.0)
    _add_common(p)

    p = sub.add_parser("scaling", help="fixed-density coverage sweep (area/energy laws)")
    p.add_argument("--n-list", type=int, nargs="+", default=[33, 65, 129, 257])
    p.add_argument("--dn", type=float, default=1.0)
    p.add_argument("--es", type=float, default=1.0)
    p.add_argument("--e0", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--measure", choices=["kli", "mi"], default="kli")
    p.add_argument("--fusion", action="store_true", help="in-network aggregation energy model")
    _add_common(p)

    p = sub.add_parser("spacing", help="per-node rate vs sensor spacing at fixed SNR")
    _add_snr(p)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--dn-min", type=float, default=0.5)
    p.add_argument("--dn-max", type=float, default=8.0)
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--measure", choices=["kli", "mi"], default="kli")
    _add_common(p)

    p = sub.add_parser("density", help="per-node rate vs node density on a fixed area")
    _add_snr(p)
    p.add_argument("--L", type=float, default=4.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--mu-min", type=float, default=0.1)
    p.add_argument("--mu-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--measure", choices=["kli", "mi"], default="kli")
    _add_common(p)

    p = sub.add_parser("energy", help="total information vs total energy at fixed n, dn")
    p.add_argument("--n", type=int, default=21)
    p.add_argument("--dn", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=100.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--e0", type=float, default=0.1)
    p.add_argument("--nu", type=float, default=2.0)
    p.add_argument("--et-list", type=float, nargs="+", default=[1e4, 1e5, 1e6, 1e7, 1e8])
    p.add_argument("--measure", choices=["kli", "mi"], default="kli")
    _add_common(p)

    p = sub.add_parser("optimal-density", help="density maximizing total information under a budget")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--Et", type=float, required=True, dest="et")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--E0", type=float, required=True, dest="e0")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--mu-min", type=float, default=1.0)
    p.add_argument("--mu-max", type=float, default=1e4)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--measure", choices=["kli", "mi"], default="kli")
    _add_common(p)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    # pre-scan for --config and inject file values as defaults (flags win)
    if "--config" not in argv:
        return argv
    path = argv[argv.index("--config") + 1]
    with open(path) as fh:
        values = json.load(fh)
    injected = []
    for key, value in values.items():
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue
        if isinstance(value, bool):
            if value:
                injected.append(flag)
        elif isinstance(value, list):
            injected.append(flag)
            injected.extend(str(v) for v in value)
        else:
            injected.extend([flag, str(value)])
    # defaults go after the subcommand so the subparser consumes them
    return argv[:2] + injected + argv[2:]


def _run_rates(args, threads):
    result = sfcar_info_rates(_snr_linear(args), args.zeta, args.grid)
    print(f"kli={result.kli:.12g} mi={result.mi:.12g} "
          f"quad_error={result.quad_error_estimate:.3g} grid={result.grid}")
    rows = [{"snr": _snr_linear(args), "zeta": args.zeta, "kli": result.kli,
             "mi": result.mi, "quad_error": result.quad_error_estimate}]
    return rows, ["snr", "zeta", "kli", "mi", "quad_error"], {}


def _run_sweep_zeta(args, threads):
    snr = _snr_linear(args)
    zetas = np.linspace(args.zeta_min, args.zeta_max, args.points)
    pairs = parallel_map(
        lambda z: (kli_rate_sfcar(snr, z, args.grid), mi_rate_sfcar(snr, z, args.grid)),
        zetas, threads)
    rows = [{"zeta": float(z), "kli": k, "mi": m} for z, (k, m) in zip(zetas, pairs)]
    print(f"swept {len(rows)} zeta points at snr={snr:.6g}")
    return rows, ["zeta", "kli", "mi"], {}


def _run_sweep_snr(args, threads):
    dbs = np.linspace(args.snr_db_min, args.snr_db_max, args.points)
    pairs = parallel_map(
        lambda db: (kli_rate_sfcar(10 ** (db / 10), args.zeta, args.grid),
                    mi_rate_sfcar(10 ** (db / 10), args.zeta, args.grid)),
        dbs, threads)
    rows = [{"snr_db": float(db), "snr": 10 ** (float(db) / 10), "kli": k, "mi": m}
            for db, (k, m) in zip(dbs, pairs)]
    print(f"swept {len(rows)} SNR points at zeta={args.zeta}")
    return rows, ["snr_db", "snr", "kli", "mi"], {}


def _run_optimal_zeta(args, threads):
    steps = int(round((args.snr_db_max - args.snr_db_min) / args.step_db)) + 1
    dbs = [args.snr_db_min + i * args.step_db for i in range(steps)]
    results = parallel_map(lambda db: optimal_zeta(10 ** (db / 10), grid=args.grid), dbs, threads)
    rows = [{"snr_db": db, "zeta_star": z, "kli_star": v}
            for db, (z, v) in zip(dbs, results)]
    print(f"optimal zeta over {len(rows)} SNR points")
    return rows, ["snr_db", "zeta_star", "kli_star"], {}


def _run_mc_verify(args, threads):
    snr = _snr_linear(args)
    model = sfcar_for_snr(snr, args.zeta, args.sigma2)
    report = mc_kli_estimate(model, args.sigma2, args.n, args.trials, args.seed)
    target = kli_rate_sfcar(snr, args.zeta, args.grid)
    print(f"mc mean={report.mean:.8g} se={report.std_error:.3g} "
          f"quadrature target={target:.8g} n={args.n} trials={args.trials}")
    rows = [{"n": args.n, "trials": args.trials, "seed": args.seed, "mean": report.mean,
             "std_error": report.std_error, "target": target}]
    return rows, ["n", "trials", "seed", "mean", "std_error", "target"], {}


def _network_config(args, n=None, dn=None):
    return NetworkConfig(
        n=n if n is not None else args.n_list[0],
        dn=dn if dn is not None else args.dn,
        es=args.es, e0=args.e0, nu=args.nu, alpha=args.alpha, beta=args.beta,
        fusion=getattr(args, "fusion", False),
    )


def _run_scaling(args, threads):
    sweep = sweep_fixed_density(_network_config(args), args.n_list, args.measure,
                                args.grid, threads)
    rows = [{"n": r.n, "area": r.n**2 * r.dn**2, "snr": r.snr, "zeta": r.zeta,
             "per_node_info": r.per_node_info, "total_info": r.total_info,
             "total_energy": r.total_energy, "efficiency": r.efficiency}
            for r in sweep.reports]
    extras = {
        "eta_vs_area_slope": sweep.eta_vs_area.slope,
        "eta_vs_area_r2": sweep.eta_vs_area.r2,
        "info_vs_energy_slope": sweep.info_vs_energy.slope,
        "info_vs_energy_r2": sweep.info_vs_energy.r2,
    }
    print(f"eta-vs-area slope {sweep.eta_vs_area.slope:.4f}, "
          f"info-vs-energy slope {sweep.info_vs_energy.slope:.4f}")
    return rows, ["n", "area", "snr", "zeta", "per_node_info", "total_info",
                  "total_energy", "efficiency"], extras


def _run_spacing(args, threads):
    snr = _snr_linear(args)
    cfg = NetworkConfig(n=2, dn=1.0, es=snr, e0=1.0, nu=2.0, alpha=args.alpha, beta=1.0)
    dns = list(np.linspace(args.dn_min, args.dn_max, args.points))
    sweep = sweep_spacing(cfg, dns, args.measure, args.grid)
    rows = [{"dn": d, "rate": r, "gap": sweep.limit - r}
            for d, r in zip(sweep.dn_list, sweep.rates)]
    extras = {"limit": sweep.limit, "gap_fit_slope": sweep.gap_fit.slope,
              "alpha_estimate": sweep.alpha_estimate}
    print(f"decorrelated limit {sweep.limit:.6g}, gap-fit slope {sweep.gap_fit.slope:.4f}")
    return rows, ["dn", "rate", "gap"], extras


def _run_density(args, threads):
    snr = _snr_linear(args)
    mus = list(np.logspace(math.log10(args.mu_min), math.log10(args.mu_max), args.points))
    sweep = sweep_infinite_density(args.L, mus, args.measure, snr, args.alpha, args.grid)
    rows = [{"mu": m, "rate": r, "per_area_info": p}
            for m, r, p in zip(sweep.mu_list, sweep.rates, sweep.per_area_info)]
    extras = {"plateau_variation": sweep.plateau_variation}
    print(f"top-decade variation of mu*rate: {sweep.plateau_variation:.4f}")
    return rows, ["mu", "rate", "per_area_info"], extras


def _run_energy(args, threads):
    cfg = NetworkConfig(n=args.n, dn=args.dn, es=1.0, e0=args.e0, nu=args.nu,
                        alpha=args.alpha, beta=args.beta)
    sweep = sweep_energy_fixed_all(cfg, args.et_list, args.measure, args.grid)
    rows = [{"et": e, "total_info": i} for e, i in zip(sweep.et_list, sweep.total_info)]
    extras = {"increments": list(sweep.increments)}
    print("total-info increments per budget step:",
          " ".join(f"{v:.4g}" for v in sweep.increments))
    return rows, ["et", "total_info"], extras


def _run_optimal_density(args, threads):
    mus = np.logspace(math.log10(args.mu_min), math.log10(args.mu_max), args.points)
    result = optimal_density(args.L, args.et, args.alpha, args.beta, args.e0,
                             args.nu, args.measure, mus, args.grid)
    rows = [{"mu": m, "total_info": v}
            for m, v in zip(result.mu_list, result.total_info)]
    extras = {
        "mu_star": result.mu_star,
        "info_star": result.info_star,
        "local_maxima": [{"mu": m, "total_info": v} for m, v in result.local_maxima],
    }
    print(f"optimal density mu*={result.mu_star:.6g} nodes/m^2, "
          f"total information {result.info_star:.6g} nats "
          f"({len(result.local_maxima)} local maxima on the grid)")
    return rows, ["mu", "total_info"], extras


_RUNNERS = {
    "rates": _run_rates,
    "sweep-zeta": _run_sweep_zeta,
    "sweep-snr": _run_sweep_snr,
    "optimal-zeta": _run_optimal_zeta,
    "mc-verify": _run_mc_verify,
    "scaling": _run_scaling,
    "spacing": _run_spacing,
    "density": _run_density,
    "energy": _run_energy,
    "optimal-density": _run_optimal_density,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, ["gmrfinfo"] + argv)[1:]
        args = parser.parse_args(argv)
        threads = args.threads if args.threads is not None else int(os.environ.get(_THREADS_ENV, "1"))
        rows, schema, extras = _RUNNERS[args.command](args, threads)
        if args.output:
            emit_plotdata(rows, schema, args.output)
            config = {k: v for k, v in vars(args).items() if k not in ("command",)}
            _write_metadata(args.output, args.command, config, extras)
            print(f"wrote {args.output} ({len(rows)} rows) and {args.output}.meta.json")
        return 0
    except (ValueError, InvalidModelError, SingularModelError, InfeasibleEnergyError,
            OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
