"""Command-line interface.

Subcommands: simulate, precompute, fit, oracle, benchmark. Each writes its
outputs into a fresh run directory ``<out>/<command>-<timestamp>-seed<seed>``
and prints that path.
"""
from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io as pio
from .benchmark import run_benchmark, write_rows
from .inference import METHODS, ConfigError, TIGrid, grid_betas, precompute_ti_grid, run_chain, simulation_prior
from .lattice import build_lattice
from .mixture import default_priors
from .potts import DEFAULT_BUDGET, BudgetExceeded, PottsEnumeration, pl_moments, stat_counts
from .simulate import SimSpec, simulate_replicate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3

ORACLE_COLUMNS = ("beta", "exact_mean", "exact_sd", "pl_mean", "pl_sd", "log_partition")


def _common(p: argparse.ArgumentParser, seed=True, workers=True) -> None:
    p.add_argument("--out", default="runs", help="base directory for run directories (default: runs)")
    if seed:
        p.add_argument("--seed", type=int, default=0)
    if workers:
        p.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pottsbeta", description="Hidden Potts segmentation and estimation of beta.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthetic images with parameters drawn from the prior")
    p.add_argument("--dims", type=int, nargs="+", default=[125, 125])
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--prior-beta", type=float, nargs=2, metavar=("LO", "HI"),
                   help="beta interval (default [0, 1.3 beta_crit])")
    p.add_argument("--sw-steps", type=int, default=1000, help="Swendsen-Wang updates per label field")
    p.add_argument("--binary", action="store_true", help="write intensities as float64 with a header sidecar")
    _common(p)

    p = sub.add_parser("precompute", help="tabulate E[S | beta] for thermodynamic integration")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dims", type=int, nargs="+")
    src.add_argument("--image", help="take the lattice dims from this image")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--beta-max", type=float, default=3.0)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--sweeps", type=int, default=500, help="averaged Swendsen-Wang updates per grid point")
    p.add_argument("--burn", type=int, default=500, help="discarded Swendsen-Wang updates per grid point")
    _common(p)

    p = sub.add_parser("fit", help="run one of the four samplers on one or more images")
    p.add_argument("images", nargs="*", help="image files (text or .bin with sidecar)")
    p.add_argument("--config", help="flat key = value settings file")
    p.add_argument("--labels", help="observed 1-based label field; pins the labels and samples beta only")
    p.add_argument("--method", choices=METHODS, type=str.upper)
    p.add_argument("--iterations", type=int)
    p.add_argument("--burnin", type=int)
    p.add_argument("--aux-sweeps", type=int)
    p.add_argument("--epsilon", type=float, help="ABC tolerance in like-neighbour pairs")
    p.add_argument("--grid", help="precomputed TI grid CSV")
    p.add_argument("--prior-beta", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--out", default="runs")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("oracle", help="exact and pseudolikelihood moments of S by enumeration")
    p.add_argument("--dims", type=int, nargs="+", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--betas", type=float, nargs="+", help="explicit beta values")
    p.add_argument("--beta-max", type=float, default=2.0)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="largest k^n to enumerate")
    _common(p, seed=False, workers=False)

    p = sub.add_parser("benchmark", help="runtime against image size")
    p.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128], help="square image sides")
    p.add_argument("--methods", type=str.upper, nargs="+", default=list(METHODS), choices=METHODS)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--burnin", type=int)
    p.add_argument("--aux-sweeps", type=int, default=500)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--repeats", type=int, default=1)
    _common(p, workers=False)
    return parser


# --------------------------------------------------------------------------


def _write_replicate(args):
    spec, index, root, binary = args
    rep = simulate_replicate(spec, index)
    d = Path(root) / f"replicate_{index:03d}"
    d.mkdir()
    pio.save_image(d / ("image.bin" if binary else "image.txt"), pio.ImageFile(spec.dims, rep.y), binary=binary)
    pio.save_labels(d / "labels.txt", spec.dims, rep.labels)
    pio.write_json(d / "truth.json", {
        "index": index, "beta": rep.beta, "mu": rep.mu.tolist(), "sigma2": rep.sigma2.tolist(),
        "stat": rep.stat, "seed": spec.seed, "stream": index,
    })
    return rep


def cmd_simulate(args) -> int:
    dims = tuple(args.dims)
    build_lattice(dims)
    prior = tuple(args.prior_beta) if args.prior_beta else simulation_prior(args.k, len(dims))
    spec = SimSpec(dims, k=args.k, prior_beta=prior, priors=default_priors(args.k), replicates=args.replicates,
                   seed=args.seed, sw_steps=args.sw_steps)
    root = pio.run_directory(args.out, "simulate", args.seed)
    jobs = [(spec, i, str(root), args.binary) for i in range(spec.replicates)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            reps = list(pool.map(_write_replicate, jobs))
    else:
        reps = [_write_replicate(j) for j in jobs]
    with open(root / "truth.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "beta", "stat"] + [f"mu_{j + 1}" for j in range(spec.k)]
                   + [f"sigma2_{j + 1}" for j in range(spec.k)])
        for r in reps:
            w.writerow([r.index, repr(r.beta), r.stat] + [repr(float(v)) for v in r.mu]
                       + [repr(float(v)) for v in r.sigma2])
    pio.write_json(root / "spec.json", {
        "dims": list(dims), "k": spec.k, "prior_beta": list(spec.prior_beta), "replicates": spec.replicates,
        "seed": spec.seed, "sw_steps": spec.sw_steps, "priors": pio.priors_dict(spec.priors),
    })
    print(root)
    return EXIT_OK


def cmd_precompute(args) -> int:
    dims = tuple(args.dims) if args.dims else pio.load_image(args.image).dims
    lat = build_lattice(dims)
    if args.sweeps < 1 or args.burn < 0:
        raise ConfigError("need sweeps >= 1 and burn >= 0")
    if not args.beta_max > 0 or not args.step > 0:
        raise ConfigError("need beta-max > 0 and step > 0")
    grid = precompute_ti_grid(lat, args.k, args.beta_max, step=args.step, sweeps=args.sweeps, burn=args.burn,
                              seed=args.seed, workers=args.workers)
    root = pio.run_directory(args.out, "precompute", args.seed)
    grid.to_csv(root / "grid.csv")
    print(root)
    return EXIT_OK


def _fit_settings(args):
    if args.config:
        cfg, priors = pio.load_config(args.config)
    else:
        cfg, priors = pio.build_config({})
    overrides = {
        "method": args.method, "iterations": args.iterations, "burn_in": args.burnin,
        "aux_sweeps": args.aux_sweeps, "abc_epsilon": args.epsilon, "ti_grid_path": args.grid,
        "seed": args.seed, "prior_beta": tuple(args.prior_beta) if args.prior_beta else None,
    }
    d = cfg.as_dict()
    d.update({k: v for k, v in overrides.items() if v is not None})
    return type(cfg).from_dict(d), priors


def _fit_one(job):
    image, labels_path, cfg, priors, out_dir = job
    out_dir = Path(out_dir)
    y = None
    observed = None
    if image is not None:
        img = pio.load_image(image)
        dims = img.dims
        y = img.values
    if labels_path is not None:
        lab = pio.load_labels(labels_path, priors.k)
        if image is not None and lab.dims != dims:
            raise ConfigError(f"labels have dims {lab.dims}, image has {dims}")
        dims = lab.dims
        observed = lab.values
    lat = build_lattice(dims)
    grid = TIGrid.from_csv(cfg.ti_grid_path) if cfg.method == "TI" else None
    trace = run_chain(y, lat, priors, cfg, grid=grid, observed_labels=observed)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace.to_csv(out_dir / "trace.csv")
    summary = trace.summary()
    summary["image"] = image
    summary["observed_labels"] = labels_path
    summary["dims"] = list(dims)
    summary["priors"] = pio.priors_dict(priors)
    pio.write_json(out_dir / "summary.json", summary)
    (out_dir / "config.txt").write_text(pio.config_text(trace.config, priors))
    pio.save_labels(out_dir / "segmentation.txt", dims, trace.labels)
    return str(out_dir)


def cmd_fit(args) -> int:
    cfg, priors = _fit_settings(args)
    if not args.images and not args.labels:
        raise ConfigError("give at least one image or --labels")
    if args.labels and len(args.images) > 1:
        raise ConfigError("--labels applies to a single image")
    if cfg.method == "TI" and cfg.ti_grid_path is None:
        raise ConfigError("method TI needs a grid: run 'pottsbeta precompute' for these dims and k, "
                          "then pass --grid <run>/grid.csv")
    root = pio.run_directory(args.out, "fit", cfg.seed)
    images = args.images or [None]
    if len(images) == 1:
        jobs = [(images[0], args.labels, cfg, priors, str(root))]
    else:
        jobs = [(im, None, cfg, priors, str(root / f"{i:03d}_{Path(im).stem}")) for i, im in enumerate(images)]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            list(pool.map(_fit_one, jobs))
    else:
        for j in jobs:
            _fit_one(j)
    print(root)
    return EXIT_OK


def oracle_rows(dims, k: int, betas, budget: int = DEFAULT_BUDGET) -> list[tuple[float, ...]]:
    lat = build_lattice(dims)
    stat_counts(lat, k, budget)  # budget check before any work
    enum = PottsEnumeration(lat, k)
    pl = pl_moments(lat, k, list(betas), budget)
    rows = []
    for b, p in zip(betas, pl):
        m = enum.moments(b)
        rows.append((float(b), m.mean, m.sd, p.mean, p.sd, m.log_partition))
    return rows


def cmd_oracle(args) -> int:
    dims = tuple(args.dims)
    betas = args.betas if args.betas else grid_betas(args.beta_max, args.step).tolist()
    if any(b < 0 for b in betas):
        raise ConfigError("beta values must be non-negative")
    rows = oracle_rows(dims, args.k, betas, args.budget)
    root = pio.run_directory(args.out, "oracle", 0)
    with open(root / "oracle.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ORACLE_COLUMNS)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])
    print(root)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    if any(s < 2 for s in args.sizes):
        raise ConfigError("sizes must be at least 2")
    rows = run_benchmark(args.sizes, args.methods, iterations=args.iterations, burn_in=args.burnin,
                         aux_sweeps=args.aux_sweeps, seed=args.seed, k=args.k, repeats=args.repeats)
    root = pio.run_directory(args.out, "benchmark", args.seed)
    write_rows(root / "benchmark.csv", rows)
    print(root)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "precompute": cmd_precompute, "fit": cmd_fit, "oracle": cmd_oracle,
            "benchmark": cmd_benchmark}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
