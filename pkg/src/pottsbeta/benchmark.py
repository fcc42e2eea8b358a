"""Runtime scaling of the four fitters with image size."""
from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass

import numpy as np

from .inference import METHODS, FitConfig, precompute_ti_grid, run_chain, simulation_prior
from .lattice import build_lattice
from .mixture import default_priors
from .simulate import SimSpec, simulate_replicate

COLUMNS = ("size", "n", "method", "iterations", "aux_sweeps", "elapsed_seconds", "labels_seconds",
           "theta_seconds", "beta_seconds", "auxiliary_seconds", "iterations_per_second", "precompute_seconds")


@dataclass
class BenchRow:
    size: str
    n: int
    method: str
    iterations: int
    aux_sweeps: int
    elapsed_seconds: float
    labels_seconds: float
    theta_seconds: float
    beta_seconds: float
    auxiliary_seconds: float
    iterations_per_second: float
    precompute_seconds: float


def _dims(size) -> tuple[int, ...]:
    if isinstance(size, int):
        return (size, size)
    return tuple(int(s) for s in size)


def _warm_up(methods, k, aux_sweeps) -> None:
    # trigger compilation outside the timed region
    lat = build_lattice((4, 4))
    priors = default_priors(k)
    spec = SimSpec((4, 4), k=k, prior_beta=(0.5, 0.5), priors=priors, replicates=1, sw_steps=2)
    rep = simulate_replicate(spec, 0)
    grid = precompute_ti_grid(lat, k, 3.0, step=0.5, sweeps=2, burn=1)
    for m in methods:
        cfg = FitConfig(method=m, iterations=3, burn_in=1, aux_sweeps=min(aux_sweeps, 2))
        run_chain(rep.y, lat, priors, cfg, grid=grid)


def run_benchmark(sizes, methods=METHODS, iterations: int = 200, burn_in: int | None = None,
                  aux_sweeps: int = 500, seed: int = 0, beta: float = 0.5, k: int = 3,
                  grid_sweeps: int = 100, grid_burn: int = 100, repeats: int = 1) -> list[BenchRow]:
    """Time every (size, method) pair on one synthetic image per size.

    ``elapsed_seconds`` is the fastest of ``repeats`` runs of the whole chain;
    TI grid construction is reported separately as ``precompute_seconds``.
    """
    methods = [m.upper() for m in methods]
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    burn_in = iterations // 2 if burn_in is None else burn_in
    priors = default_priors(k)
    _warm_up(methods, k, aux_sweeps)
    rows = []
    for size in sizes:
        dims = _dims(size)
        lat = build_lattice(dims)
        prior = simulation_prior(k, len(dims))
        spec = SimSpec(dims, k=k, prior_beta=(beta, beta), priors=priors, replicates=1, seed=seed, sw_steps=200)
        rep = simulate_replicate(spec, 0)
        grid = None
        pre = 0.0
        if "TI" in methods:
            t0 = time.perf_counter()
            grid = precompute_ti_grid(lat, k, prior[1], sweeps=grid_sweeps, burn=grid_burn, seed=seed)
            pre = time.perf_counter() - t0
        for m in methods:
            cfg = FitConfig(method=m, iterations=iterations, burn_in=burn_in, prior_beta=prior,
                            aux_sweeps=aux_sweeps, seed=seed)
            best = None
            for _ in range(max(1, repeats)):
                t0 = time.perf_counter()
                trace = run_chain(rep.y, lat, priors, cfg, grid=grid)
                elapsed = time.perf_counter() - t0
                if best is None or elapsed < best[0]:
                    best = (elapsed, trace.timings)
            elapsed, tm = best
            rows.append(BenchRow(
                size="x".join(map(str, dims)), n=lat.n, method=m, iterations=iterations, aux_sweeps=aux_sweeps,
                elapsed_seconds=elapsed, labels_seconds=tm["labels"], theta_seconds=tm["theta"],
                beta_seconds=tm["beta"], auxiliary_seconds=tm["auxiliary"],
                iterations_per_second=iterations / elapsed, precompute_seconds=pre if m == "TI" else 0.0,
            ))
    return rows


def loglog_slope(rows, method: str) -> float:
    """Least-squares slope of log elapsed time against log site count."""
    sel = [r for r in rows if r.method == method]
    if len(sel) < 2:
        raise ValueError(f"need at least two sizes for {method}")
    n = np.log([r.n for r in sel])
    t = np.log([r.elapsed_seconds for r in sel])
    return float(np.polyfit(n, t, 1)[0])


def write_rows(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            d = asdict(r)
            w.writerow([repr(d[c]) if isinstance(d[c], float) else d[c] for c in COLUMNS])
