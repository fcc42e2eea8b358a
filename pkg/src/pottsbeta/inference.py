"""MCMC estimation of β for the hidden Potts model.

Four fitters share one Gibbs skeleton (labels, then component parameters,
then β) and differ only in how the β proposal is accepted:

* ``PL``:   pseudolikelihood ratio,
* ``TI``:   path-sampling estimate of log C(β) from a precomputed grid,
* ``MAVM``: approximate exchange algorithm with a Gibbs-sampled auxiliary field,
* ``ABC``:  ABC-MCMC tolerance test on the sufficient statistic.
"""
from __future__ import annotations

import bisect
import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numba
import numpy as np

from .lattice import Lattice, build_lattice
from .mixture import MixtureParams, MixturePriors, _nig_draw, _summarise, hpd_interval, log_likelihood_table
from .potts import LabelField, _check_beta, critical_beta
from .samplers import RwmhState, _sweep_gauss, gibbs_label_sweep, make_rng, rwmh_step, swendsen_wang_chain

METHODS = ("PL", "TI", "MAVM", "ABC")
PHASES = ("labels", "theta", "beta", "auxiliary")


class ConfigError(ValueError):
    """Invalid or inconsistent fitting configuration."""


@dataclass
class FitConfig:
    """Settings for one MCMC run. Every field has a default.

    ``abc_epsilon`` is in units of the sufficient statistic (like-neighbour
    pairs); ``None`` means 1% of the lattice edge count. ``init_beta=None``
    starts β at the midpoint of ``prior_beta``.
    """

    method: str = "PL"
    iterations: int = 10000
    burn_in: int = 5000
    prior_beta: tuple[float, float] = (0.0, 3.0)
    aux_sweeps: int = 500
    aux_init: str = "uniform"
    abc_epsilon: float | None = None
    ti_grid_path: str | None = None
    seed: int = 0
    target_rate: float = 0.44
    init_bandwidth: float = 0.05
    init_beta: float | None = None
    update_beta: bool = True

    def __post_init__(self):
        self.method = str(self.method).upper()
        self.prior_beta = (float(self.prior_beta[0]), float(self.prior_beta[1]))
        self.validate()

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.iterations < 1 or not 0 <= self.burn_in < self.iterations:
            raise ConfigError("need 0 <= burn_in < iterations")
        lo, hi = self.prior_beta
        if not 0 <= lo < hi or not math.isfinite(hi):
            raise ConfigError(f"prior support for beta must satisfy 0 <= lo < hi, got {self.prior_beta}")
        if self.aux_sweeps < 1:
            raise ConfigError("aux_sweeps must be at least 1")
        if self.aux_init not in ("uniform", "current"):
            raise ConfigError("aux_init must be 'uniform' or 'current'")
        if self.abc_epsilon is not None and not self.abc_epsilon > 0:
            raise ConfigError("abc_epsilon must be positive")
        if self.init_beta is not None and not lo <= self.init_beta <= hi:
            raise ConfigError("init_beta must lie inside the prior support")
        if not 0 < self.target_rate < 1 or not self.init_bandwidth > 0:
            raise ConfigError("invalid proposal settings")

    def resolved(self, lat: Lattice) -> "FitConfig":
        """Copy with data-dependent defaults filled in."""
        out = FitConfig(**asdict(self))
        if out.abc_epsilon is None:
            out.abc_epsilon = 0.01 * lat.edge_count
        if out.init_beta is None:
            out.init_beta = 0.5 * (out.prior_beta[0] + out.prior_beta[1])
        return out

    def as_dict(self) -> dict:
        d = asdict(self)
        d["prior_beta"] = list(self.prior_beta)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FitConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**d)


def simulation_prior(k: int, dim: int) -> tuple[float, float]:
    """Uniform prior support [0, 1.3 β_crit] used for synthetic data."""
    return (0.0, 1.3 * round(critical_beta(k, dim), 3))


# --------------------------------------------------------------------------
# pseudolikelihood


@numba.njit(cache=True)
def _pattern_histogram(labels, nbr, degree, k, base):
    # key encodes how many labels occur c times among the neighbours, c = 1..D
    D = nbr.shape[1]
    size = 1
    for _ in range(D):
        size *= base
    hist = np.zeros(size, dtype=np.int64)
    counts = np.zeros(k, dtype=np.int64)
    for i in range(labels.shape[0]):
        for r in range(degree[i]):
            counts[labels[nbr[i, r]]] += 1
        key = 0
        for r in range(degree[i]):
            lab = labels[nbr[i, r]]
            c = counts[lab]
            if c > 0:
                m = 1
                for _ in range(c - 1):
                    m *= base
                key += m
                counts[lab] = 0
        hist[key] += 1
    return hist


class PseudolikelihoodProfile:
    """log of the pseudolikelihood of a fixed label field as a function of β.

    Sites are grouped by the pattern of neighbour label counts, so each
    evaluation costs a few dozen log-sum-exps regardless of image size.
    """

    def __init__(self, z: LabelField, lat: Lattice | None = None):
        lat = z.lat if lat is None else lat
        D = lat.max_degree
        base = D + 1
        hist = _pattern_histogram(z.labels, lat.nbr, lat.degree, z.k, base)
        keys = np.nonzero(hist)[0]
        digits = (keys[:, None] // base ** np.arange(D)[None, :]) % base  # labels seen c+1 times
        self.k = z.k
        self.stat = z.stat
        self.weight = hist[keys].astype(float)
        self.mult = digits.astype(float)
        self.free = z.k - digits.sum(axis=1).astype(float)
        self.c = np.arange(1, D + 1, dtype=float)

    def __call__(self, beta: float) -> float:
        norm = self.free + self.mult @ np.exp(beta * self.c)
        return float(2.0 * beta * self.stat - self.weight @ np.log(norm))


@numba.njit(cache=True)
def _log_norm_diff(labels, nbr, degree, k, expo_a, expo_b):
    # sum over sites of log(sum_j e^{a c_j} / sum_j e^{b c_j}), tables shifted by e^{-beta D}
    counts = np.zeros(k, dtype=np.int64)
    total = 0.0
    for i in range(labels.shape[0]):
        for j in range(k):
            counts[j] = 0
        for r in range(degree[i]):
            counts[labels[nbr[i, r]]] += 1
        na = 0.0
        nb = 0.0
        for j in range(k):
            na += expo_a[counts[j]]
            nb += expo_b[counts[j]]
        total += math.log(na / nb)
    return total


def pseudolikelihood_log_ratio(z: LabelField, beta_a: float, beta_b: float) -> float:
    """log PL(z | β_a) - log PL(z | β_b) in one pass over the sites."""
    lat = z.lat
    D = lat.max_degree
    shift = np.arange(D + 1, dtype=float) - D
    norm = _log_norm_diff(z.labels, lat.nbr, lat.degree, z.k, np.exp(beta_a * shift), np.exp(beta_b * shift))
    return 2.0 * (beta_a - beta_b) * z.stat - norm - lat.n * D * (beta_a - beta_b)


def pseudolikelihood_log(z: LabelField, beta: float, lat: Lattice | None = None) -> float:
    """Sum over sites of the log full-conditional probability of the current label."""
    beta = _check_beta(beta)
    return PseudolikelihoodProfile(z, lat)(beta)


# --------------------------------------------------------------------------
# thermodynamic integration grid


@dataclass
class TIGrid:
    """Expected sufficient statistic tabulated at fixed β, started at 0.

    Between nodes E[S | β] is linearly interpolated; integrals of the
    interpolant are exact, so log-ratios are additive and antisymmetric.
    """

    betas: np.ndarray
    means: np.ndarray
    sds: np.ndarray | None = None
    dims: tuple[int, ...] = ()
    k: int = 0
    sweeps: int = 0
    burn: int = 0
    seed: int = 0
    _cum: np.ndarray = field(init=False, repr=False)
    _nodes: tuple = field(init=False, repr=False)

    def __post_init__(self):
        self.betas = np.asarray(self.betas, dtype=float)
        self.means = np.asarray(self.means, dtype=float)
        if self.sds is not None:
            self.sds = np.asarray(self.sds, dtype=float)
        self.dims = tuple(int(d) for d in self.dims)
        if self.betas.ndim != 1 or self.betas.shape != self.means.shape or self.betas.shape[0] < 2:
            raise ValueError("grid needs at least two (beta, mean) pairs")
        if self.betas[0] != 0.0 or np.any(np.diff(self.betas) <= 0):
            raise ValueError("grid betas must start at 0 and increase strictly")
        seg = 0.5 * np.diff(self.betas) * (self.means[1:] + self.means[:-1])
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])
        # plain lists: the integral is evaluated twice per MCMC iteration
        self._nodes = (self.betas.tolist(), self.means.tolist(), self._cum.tolist())

    @property
    def beta_max(self) -> float:
        return float(self.betas[-1])

    def expectation(self, beta: float) -> float:
        self._check(beta)
        return float(np.interp(beta, self.betas, self.means))

    def integral(self, beta: float) -> float:
        """∫_0^β of the interpolated expectation, i.e. log C(β) - log C(0)."""
        self._check(beta)
        betas, means, cum = self._nodes
        i = min(max(bisect.bisect_right(betas, beta) - 1, 0), len(betas) - 2)
        b0 = betas[i]
        e0 = means[i]
        e = e0 + (beta - b0) * (means[i + 1] - e0) / (betas[i + 1] - b0)
        return cum[i] + 0.5 * (beta - b0) * (e0 + e)

    def _check(self, beta: float) -> None:
        if not 0.0 <= beta <= self.beta_max:
            raise ValueError(f"beta={beta} outside grid range [0, {self.beta_max}]")

    def check_compatible(self, lat: Lattice, k: int) -> None:
        if self.dims and tuple(self.dims) != tuple(lat.dims):
            raise ConfigError(f"grid was computed for dims {self.dims}, image has {lat.dims}")
        if self.k and self.k != k:
            raise ConfigError(f"grid was computed for k={self.k}, model has k={k}")

    def to_csv(self, path) -> None:
        buf = io.StringIO()
        buf.write(f"# dims: {' '.join(map(str, self.dims))}\n")
        buf.write(f"# k: {self.k}\n# sweeps: {self.sweeps}\n# burn: {self.burn}\n# seed: {self.seed}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["beta", "mean_stat", "sd_stat"])
        sds = self.sds if self.sds is not None else np.full_like(self.means, np.nan)
        for b, m, s in zip(self.betas, self.means, sds):
            w.writerow([repr(float(b)), repr(float(m)), repr(float(s))])
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())

    @classmethod
    def from_csv(cls, path) -> "TIGrid":
        meta: dict[str, str] = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, val = line[1:].partition(":")
                    meta[key.strip()] = val.strip()
                elif line.startswith("beta"):
                    continue
                else:
                    rows.append([float(v) for v in line.split(",")])
        arr = np.array(rows, dtype=float)
        return cls(
            betas=arr[:, 0],
            means=arr[:, 1],
            sds=arr[:, 2] if arr.shape[1] > 2 else None,
            dims=tuple(int(v) for v in meta.get("dims", "").split()),
            k=int(meta.get("k", 0)),
            sweeps=int(meta.get("sweeps", 0)),
            burn=int(meta.get("burn", 0)),
            seed=int(meta.get("seed", 0)),
        )


def ti_log_ratio(grid: TIGrid, beta_a: float, beta_b: float) -> float:
    """Path-sampling estimate of log{C(β_a) / C(β_b)}."""
    return grid.integral(beta_a) - grid.integral(beta_b)


def _grid_point(args):
    dims, k, beta, sweeps, burn, seed, stream = args
    lat = build_lattice(dims)
    rng = make_rng(seed, stream)
    z = LabelField.uniform(lat, k, rng)
    swendsen_wang_chain(z, beta, burn, rng)
    trace = swendsen_wang_chain(z, beta, sweeps, rng).astype(float)
    return float(trace.mean()), float(trace.std(ddof=1)) if sweeps > 1 else 0.0


def grid_betas(beta_max: float, step: float) -> np.ndarray:
    if not step > 0:
        raise ValueError("grid step must be positive")
    count = int(math.ceil(beta_max / step - 1e-9)) + 1
    return np.round(step * np.arange(count), 12)


def precompute_ti_grid(lat: Lattice, k: int, beta_max: float, step: float = 0.05, sweeps: int = 500,
                       burn: int = 500, seed: int = 0, workers: int = 1) -> TIGrid:
    """Estimate E[S | β] by Swendsen-Wang at each grid node.

    Node ``i`` runs on its own stream ``(seed, i)``, so the grid does not
    depend on how many worker processes compute it.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    betas = grid_betas(beta_max, step)
    jobs = [(lat.dims, int(k), float(b), int(sweeps), int(burn), int(seed), i) for i, b in enumerate(betas)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_grid_point, jobs))
    else:
        results = [_grid_point(j) for j in jobs]
    means = np.array([r[0] for r in results])
    sds = np.array([r[1] for r in results])
    return TIGrid(betas, means, sds, dims=lat.dims, k=int(k), sweeps=int(sweeps), burn=int(burn), seed=int(seed))


# --------------------------------------------------------------------------
# chain output


@dataclass
class ChainTrace:
    """Post-burn-in samples of one run plus per-phase wall-clock totals."""

    method: str
    beta: np.ndarray
    stat: np.ndarray
    accepted: np.ndarray
    mu: np.ndarray
    sigma2: np.ndarray
    timings: dict
    config: FitConfig
    labels: np.ndarray | None = None
    burn_accepted: int = 0

    def __len__(self) -> int:
        return self.beta.shape[0]

    @property
    def acceptance_rate(self) -> float:
        return float(self.accepted.mean()) if len(self) else float("nan")

    def hpd(self, level: float = 0.95) -> tuple[float, float]:
        return hpd_interval(self.beta, level)

    def to_csv(self, path_or_buf) -> None:
        k = self.mu.shape[1]
        header = ["iteration", "beta", "stat", "accepted"]
        header += [f"mu_{j + 1}" for j in range(k)] + [f"sigma2_{j + 1}" for j in range(k)]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        start = self.config.burn_in + 1
        for t in range(len(self)):
            row = [start + t, repr(float(self.beta[t])), int(self.stat[t]), int(self.accepted[t])]
            row += [repr(float(v)) for v in self.mu[t]] + [repr(float(v)) for v in self.sigma2[t]]
            w.writerow(row)
        if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
            with open(path_or_buf, "w", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            path_or_buf.write(buf.getvalue())

    def summary(self, level: float = 0.95) -> dict:
        k = self.mu.shape[1]
        out = {
            "method": self.method,
            "kept_iterations": len(self),
            "acceptance_rate": self.acceptance_rate,
            "beta": {
                "mean": float(self.beta.mean()),
                "sd": float(self.beta.std(ddof=1)) if len(self) > 1 else 0.0,
                f"hpd_{int(round(level * 100))}": list(self.hpd(level)) if len(self) > 1 else None,
                "split_rhat": split_rhat(self.beta),
            },
            "components": [
                {
                    "mu_mean": float(self.mu[:, j].mean()),
                    "mu_hpd": list(hpd_interval(self.mu[:, j], level)) if len(self) > 1 else None,
                    "sigma2_mean": float(self.sigma2[:, j].mean()),
                    "sigma2_hpd": list(hpd_interval(self.sigma2[:, j], level)) if len(self) > 1 else None,
                }
                for j in range(k)
            ],
            "stat_mean": float(self.stat.mean()),
            "timings_seconds": dict(self.timings),
            "config": self.config.as_dict(),
        }
        return out


def split_rhat(x) -> float:
    """Potential scale reduction comparing the two halves of one chain."""
    x = np.asarray(x, dtype=float)
    half = x.shape[0] // 2
    if half < 2:
        return float("nan")
    a, b = x[:half], x[half: 2 * half]
    w = 0.5 * (a.var(ddof=1) + b.var(ddof=1))
    means = np.array([a.mean(), b.mean()])
    bvar = half * means.var(ddof=1)
    if w == 0:
        return 1.0 if bvar == 0 else float("inf")
    var_plus = (half - 1) / half * w + bvar / half
    return float(math.sqrt(var_plus / w))


# --------------------------------------------------------------------------
# the shared skeleton


def _initial_labels(y, params: MixtureParams, lat: Lattice) -> LabelField:
    table = log_likelihood_table(y, params)
    return LabelField(np.argmax(table, axis=1), params.k, lat)


class _AuxiliaryField:
    """Draws w | β' by Gibbs sweeps from the prior and reports S(w)."""

    def __init__(self, lat: Lattice, k: int, sweeps: int, init: str, rng: np.random.Generator):
        self.lat = lat
        self.k = k
        self.sweeps = sweeps
        self.init = init
        self.rng = rng
        self.elapsed = 0.0

    def stat(self, beta: float, z: LabelField) -> int:
        t0 = time.perf_counter()
        if self.init == "current":
            w = z.copy()
        else:
            w = LabelField.uniform(self.lat, self.k, self.rng)
        gibbs_label_sweep(w, beta, self.lat, rng=self.rng, n_sweeps=self.sweeps)
        self.elapsed += time.perf_counter() - t0
        return w.stat


@numba.njit(cache=True)
def _labels_and_summary(labels, nbr, degree, order, k, beta, y, mu, sigma2, uniforms):
    # one posterior label sweep (as gibbs_gaussian_sweep) and the component
    # summaries of the new labels, in a single compiled call
    ds = _sweep_gauss(labels, nbr, degree, order, k, beta, y, mu, sigma2, uniforms)
    count, ybar, ssd = _summarise(y, labels, k)
    return ds, count, ybar, ssd


def _log_accept_factory(method: str, cfg: FitConfig, lat: Lattice, k: int, grid: TIGrid | None,
                        aux: _AuxiliaryField):
    """Return ``make(z)`` producing ``(log_accept_fn, adapt_fn)`` for labels z."""
    if method == "PL":
        def make(z):
            return (lambda prop, cur: pseudolikelihood_log_ratio(z, prop, cur)), None
    elif method == "TI":
        def make(z):
            s = z.stat
            return (lambda prop, cur: ti_log_ratio(grid, cur, prop) + (prop - cur) * s), None
    elif method == "MAVM":
        def make(z):
            s = z.stat
            return (lambda prop, cur: mavm_log_ratio(prop, cur, s, aux.stat(prop, z))), None
    else:
        eps = float(cfg.abc_epsilon)

        def make(z):
            s = z.stat
            last = {}

            def log_accept(prop, cur):
                last["w"] = aux.stat(prop, z)
                return 0.0 if abs(last["w"] - s) < eps else -math.inf

            # the tolerance hit-rate caps ABC acceptance well below any fixed
            # target, so the bandwidth tracks the exchange acceptance
            # probability of the same auxiliary draw instead
            def adapt(prop, cur):
                return math.exp(min(0.0, mavm_log_ratio(prop, cur, s, last["w"])))

            return log_accept, adapt
    return make


def run_chain(y, lat: Lattice, priors: MixturePriors, cfg: FitConfig, grid: TIGrid | None = None,
              observed_labels=None) -> ChainTrace:
    """Run the selected method.

    ``y`` holds the n pixel intensities. With ``observed_labels`` (0-based)
    the label field is pinned and only β is sampled; ``y`` may then be None,
    in which case the component parameters stay at their initial values.
    """
    cfg = cfg.resolved(lat)
    method = cfg.method
    k = priors.k
    if method == "TI":
        if grid is None:
            raise ConfigError("method TI needs a precomputed grid (run the precompute step first)")
        grid.check_compatible(lat, k)
        if grid.beta_max < cfg.prior_beta[1] - 1e-9:
            raise ConfigError(f"grid reaches beta={grid.beta_max}, prior support extends to {cfg.prior_beta[1]}")

    rng = make_rng(cfg.seed)
    if y is not None:
        y = np.ascontiguousarray(np.asarray(y, dtype=float).ravel())
        if y.shape[0] != lat.n:
            raise ConfigError(f"image has {y.shape[0]} pixels, lattice has {lat.n}")
        if not np.all(np.isfinite(y)):
            raise ConfigError("image intensities must be finite")
    params = priors.initial_params()
    mu, sigma2 = params.mu, params.sigma2
    if observed_labels is not None:
        z = LabelField(observed_labels, k, lat)
        pinned = True
    elif y is None:
        raise ConfigError("either an image or observed labels are required")
    else:
        z = _initial_labels(y, params, lat)
        pinned = False
    update_theta = y is not None

    aux = _AuxiliaryField(lat, k, cfg.aux_sweeps, cfg.aux_init, rng)
    make_accept = _log_accept_factory(method, cfg, lat, k, grid, aux)
    state = RwmhState(bandwidth=min(cfg.init_bandwidth, cfg.prior_beta[1] - cfg.prior_beta[0]),
                      target_rate=cfg.target_rate, support=cfg.prior_beta)
    beta = float(cfg.init_beta)

    kept = cfg.iterations - cfg.burn_in
    trace_beta = np.empty(kept)
    trace_stat = np.empty(kept, dtype=np.int64)
    trace_acc = np.zeros(kept, dtype=bool)
    trace_mu = np.empty((kept, k))
    trace_s2 = np.empty((kept, k))
    timings = dict.fromkeys(PHASES, 0.0)
    burn_accepted = 0

    for t in range(cfg.iterations):
        if t == cfg.burn_in:
            state = state.frozen()
        t0 = time.perf_counter()
        if not pinned:
            ds, count, ybar, ssd = _labels_and_summary(z.labels, lat.nbr, lat.degree, lat.order, k, beta, y,
                                                       mu, sigma2, rng.random(lat.n))
            z.stat += int(ds)
        elif update_theta:
            count, ybar, ssd = _summarise(y, z.labels, k)
        t1 = time.perf_counter()
        if update_theta:
            mu, sigma2 = _nig_draw(count, ybar, ssd, priors.mean, priors.kappa, priors.shape, priors.scale, rng)
        t2 = time.perf_counter()
        accepted = False
        aux_before = aux.elapsed
        if cfg.update_beta:
            log_accept, adapt = make_accept(z)
            beta, accepted, state = rwmh_step(state, beta, log_accept, rng, adapt)
        t3 = time.perf_counter()
        aux_time = aux.elapsed - aux_before
        timings["labels"] += t1 - t0
        timings["theta"] += t2 - t1
        timings["beta"] += t3 - t2 - aux_time
        timings["auxiliary"] += aux_time
        if t >= cfg.burn_in:
            j = t - cfg.burn_in
            trace_beta[j] = beta
            trace_stat[j] = z.stat
            trace_acc[j] = accepted
            trace_mu[j] = mu
            trace_s2[j] = sigma2
        elif accepted:
            burn_accepted += 1
    timings["total"] = sum(timings[p] for p in PHASES)
    timings["final_bandwidth"] = state.bandwidth
    return ChainTrace(method, trace_beta, trace_stat, trace_acc, trace_mu, trace_s2, timings, cfg,
                      labels=z.labels.copy(), burn_accepted=burn_accepted)


def _with_method(cfg: FitConfig, method: str) -> FitConfig:
    if cfg.method != method:
        raise ConfigError(f"configuration is for method {cfg.method}, not {method}")
    return cfg


def fit_pl(y, lat, priors, cfg, observed_labels=None) -> ChainTrace:
    return run_chain(y, lat, priors, _with_method(cfg, "PL"), observed_labels=observed_labels)


def fit_ti(y, lat, priors, cfg, grid, observed_labels=None) -> ChainTrace:
    return run_chain(y, lat, priors, _with_method(cfg, "TI"), grid=grid, observed_labels=observed_labels)


def fit_mavm(y, lat, priors, cfg, observed_labels=None) -> ChainTrace:
    return run_chain(y, lat, priors, _with_method(cfg, "MAVM"), observed_labels=observed_labels)


def fit_abc(y, lat, priors, cfg, observed_labels=None) -> ChainTrace:
    return run_chain(y, lat, priors, _with_method(cfg, "ABC"), observed_labels=observed_labels)


def fit(y, lat, priors, cfg, grid=None, observed_labels=None) -> ChainTrace:
    """Dispatch on ``cfg.method``."""
    return run_chain(y, lat, priors, cfg, grid=grid, observed_labels=observed_labels)


def mavm_log_ratio(beta_prop: float, beta_cur: float, stat_z: int, stat_w: int) -> float:
    """Exchange-algorithm log acceptance ratio under a flat prior and symmetric proposal."""
    return (beta_prop - beta_cur) * stat_z + (beta_cur - beta_prop) * stat_w
