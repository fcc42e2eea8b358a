"""Potts model mathematics and the brute-force exact oracle.

Labels are stored 0-based in memory (``0..k-1``); conversion to the 1-based
labels used in files happens in :mod:`pottsbeta.io`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np
from scipy.special import logsumexp

from .lattice import Lattice

DEFAULT_BUDGET = 2**30


class BudgetExceeded(ValueError):
    """Raised when an enumeration would visit more than the allowed number of states."""


@numba.njit(cache=True)
def _stat(labels, edges):
    s = 0
    for e in range(edges.shape[0]):
        if labels[edges[e, 0]] == labels[edges[e, 1]]:
            s += 1
    return s


@numba.njit(cache=True)
def _delta(labels, nbr, degree, i, new):
    old = labels[i]
    if old == new:
        return 0
    d = 0
    for t in range(degree[i]):
        lab = labels[nbr[i, t]]
        if lab == new:
            d += 1
        elif lab == old:
            d -= 1
    return d


class LabelField:
    """Discrete labels over a lattice with a cached sufficient statistic.

    ``labels`` is a 0-based int64 array of length ``lat.n``. Mutate it only
    through :meth:`set` or by calling :meth:`refresh` afterwards, so that
    ``stat`` stays equal to the like-neighbour-pair count.
    """

    __slots__ = ("labels", "k", "lat", "stat")

    def __init__(self, labels, k: int, lat: Lattice):
        labels = np.ascontiguousarray(labels, dtype=np.int64).ravel()
        if labels.shape[0] != lat.n:
            raise ValueError(f"expected {lat.n} labels, got {labels.shape[0]}")
        if k < 1:
            raise ValueError("k must be positive")
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise ValueError(f"labels must lie in 0..{k - 1}")
        self.labels = labels
        self.k = int(k)
        self.lat = lat
        self.stat = int(_stat(labels, lat.edges))

    @classmethod
    def uniform(cls, lat: Lattice, k: int, rng: np.random.Generator) -> "LabelField":
        return cls(rng.integers(0, k, size=lat.n), k, lat)

    @classmethod
    def constant(cls, lat: Lattice, k: int, label: int = 0) -> "LabelField":
        return cls(np.full(lat.n, label, dtype=np.int64), k, lat)

    def copy(self) -> "LabelField":
        other = object.__new__(LabelField)
        other.labels = self.labels.copy()
        other.k = self.k
        other.lat = self.lat
        other.stat = self.stat
        return other

    def set(self, i: int, new_label: int) -> None:
        self.stat += stat_delta(self, i, new_label)
        self.labels[i] = new_label

    def refresh(self) -> int:
        self.stat = int(_stat(self.labels, self.lat.edges))
        return self.stat

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def __len__(self) -> int:
        return self.labels.shape[0]

    def __repr__(self) -> str:
        return f"LabelField(n={self.labels.shape[0]}, k={self.k}, stat={self.stat})"


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0:
        raise ValueError(f"inverse temperature must be finite and non-negative, got {beta}")
    return beta


def neighbour_label_counts(z: LabelField, i: int) -> np.ndarray:
    lat = z.lat
    nb = lat.nbr[i, : lat.degree[i]]
    return np.bincount(z.labels[nb], minlength=z.k)


def conditional_probs(z: LabelField, i: int, beta: float, lat: Lattice | None = None) -> np.ndarray:
    """Full conditional distribution of the label at site ``i``."""
    beta = _check_beta(beta)
    lat = z.lat if lat is None else lat
    if not 0 <= i < lat.n:
        raise IndexError(f"site {i} out of range")
    logits = beta * neighbour_label_counts(z, i).astype(float)
    logits -= logits.max()
    p = np.exp(logits)
    return p / p.sum()


def sufficient_stat(z, lat: Lattice | None = None) -> int:
    """Number of like-labelled neighbour pairs.

    Accepts a :class:`LabelField` or a raw label array together with ``lat``.
    """
    if isinstance(z, LabelField):
        return int(_stat(z.labels, (lat or z.lat).edges))
    if lat is None:
        raise TypeError("a lattice is required for raw label arrays")
    return int(_stat(np.ascontiguousarray(z, dtype=np.int64), lat.edges))


def stat_delta(z: LabelField, i: int, new_label: int, lat: Lattice | None = None) -> int:
    """Change in S(z) if site ``i`` were relabelled to ``new_label``."""
    lat = z.lat if lat is None else lat
    if not 0 <= i < lat.n:
        raise IndexError(f"site {i} out of range")
    if not 0 <= new_label < z.k:
        raise ValueError(f"label {new_label} out of range 0..{z.k - 1}")
    return int(_delta(z.labels, lat.nbr, lat.degree, i, new_label))


def critical_beta(k: int, dim: int = 2) -> float:
    """Critical inverse temperature, exact for 2D and approximate for 3D."""
    if k < 2:
        raise ValueError("need at least two states")
    if dim == 2:
        return math.log1p(math.sqrt(k))
    if dim == 3:
        return (2.0 / 3.0) * math.log(0.5 * (math.sqrt(2.0) + math.sqrt(4.0 * k - 2.0)))
    raise ValueError(f"dim must be 2 or 3, got {dim}")


# --------------------------------------------------------------------------
# brute-force enumeration


@dataclass(frozen=True)
class ExactMoments:
    mean: float
    sd: float
    log_partition: float


def _check_budget(lat: Lattice, k: int, budget: int) -> int:
    if k < 1:
        raise ValueError("k must be positive")
    if lat.n * math.log(k) > math.log(budget) + 1e-12:
        raise BudgetExceeded(
            f"{k}^{lat.n} configurations exceed the enumeration budget of {budget}; "
            f"{max_feasible_sites(k, budget)} sites is the most that fits for k={k}"
        )
    return k**lat.n


def max_feasible_sites(k: int, budget: int = DEFAULT_BUDGET) -> int:
    return int(math.floor(math.log(budget) / math.log(k) + 1e-12))


@numba.njit(cache=True)
def _enumerate_counts(n, k, nbr, degree, n_edges, total):
    counts = np.zeros(n_edges + 1, dtype=np.int64)
    labels = np.zeros(n, dtype=np.int64)
    s = n_edges
    counts[s] += 1
    for _ in range(total - 1):
        i = 0
        while True:
            old = labels[i]
            new = old + 1
            if new == k:
                new = 0
            for t in range(degree[i]):
                lab = labels[nbr[i, t]]
                if lab == new:
                    s += 1
                elif lab == old:
                    s -= 1
            labels[i] = new
            if new != 0:
                break
            i += 1
        counts[s] += 1
    return counts


@numba.njit(cache=True)
def _site_log_norm(labels, nbr, degree, i, k, expo, out, seen, mult):
    # out[b] = log sum_j exp(beta_b * m_ij), via the distinct neighbour labels
    d = degree[i]
    u = 0
    for t in range(d):
        lab = labels[nbr[i, t]]
        found = False
        for r in range(u):
            if seen[r] == lab:
                mult[r] += 1
                found = True
                break
        if not found:
            seen[u] = lab
            mult[u] = 1
            u += 1
    for b in range(expo.shape[0]):
        acc = float(k - u)
        for r in range(u):
            acc += expo[b, mult[r]]
        out[b] = math.log(acc)


@numba.njit(cache=True)
def _enumerate_pl(n, k, nbr, degree, n_edges, total, betas):
    nb = betas.shape[0]
    max_deg = nbr.shape[1]
    expo = np.empty((nb, max_deg + 1))
    for b in range(nb):
        for c in range(max_deg + 1):
            expo[b, c] = math.exp(betas[b] * c)
    weights = np.zeros((nb, n_edges + 1))
    labels = np.zeros(n, dtype=np.int64)
    lognorm = np.empty((n, nb))
    fresh = np.empty(nb)
    acc = np.zeros(nb)
    seen = np.empty(max_deg, dtype=np.int64)
    mult = np.empty(max_deg, dtype=np.int64)
    for i in range(n):
        _site_log_norm(labels, nbr, degree, i, k, expo, lognorm[i], seen, mult)
        for b in range(nb):
            acc[b] += lognorm[i, b]
    s = n_edges
    for step in range(total):
        if step > 0:
            i = 0
            while True:
                old = labels[i]
                new = old + 1
                if new == k:
                    new = 0
                for t in range(degree[i]):
                    lab = labels[nbr[i, t]]
                    if lab == new:
                        s += 1
                    elif lab == old:
                        s -= 1
                labels[i] = new
                for t in range(degree[i]):
                    j = nbr[i, t]
                    _site_log_norm(labels, nbr, degree, j, k, expo, fresh, seen, mult)
                    for b in range(nb):
                        acc[b] += fresh[b] - lognorm[j, b]
                        lognorm[j, b] = fresh[b]
                if new != 0:
                    break
                i += 1
            if i >= 3:
                # resum from scratch every k^3 steps so rounding cannot drift
                for b in range(nb):
                    acc[b] = 0.0
                for j in range(n):
                    for b in range(nb):
                        acc[b] += lognorm[j, b]
        for b in range(nb):
            # log PL = 2*beta*S - sum_i log-normaliser; bounded above by 0
            weights[b, s] += math.exp(2.0 * betas[b] * s - acc[b])
    return weights


@lru_cache(maxsize=32)
def _cached_counts(dims, k):
    from .lattice import build_lattice

    lat = build_lattice(dims)
    return _enumerate_counts(lat.n, k, lat.nbr, lat.degree, lat.edge_count, k**lat.n)


def stat_counts(lat: Lattice, k: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Number of configurations with each value of S(z), for S = 0..|E|.

    This is the density of states; every exact quantity in β follows from it.
    """
    _check_budget(lat, k, budget)
    counts = _cached_counts(lat.dims, int(k))
    return counts.copy()


def _moments_from_logweights(logw: np.ndarray) -> tuple[float, float, float]:
    s = np.arange(logw.shape[0], dtype=float)
    logz = logsumexp(logw)
    p = np.exp(logw - logz)
    mean = float(np.dot(p, s))
    var = float(np.dot(p, (s - mean) ** 2))
    return mean, math.sqrt(max(var, 0.0)), float(logz)


class PottsEnumeration:
    """Exact distribution of S(z) on an enumerable lattice.

    Wraps :func:`stat_counts` and evaluates log C(β), moments and the
    observed-label posterior of β for any number of β values at no further
    enumeration cost.
    """

    def __init__(self, lat: Lattice, k: int, budget: int = DEFAULT_BUDGET):
        self.lat = lat
        self.k = int(k)
        self.counts = stat_counts(lat, k, budget)
        with np.errstate(divide="ignore"):
            self.log_counts = np.log(self.counts.astype(float))
        self.support = np.arange(self.counts.shape[0], dtype=float)

    def log_partition(self, beta):
        beta = np.asarray(beta, dtype=float)
        out = logsumexp(self.log_counts[None, :] + beta.reshape(-1, 1) * self.support[None, :], axis=1)
        return out.reshape(beta.shape) if beta.ndim else float(out[0])

    def moments(self, beta: float) -> ExactMoments:
        beta = _check_beta(beta)
        mean, sd, logz = _moments_from_logweights(self.log_counts + beta * self.support)
        return ExactMoments(mean, sd, logz)

    def log_likelihood(self, beta, stat: int):
        """log p(z | β) for a configuration with S(z) = ``stat``."""
        beta = np.asarray(beta, dtype=float)
        return beta * stat - self.log_partition(beta)

    def posterior(self, grid, stat: int) -> np.ndarray:
        """Normalised posterior masses over the β grid under a flat prior."""
        lp = self.log_likelihood(np.asarray(grid, dtype=float), stat)
        lp = lp - lp.max()
        w = np.exp(lp)
        return w / w.sum()


def exact_moments(lat: Lattice, k: int, beta: float, budget: int = DEFAULT_BUDGET) -> ExactMoments:
    """Exact mean and standard deviation of S(z), and log C(β), by enumeration."""
    return PottsEnumeration(lat, k, budget).moments(beta)


def pl_moments(lat: Lattice, k: int, beta, budget: int = DEFAULT_BUDGET):
    """Moments of S(z) when p(z|β) is replaced by the normalised pseudolikelihood.

    ``beta`` may be a scalar (returns one :class:`ExactMoments`) or a sequence
    (returns a list). ``log_partition`` holds the log of the normaliser of the
    product of conditionals over all configurations.
    """
    scalar = np.ndim(beta) == 0
    betas = np.atleast_1d(np.asarray(beta, dtype=float))
    for b in betas:
        _check_beta(b)
    total = _check_budget(lat, k, budget)
    w = _enumerate_pl(lat.n, int(k), lat.nbr, lat.degree, lat.edge_count, total, betas)
    out = []
    for row in w:
        with np.errstate(divide="ignore"):
            out.append(ExactMoments(*_moments_from_logweights(np.log(row))))
    return out[0] if scalar else out
