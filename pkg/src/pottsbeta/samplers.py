"""Stochastic kernels for the Potts label field and for β.

All randomness is drawn from a ``numpy.random.Generator``, either inside the
compiled kernels or as a block of uniforms drawn just before the call, so a
chain is reproduced exactly by reseeding the generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numba
import numpy as np

from .lattice import Lattice
from .potts import LabelField, _check_beta


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for chain ``stream`` under ``seed``; same pair, same draws."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(stream),))))


# --------------------------------------------------------------------------
# Gibbs sweeps


@numba.njit(cache=True)
def _sweep_prior(labels, nbr, degree, order, k, expo, rng):
    """One chequerboard sweep from the prior; returns the change in S."""
    counts = np.zeros(k, dtype=np.int64)
    w = np.empty(k)
    ds = 0
    for t in range(order.shape[0]):
        i = order[t]
        for j in range(k):
            counts[j] = 0
        for r in range(degree[i]):
            counts[labels[nbr[i, r]]] += 1
        total = 0.0
        for j in range(k):
            w[j] = expo[counts[j]]
            total += w[j]
        u = rng.random() * total
        new = 0
        acc = 0.0
        for j in range(k - 1):
            acc += w[j]
            new += u >= acc
        ds += counts[new] - counts[labels[i]]
        labels[i] = new
    return ds


@numba.njit(cache=True)
def _sweep_lik(labels, nbr, degree, order, k, beta, loglik, uniforms):
    counts = np.zeros(k, dtype=np.int64)
    w = np.empty(k)
    ds = 0
    for t in range(order.shape[0]):
        i = order[t]
        for j in range(k):
            counts[j] = 0
        for r in range(degree[i]):
            counts[labels[nbr[i, r]]] += 1
        top = -np.inf
        for j in range(k):
            w[j] = beta * counts[j] + loglik[i, j]
            if w[j] > top:
                top = w[j]
        total = 0.0
        for j in range(k):
            w[j] = math.exp(w[j] - top)
            total += w[j]
        u = uniforms[t] * total
        new = 0
        acc = 0.0
        for j in range(k - 1):
            acc += w[j]
            new += u >= acc
        ds += counts[new] - counts[labels[i]]
        labels[i] = new
    return ds


@numba.njit(cache=True)
def _sweep_gauss(labels, nbr, degree, order, k, beta, y, mu, sigma2, uniforms):
    # same arithmetic as mixture.log_likelihood_table, evaluated on the fly;
    # uniforms[t] is the draw for the t-th visited site
    log_2pi = math.log(2.0 * math.pi)
    base = np.empty(k)
    for j in range(k):
        base[j] = log_2pi + math.log(sigma2[j])
    counts = np.zeros(k, dtype=np.int64)
    w = np.empty(k)
    ds = 0
    for t in range(order.shape[0]):
        i = order[t]
        for j in range(k):
            counts[j] = 0
        for r in range(degree[i]):
            counts[labels[nbr[i, r]]] += 1
        top = -np.inf
        for j in range(k):
            d = y[i] - mu[j]
            w[j] = beta * counts[j] + -0.5 * (base[j] + d * d / sigma2[j])
            if w[j] > top:
                top = w[j]
        total = 0.0
        for j in range(k):
            w[j] = math.exp(w[j] - top)
            total += w[j]
        u = uniforms[t] * total
        new = 0
        acc = 0.0
        for j in range(k - 1):
            acc += w[j]
            new += u >= acc
        ds += counts[new] - counts[labels[i]]
        labels[i] = new
    return ds


@numba.njit(cache=True)
def _sweeps_prior(labels, nbr, degree, order, k, expo, rng, n_sweeps):
    ds = 0
    for _ in range(n_sweeps):
        ds += _sweep_prior(labels, nbr, degree, order, k, expo, rng)
    return ds


# Prior sweeps on a padded grid: the image is surrounded by a border of the
# sentinel label k, every site then has exactly 2*d neighbours at fixed
# offsets, and the conditional CDF is looked up from a table keyed by the
# neighbour labels written in base k+1.

TABLE_LIMIT = 2**16


@numba.njit(cache=True)
def _cdf_table(k, beta, D):
    base = k + 1
    size = 1
    for _ in range(D):
        size *= base
    cum = np.empty((size, max(k - 1, 1)))
    counts = np.zeros(k + 1, dtype=np.int64)
    w = np.empty(k)
    for key in range(size):
        for j in range(k + 1):
            counts[j] = 0
        rest = key
        for _ in range(D):
            counts[rest % base] += 1
            rest //= base
        total = 0.0
        for j in range(k):
            w[j] = math.exp(beta * counts[j])
            total += w[j]
        acc = 0.0
        for j in range(k - 1):
            acc += w[j]
            cum[key, j] = acc / total
    return cum


@numba.njit(cache=True, fastmath=True)
def _pass2d(L, U, colour, k, cum):
    R2, C2 = L.shape
    B = k + 1
    for r in range(1, R2 - 1):
        c0 = 1 + ((r - 1 + colour) % 2)
        up = L[r - 1]
        dn = L[r + 1]
        me = L[r]
        ur = U[r]
        for c in range(c0, C2 - 1, 2):
            key = me[c - 1] + B * (me[c + 1] + B * (up[c] + B * dn[c]))
            x = ur[c]
            new = 0
            for j in range(k - 1):
                new += x >= cum[key, j]
            me[c] = new


@numba.njit(cache=True, fastmath=True)
def _pass3d(L, U, colour, k, cum):
    S2, R2, C2 = L.shape
    B = k + 1
    for s in range(1, S2 - 1):
        for r in range(1, R2 - 1):
            c0 = 1 + ((s + r + colour) % 2)
            me = L[s, r]
            up = L[s, r - 1]
            dn = L[s, r + 1]
            bk = L[s - 1, r]
            fw = L[s + 1, r]
            ur = U[s, r]
            for c in range(c0, C2 - 1, 2):
                key = me[c - 1] + B * (me[c + 1] + B * (up[c] + B * (dn[c] + B * (bk[c] + B * fw[c]))))
                x = ur[c]
                new = 0
                for j in range(k - 1):
                    new += x >= cum[key, j]
                me[c] = new


@numba.njit(cache=True)
def _padded_sweeps2d(L, k, cum, rng, n_sweeps):
    U = np.empty(L.shape)
    for _ in range(n_sweeps):
        for r in range(1, L.shape[0] - 1):
            for c in range(1, L.shape[1] - 1):
                U[r, c] = rng.random()
        _pass2d(L, U, 0, k, cum)
        _pass2d(L, U, 1, k, cum)


@numba.njit(cache=True)
def _padded_sweeps3d(L, k, cum, rng, n_sweeps):
    U = np.empty(L.shape)
    for _ in range(n_sweeps):
        for s in range(1, L.shape[0] - 1):
            for r in range(1, L.shape[1] - 1):
                for c in range(1, L.shape[2] - 1):
                    U[s, r, c] = rng.random()
        _pass3d(L, U, 0, k, cum)
        _pass3d(L, U, 1, k, cum)


def _fast_path_ok(lat: Lattice, k: int) -> bool:
    return k >= 2 and (k + 1) ** lat.max_degree <= TABLE_LIMIT


def _padded_prior_sweeps(labels: np.ndarray, lat: Lattice, k: int, beta: float, rng, n_sweeps: int) -> None:
    padded = np.full(tuple(d + 2 for d in lat.dims), k, dtype=np.int64)
    inner = tuple(slice(1, -1) for _ in lat.dims)
    padded[inner] = labels.reshape(lat.dims)
    cum = _cdf_table(k, beta, lat.max_degree)
    if lat.ndim == 2:
        _padded_sweeps2d(padded, k, cum, rng, n_sweeps)
    else:
        _padded_sweeps3d(padded, k, cum, rng, n_sweeps)
    labels[:] = padded[inner].ravel()


def _expo_table(beta: float, lat: Lattice) -> np.ndarray:
    return np.exp(beta * np.arange(lat.max_degree + 1, dtype=float))


def gibbs_label_sweep(z: LabelField, beta: float, lat: Lattice | None = None, likelihood=None,
                      rng: np.random.Generator | None = None, n_sweeps: int = 1) -> LabelField:
    """Resample every site once (per sweep) from its full conditional.

    With ``likelihood`` (an ``n x k`` table of per-site log-densities) the
    conditional is the posterior of the hidden label; without it the sweep
    targets the Potts prior. ``z`` is updated in place and returned.
    """
    beta = _check_beta(beta)
    lat = z.lat if lat is None else lat
    if rng is None:
        raise TypeError("an explicit Generator is required")
    order = lat.order
    if likelihood is None:
        if _fast_path_ok(lat, z.k):
            _padded_prior_sweeps(z.labels, lat, z.k, beta, rng, int(n_sweeps))
            z.refresh()
            return z
        ds = _sweeps_prior(z.labels, lat.nbr, lat.degree, order, z.k, _expo_table(beta, lat), rng, int(n_sweeps))
    else:
        loglik = np.ascontiguousarray(likelihood, dtype=float)
        if loglik.shape != (lat.n, z.k):
            raise ValueError(f"likelihood table must have shape {(lat.n, z.k)}, got {loglik.shape}")
        if not np.all(np.isfinite(loglik)):
            raise ValueError("likelihood table contains non-finite entries")
        ds = 0
        for _ in range(int(n_sweeps)):
            ds += _sweep_lik(z.labels, lat.nbr, lat.degree, order, z.k, beta, loglik, rng.random(order.shape[0]))
    z.stat += int(ds)
    return z


def gibbs_gaussian_sweep(z: LabelField, beta: float, y: np.ndarray, mu, sigma2,
                         rng: np.random.Generator) -> LabelField:
    """One posterior sweep under Gaussian components, without building the n x k table.

    Draws exactly what ``gibbs_label_sweep`` draws from
    ``log_likelihood_table(y, MixtureParams(mu, sigma2))`` with the same generator.
    ``y`` must be a finite float64 vector of length n.
    """
    beta = _check_beta(beta)
    lat = z.lat
    mu = np.asarray(mu, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    if mu.shape != (z.k,) or sigma2.shape != (z.k,):
        raise ValueError(f"need {z.k} component means and variances")
    # drawing the uniforms up front avoids typing the generator on every call
    # and consumes the stream exactly as per-site draws would
    ds = _sweep_gauss(z.labels, lat.nbr, lat.degree, lat.order, z.k, beta, y, mu, sigma2, rng.random(lat.n))
    z.stat += int(ds)
    return z


@numba.njit(cache=True)
def _gibbs_chain(labels, nbr, degree, order, k, expo, rng, n_steps, s0):
    trace = np.empty(n_steps, dtype=np.int64)
    s = s0
    for t in range(n_steps):
        s += _sweep_prior(labels, nbr, degree, order, k, expo, rng)
        trace[t] = s
    return trace


def gibbs_chain(z: LabelField, beta: float, n_steps: int, rng: np.random.Generator) -> np.ndarray:
    """Run ``n_steps`` prior sweeps and return the S(z) value after each."""
    beta = _check_beta(beta)
    lat = z.lat
    trace = _gibbs_chain(z.labels, lat.nbr, lat.degree, lat.order, z.k, _expo_table(beta, lat), rng,
                         int(n_steps), z.stat)
    if n_steps:
        z.stat = int(trace[-1])
    return trace


# --------------------------------------------------------------------------
# Swendsen-Wang


@numba.njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@numba.njit(cache=True)
def _sw_step(labels, edges, k, p_bond, rng, parent, size, newlab):
    n = labels.shape[0]
    for i in range(n):
        parent[i] = i
        size[i] = 1
        newlab[i] = -1
    for e in range(edges.shape[0]):
        a = edges[e, 0]
        b = edges[e, 1]
        if labels[a] != labels[b]:
            continue
        if rng.random() >= p_bond:
            continue
        ra = _find(parent, a)
        rb = _find(parent, b)
        if ra == rb:
            continue
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
    for i in range(n):
        r = _find(parent, i)
        if newlab[r] < 0:
            newlab[r] = rng.integers(0, k)
        labels[i] = newlab[r]
    s = 0
    for e in range(edges.shape[0]):
        if labels[edges[e, 0]] == labels[edges[e, 1]]:
            s += 1
    return s


@numba.njit(cache=True)
def _sw_chain(labels, edges, k, p_bond, rng, n_steps):
    n = labels.shape[0]
    parent = np.empty(n, dtype=np.int64)
    size = np.empty(n, dtype=np.int64)
    newlab = np.empty(n, dtype=np.int64)
    trace = np.empty(n_steps, dtype=np.int64)
    for t in range(n_steps):
        trace[t] = _sw_step(labels, edges, k, p_bond, rng, parent, size, newlab)
    return trace


def swendsen_wang_step(z: LabelField, beta: float, lat: Lattice | None = None,
                       rng: np.random.Generator | None = None) -> LabelField:
    """One Swendsen-Wang cluster update of ``z`` (in place)."""
    swendsen_wang_chain(z, beta, 1, rng, lat)
    return z


def swendsen_wang_chain(z: LabelField, beta: float, n_steps: int, rng: np.random.Generator,
                        lat: Lattice | None = None) -> np.ndarray:
    """Run ``n_steps`` Swendsen-Wang updates; returns S(z) after each step."""
    beta = _check_beta(beta)
    lat = z.lat if lat is None else lat
    if rng is None:
        raise TypeError("an explicit Generator is required")
    p_bond = -math.expm1(-beta)
    trace = _sw_chain(z.labels, lat.edges, z.k, p_bond, rng, int(n_steps))
    if n_steps:
        z.stat = int(trace[-1])
    return trace


# --------------------------------------------------------------------------
# adaptive random-walk Metropolis for β


@dataclass(frozen=True)
class RwmhState:
    """Proposal state of the adaptive random walk.

    The log-bandwidth follows a Robbins-Monro recursion with gain
    ``1 / (target_rate * (1 - target_rate) * t)``, ``t`` counted from
    ``offset`` so the first few steps do not overshoot.
    """

    bandwidth: float
    target_rate: float = 0.44
    step_count: int = 0
    support: tuple[float, float] = (0.0, 1.0)
    adapt: bool = True
    min_bandwidth: float = 1e-6

    def __post_init__(self):
        lo, hi = self.support
        if not lo < hi:
            raise ValueError(f"empty support {self.support}")
        if not 0 < self.target_rate < 1:
            raise ValueError("target rate must lie in (0, 1)")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    @property
    def offset(self) -> float:
        return 5.0 / (self.target_rate * (1.0 - self.target_rate))

    def frozen(self) -> "RwmhState":
        return replace(self, adapt=False)

    def adapted(self, signal: float) -> "RwmhState":
        """Advance the counter; while adapting, move toward the target rate.

        ``signal`` is the acceptance indicator (or an acceptance probability)
        of the step just taken.
        """
        if not self.adapt:
            return replace(self, step_count=self.step_count + 1)
        p = self.target_rate
        gain = 1.0 / (p * (1.0 - p) * (self.step_count + self.offset))
        bw = self.bandwidth * math.exp(gain * (float(signal) - p))
        lo, hi = self.support
        bw = min(max(bw, self.min_bandwidth), hi - lo)
        return replace(self, bandwidth=bw, step_count=self.step_count + 1)


def rwmh_step(state: RwmhState, current: float, log_accept_fn, rng: np.random.Generator, adapt_fn=None):
    """One symmetric random-walk proposal for β.

    ``log_accept_fn(proposal, current)`` returns the log M-H ratio; the
    proposal density terms cancel and are never needed. Proposals outside the
    support are rejected without evaluating it. ``adapt_fn``, if given, is
    called after an in-support evaluation and returns the signal fed to the
    bandwidth adaptation in place of the acceptance indicator.

    Returns ``(new_value, accepted, new_state)``.
    """
    lo, hi = state.support
    if not lo <= current <= hi:
        raise ValueError(f"current value {current} outside support {state.support}")
    proposal = current + state.bandwidth * rng.standard_normal()
    accepted = False
    signal = 0.0
    if lo <= proposal <= hi:
        log_rho = float(log_accept_fn(proposal, current))
        if math.isnan(log_rho):
            raise FloatingPointError("log acceptance ratio is NaN")
        accepted = math.log(rng.random()) < log_rho
        signal = float(accepted) if adapt_fn is None else float(adapt_fn(proposal, current))
    new_state = state.adapted(signal)
    return (proposal if accepted else current), accepted, new_state
