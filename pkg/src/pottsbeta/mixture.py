"""Gaussian observation model with Normal-Inverse-Gamma conjugate updates."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .potts import LabelField

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class MixtureParams:
    mu: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        sigma2 = np.asarray(self.sigma2, dtype=float)
        if mu.shape != sigma2.shape or mu.ndim != 1:
            raise ValueError("mu and sigma2 must be 1-D arrays of equal length")
        if np.any(~(sigma2 > 0)):
            raise ValueError("component variances must be positive")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def k(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True)
class MixturePriors:
    """Per-component priors: μ_j ~ N(mean_j, sd_j²) and σ²_j ~ IG(shape_j, scale_j).

    They are realised as a Normal-Inverse-Gamma prior, μ_j | σ²_j ~
    N(mean_j, σ²_j / kappa_j). ``kappa_j`` is chosen so that the marginal
    prior of μ_j has standard deviation ``sd_j`` (when ``shape_j > 1``; for
    heavier tails the Student-t scale is matched instead).
    """

    mean: np.ndarray
    sd: np.ndarray
    shape: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        arrs = [np.atleast_1d(np.asarray(getattr(self, f), dtype=float)) for f in ("mean", "sd", "shape", "scale")]
        k = max(a.shape[0] for a in arrs)
        arrs = [np.broadcast_to(a, (k,)).copy() for a in arrs]
        for name, a in zip(("mean", "sd", "shape", "scale"), arrs):
            object.__setattr__(self, name, a)
        if np.any(~(self.sd > 0)) or np.any(~(self.shape > 0)) or np.any(~(self.scale > 0)):
            raise ValueError("prior sd, shape and scale must all be positive")
        object.__setattr__(self, "_kappa", self._match_kappa())

    @property
    def k(self) -> int:
        return self.mean.shape[0]

    @property
    def kappa(self) -> np.ndarray:
        return self._kappa

    def _match_kappa(self) -> np.ndarray:
        a, b, sd2 = self.shape, self.scale, self.sd**2
        with np.errstate(divide="ignore"):
            var_match = b / ((a - 1.0) * sd2)
        scale_match = b / (a * sd2)
        kappa = np.where(a > 1.0, var_match, scale_match)
        kappa.setflags(write=False)
        return kappa

    def initial_params(self) -> MixtureParams:
        """Prior means and the prior mode of each variance."""
        return MixtureParams(self.mean.copy(), self.scale / (self.shape + 1.0))


@dataclass(frozen=True)
class ComponentSummary:
    count: np.ndarray
    mean: np.ndarray
    ssd: np.ndarray

    @property
    def empty(self) -> np.ndarray:
        return self.count == 0


def simulation_priors() -> MixturePriors:
    """The three-component priors used for the synthetic-data study."""
    return MixturePriors(mean=[-0.15, 0.05, 0.25], sd=0.05, shape=1.5, scale=0.01)


def default_priors(k: int) -> MixturePriors:
    """The simulation priors for k=3; otherwise k means evenly spread over the same range."""
    if k == 3:
        return simulation_priors()
    if k < 2:
        raise ValueError("need at least two components")
    return MixturePriors(mean=np.linspace(-0.15, 0.25, k), sd=0.05, shape=1.5, scale=0.01)


def summarise(y, z) -> ComponentSummary:
    """Per-component counts, sample means and sums of squared deviations."""
    y = np.asarray(y, dtype=float).ravel()
    labels = z.labels if isinstance(z, LabelField) else np.asarray(z, dtype=np.int64).ravel()
    k = z.k if isinstance(z, LabelField) else int(labels.max()) + 1
    if y.shape[0] != labels.shape[0]:
        raise ValueError(f"{y.shape[0]} intensities but {labels.shape[0]} labels")
    if not np.all(np.isfinite(y)):
        raise ValueError("intensities must be finite")
    count, mean, ssd = _summarise(y, labels, k)
    return ComponentSummary(count=count, mean=mean, ssd=ssd)


@numba.njit(cache=True)
def _summarise(y, labels, k):
    count = np.zeros(k, dtype=np.int64)
    mean = np.zeros(k)
    ssd = np.zeros(k)
    for i in range(y.shape[0]):
        count[labels[i]] += 1
        mean[labels[i]] += y[i]
    for j in range(k):
        if count[j] > 0:
            mean[j] /= count[j]
    for i in range(y.shape[0]):
        d = y[i] - mean[labels[i]]
        ssd[labels[i]] += d * d
    return count, mean, ssd


def posterior_hyperparams(summary: ComponentSummary, priors: MixturePriors):
    """Normal-Inverse-Gamma posterior (mean, kappa, shape, scale) per component."""
    n = summary.count.astype(float)
    kappa0 = priors.kappa
    kappa = kappa0 + n
    mean = (kappa0 * priors.mean + n * summary.mean) / kappa
    shape = priors.shape + 0.5 * n
    scale = priors.scale + 0.5 * summary.ssd + 0.5 * kappa0 * n * (summary.mean - priors.mean) ** 2 / kappa
    return mean, kappa, shape, scale


def update_params(summary: ComponentSummary, priors: MixturePriors, rng: np.random.Generator) -> MixtureParams:
    """Draw (μ_j, σ²_j) from their conjugate conditional posterior.

    Components with no sites fall back to the prior automatically, since the
    posterior hyperparameters then equal the prior ones.
    """
    if summary.count.shape[0] != priors.k:
        raise ValueError("summary and priors disagree on the number of components")
    mu, sigma2 = _nig_draw(summary.count, summary.mean, summary.ssd, priors.mean, priors.kappa,
                           priors.shape, priors.scale, rng)
    return MixtureParams(mu, sigma2)


def _nig_draw(count, ybar, ssd, m0, kappa0, a0, b0, rng):
    # all k variance draws come before the k mean draws; drawing them here in
    # that order keeps the generator out of the compiled call
    gammas = rng.standard_gamma(a0 + 0.5 * count)
    normals = rng.standard_normal(count.shape[0])
    return _nig_kernel(count, ybar, ssd, m0, kappa0, b0, gammas, normals)


@numba.njit(cache=True)
def _nig_kernel(count, ybar, ssd, m0, kappa0, b0, gammas, normals):
    # compiled twin of posterior_hyperparams turning standard draws into one joint draw
    k = count.shape[0]
    mu = np.empty(k)
    sigma2 = np.empty(k)
    for j in range(k):
        n = float(count[j])
        kappa = kappa0[j] + n
        mean = (kappa0[j] * m0[j] + n * ybar[j]) / kappa
        dev = ybar[j] - m0[j]
        scale = b0[j] + 0.5 * ssd[j] + 0.5 * kappa0[j] * n * dev * dev / kappa
        sigma2[j] = scale / gammas[j]
        mu[j] = mean + math.sqrt(sigma2[j] / kappa) * normals[j]
    return mu, sigma2


def log_likelihood_table(y, params: MixtureParams) -> np.ndarray:
    """``n x k`` table of Gaussian log-densities of each pixel under each component."""
    y = np.asarray(y, dtype=float).ravel()
    diff = y[:, None] - params.mu[None, :]
    return -0.5 * (LOG_2PI + np.log(params.sigma2)[None, :] + diff * diff / params.sigma2[None, :])


def hpd_interval(samples, level: float = 0.95) -> tuple[float, float]:
    """Shortest interval spanning ``ceil(level * m)`` of the sorted samples.

    Ties go to the lowest window.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    m = x.shape[0]
    if m < 2:
        raise ValueError("need at least two samples for an HPD interval")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    if not 0 < level < 1:
        raise ValueError("level must lie strictly between 0 and 1")
    width = max(1, math.ceil(level * m - 1e-9))
    spans = x[width - 1:] - x[: m - width + 1]
    j = int(np.argmin(spans))
    return float(x[j]), float(x[j + width - 1])
