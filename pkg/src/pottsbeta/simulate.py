"""Synthetic hidden-Potts images for simulation-based calibration.

Parameters are drawn from the prior, labels from the Potts model at the drawn
β (long Swendsen-Wang run), and pixels from the Gaussian components.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import build_lattice
from .mixture import MixturePriors, simulation_priors
from .potts import LabelField
from .samplers import make_rng, swendsen_wang_chain


@dataclass
class SimSpec:
    dims: tuple[int, ...]
    k: int = 3
    prior_beta: tuple[float, float] = (0.0, 1.3065)
    priors: MixturePriors = field(default_factory=simulation_priors)
    replicates: int = 20
    seed: int = 0
    sw_steps: int = 1000

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.prior_beta = (float(self.prior_beta[0]), float(self.prior_beta[1]))
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if self.priors.k != self.k:
            raise ValueError(f"priors describe {self.priors.k} components, spec has k={self.k}")
        if not 0 <= self.prior_beta[0] <= self.prior_beta[1]:
            raise ValueError("invalid beta interval")


@dataclass
class Replicate:
    index: int
    beta: float
    mu: np.ndarray
    sigma2: np.ndarray
    labels: np.ndarray  # 0-based
    y: np.ndarray
    stat: int


def draw_params(priors: MixturePriors, rng: np.random.Generator):
    """(μ, σ²) from the Normal-Inverse-Gamma prior used when fitting."""
    sigma2 = priors.scale / rng.gamma(priors.shape)
    mu = priors.mean + np.sqrt(sigma2 / priors.kappa) * rng.standard_normal(priors.k)
    return mu, sigma2


def simulate_replicate(spec: SimSpec, index: int) -> Replicate:
    """Replicate ``index`` of ``spec``; depends only on (seed, index)."""
    rng = make_rng(spec.seed, index)
    lat = build_lattice(spec.dims)
    lo, hi = spec.prior_beta
    beta = float(rng.uniform(lo, hi)) if hi > lo else lo
    z = LabelField.uniform(lat, spec.k, rng)
    if beta > 0:
        swendsen_wang_chain(z, beta, spec.sw_steps, rng)
    mu, sigma2 = draw_params(spec.priors, rng)
    y = mu[z.labels] + np.sqrt(sigma2[z.labels]) * rng.standard_normal(lat.n)
    return Replicate(index, beta, mu, sigma2, z.labels.copy(), y, z.stat)


def simulate(spec: SimSpec) -> list[Replicate]:
    return [simulate_replicate(spec, i) for i in range(spec.replicates)]
