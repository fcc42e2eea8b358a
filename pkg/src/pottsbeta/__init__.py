"""Bayesian estimation of the inverse temperature of the hidden Potts model.

Four samplers for β share one Gibbs skeleton: pseudolikelihood (``PL``),
thermodynamic integration (``TI``), the approximate exchange algorithm
(``MAVM``) and ABC-MCMC (``ABC``). Tiny lattices can be solved exactly by
enumeration, which is how the samplers are checked.
"""
from .inference import (
    METHODS,
    ChainTrace,
    ConfigError,
    FitConfig,
    TIGrid,
    fit,
    fit_abc,
    fit_mavm,
    fit_pl,
    fit_ti,
    mavm_log_ratio,
    precompute_ti_grid,
    pseudolikelihood_log,
    run_chain,
    ti_log_ratio,
)
from .lattice import Lattice, build_lattice, neighbours
from .mixture import (
    ComponentSummary,
    MixtureParams,
    MixturePriors,
    default_priors,
    hpd_interval,
    log_likelihood_table,
    simulation_priors,
    summarise,
    update_params,
)
from .potts import (
    BudgetExceeded,
    ExactMoments,
    LabelField,
    PottsEnumeration,
    conditional_probs,
    critical_beta,
    exact_moments,
    pl_moments,
    stat_delta,
    sufficient_stat,
)
from .samplers import RwmhState, gibbs_label_sweep, make_rng, rwmh_step, swendsen_wang_step
from .simulate import SimSpec, simulate, simulate_replicate

__version__ = "0.1.0"
