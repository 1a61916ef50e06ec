"""Bayesian composite Gaussian process emulator.

Python surface over the C++ core: fit the hierarchical global+local+noise GP
with its latent log-GP variance process by MCMC, predict with uncertainty and
a global/local/error decomposition, plus the kriging baseline, the built-in
test functions, and the space-filling design generators.
"""

from ._bcgp import (
    BcgpFit,
    ChainConfig,
    HyperParams,
    KrigingModel,
    bjx,
    fit,
    fit_kriging,
    lhs_maximin,
    relative_errors,
    rmspe,
    sobol_points,
    wing_weight,
)

__all__ = [
    "BcgpFit",
    "ChainConfig",
    "HyperParams",
    "KrigingModel",
    "bjx",
    "fit",
    "fit_kriging",
    "lhs_maximin",
    "relative_errors",
    "rmspe",
    "sobol_points",
    "wing_weight",
]

__version__ = "0.1.0"
