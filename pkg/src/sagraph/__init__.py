"""Bayesian spatial autoregressive graphical models for two-category lattices.

Within-location dependence is a sparse precision matrix under a graphical
horseshoe prior; cross-category spatial effects ``psi_1``, ``psi_2`` are
sampled by Metropolis-Hastings under normal or normal-gamma priors.
"""

__version__ = "0.1.0"

from .config import FitConfig, load_config
from .dist import make_rng, split_rng
from .exceptions import (
    ConfigurationError,
    DomainError,
    IdentifiabilityError,
    NumericalError,
    SagraphError,
    ShapeError,
    StabilityError,
    StabilityProposalError,
)
from .gibbs import Chain, EdgeSelection, posterior_summary, run_gibbs, select_edges
from .lattice import Layout, WeightPair, build_weights, strip_layout
from .likelihood import log_likelihood
from .params import KnownMask, SpatialEffects, Symmetric, Triangular, stability_check

__all__ = [
    "__version__",
    "FitConfig",
    "load_config",
    "make_rng",
    "split_rng",
    "ConfigurationError",
    "DomainError",
    "IdentifiabilityError",
    "NumericalError",
    "SagraphError",
    "ShapeError",
    "StabilityError",
    "StabilityProposalError",
    "Chain",
    "EdgeSelection",
    "posterior_summary",
    "run_gibbs",
    "select_edges",
    "Layout",
    "WeightPair",
    "build_weights",
    "strip_layout",
    "log_likelihood",
    "KnownMask",
    "SpatialEffects",
    "Symmetric",
    "Triangular",
    "stability_check",
]
