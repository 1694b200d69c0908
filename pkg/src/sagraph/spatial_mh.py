"""Metropolis-Hastings updates of the spatial effects and normal-gamma shrinkage.

Each unique parameter of ``(psi_1, psi_2)`` gets a random-walk proposal in
turn. Proposals violating the stability condition are redrawn; the
acceptance ratio uses the exact log-likelihood (including ``log det R``)
plus the element's prior.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .dist import sample_gamma, sample_gig
from .exceptions import ConfigurationError, StabilityError, StabilityProposalError
from .lattice import WeightPair
from .likelihood import _logdet_from_products, log_det_filter
from .params import (
    KnownMask,
    NgShrinkState,
    SpatialEffects,
    Symmetric,
    _stable_from_products,
    cross_products,
    stability_check,
)

logger = logging.getLogger(__name__)

__all__ = [
    "NormalPrior",
    "NormalGammaPrior",
    "MhConfig",
    "MhCounts",
    "EffectsTarget",
    "element_log_prior",
    "mh_update_effects",
    "omega_sq_conditional",
    "update_ng_shrinkage",
    "draw_omega_sq",
]

# keeps GIG(kappa - 1/2, psi^2, .) proper when an effect sits exactly at 0
CHI_FLOOR = 1e-12
ALPHA_FLOOR = 1e-12


@dataclass(frozen=True)
class NormalPrior:
    """``N(mu, sigma^2)`` on every free effect; ``sigma`` is a standard deviation."""

    mu: float = 0.0
    sigma: float = 1.0
    name = "normal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError("normal prior sigma must be positive")


@dataclass(frozen=True)
class NormalGammaPrior:
    """``psi | alpha ~ N(0, alpha)``, ``alpha ~ G(kappa, kappa omega^2 / 2)``,
    ``omega^2 ~ G(b0, b1)``."""

    kappa: float = 0.1
    b0: float = 0.01
    b1: float = 0.01
    name = "normal-gamma"

    def __post_init__(self):
        if min(self.kappa, self.b0, self.b1) <= 0:
            raise ConfigurationError("normal-gamma hyperparameters must be positive")


Prior = Union[NormalPrior, NormalGammaPrior]


@dataclass(frozen=True)
class MhConfig:
    """Tuning of the effect updates.

    ``greedy`` switches to the deterministic accept-if-better rule;
    ``raise_on_exhausted`` turns a spent redraw budget into an error instead
    of skipping the element.
    """

    mh_step: float = 0.1
    prior: Prior = field(default_factory=NormalPrior)
    max_redraws: int = 100
    greedy: bool = False
    raise_on_exhausted: bool = False

    def __post_init__(self):
        if not self.mh_step > 0:
            raise ConfigurationError("mh_step must be positive")
        if int(self.max_redraws) < 1:
            raise ConfigurationError("max_redraws must be a positive integer")


@dataclass
class MhCounts:
    """Per-element tallies, shape ``(2, p, p)``."""

    proposed: np.ndarray
    accepted: np.ndarray
    exhausted: np.ndarray

    @classmethod
    def zeros(cls, p: int) -> "MhCounts":
        z = np.zeros((2, p, p), dtype=np.int64)
        return cls(z, z.copy(), z.copy())

    def __iadd__(self, other: "MhCounts") -> "MhCounts":
        self.proposed += other.proposed
        self.accepted += other.accepted
        self.exhausted += other.exhausted
        return self

    def rate(self) -> float:
        total = int(self.proposed.sum())
        return float(self.accepted.sum()) / total if total else float("nan")


class EffectsTarget:
    """Data-dependent pieces of the effects' conditional posterior.

    ``X`` enters only through the Gram matrix of ``[X, w_21 X, w_12 X]``, so
    the scatter matrix of any ``psi`` costs ``O(p^3)`` independent of ``n``.
    """

    def __init__(self, x: np.ndarray, weights: WeightPair):
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[0] != weights.n:
            raise ConfigurationError(f"X must have {weights.n} rows, got shape {x.shape}")
        self.x = x
        self.weights = weights
        self.p = x.shape[1]
        z = np.hstack([x, weights.w_21 @ x, weights.w_12 @ x])
        self.gram = z.T @ z
        self.factored = weights.bipartite is not None

    def scatter(self, psi: np.ndarray) -> np.ndarray:
        b = np.vstack([np.eye(self.p), -psi[0], -psi[1]])
        s = b.T @ self.gram @ b
        return 0.5 * (s + s.T)

    def filter_terms(self, psi: np.ndarray) -> tuple[bool, float]:
        """``(stable, log det R)``; the log-determinant is ``nan`` when unstable."""
        if self.factored:
            prod = cross_products(psi, self.weights)
            if not _stable_from_products(prod):
                return False, math.nan
            return True, _logdet_from_products(prod)[1]
        if not stability_check(psi, self.weights, method="dense"):
            return False, math.nan
        return True, log_det_filter(psi, self.weights, method="dense")[1]


def _normal_logpdf(x: float, mean: float, var: float) -> float:
    return -0.5 * (math.log(2.0 * math.pi * var) + (x - mean) ** 2 / var)


def element_log_prior(effects: SpatialEffects, k: int, i: int, j: int, value: float,
                      prior: Prior, ng: NgShrinkState | None = None,
                      tight: np.ndarray | None = None) -> float:
    """Log prior density of one unique effect parameter (0-based indices)."""
    r = effects.restriction
    if isinstance(r, KnownMask) and r.mask[k, i, j]:
        return _normal_logpdf(value, r.means[k, i, j], r.sds[k, i, j] ** 2)
    if i == j:
        return _normal_logpdf(value, effects.mu_diag, effects.tau)
    if tight is None:
        tight = effects.tight_mask()
    if tight[k, i, j]:
        return _normal_logpdf(value, 0.0, effects.tau)
    if isinstance(prior, NormalGammaPrior):
        if ng is None:
            raise ConfigurationError("normal-gamma prior needs a shrinkage state")
        return _normal_logpdf(value, 0.0, ng.alpha[k, i, j])
    return _normal_logpdf(value, prior.mu, prior.sigma ** 2)


def mh_update_effects(effects: SpatialEffects, theta: np.ndarray, weights: WeightPair,
                      x: np.ndarray, cfg: MhConfig, ng: NgShrinkState | None,
                      rng: np.random.Generator, *, target: EffectsTarget | None = None,
                      iteration: int | None = None) -> tuple[SpatialEffects, MhCounts]:
    """One pass of single-site updates over every unique effect parameter.

    Parameters
    ----------
    effects : SpatialEffects
        Current (stable) state.
    theta : (p, p) array
        Current precision matrix.
    target : EffectsTarget, optional
        Reuse cached data products across calls; built from ``x`` otherwise.

    Returns
    -------
    (SpatialEffects, MhCounts)
    """
    if target is None:
        target = EffectsTarget(x, weights)
    theta = np.asarray(theta, dtype=float)
    p = effects.p
    psi = effects.stacked
    symmetric = isinstance(effects.restriction, Symmetric)
    tight = effects.tight_mask()
    stable, logdet = target.filter_terms(psi)
    if not stable:
        raise StabilityError("current spatial effects violate the stability condition")
    quad = float(np.sum(theta * target.scatter(psi)))
    counts = MhCounts.zeros(p)
    prior_cache = {}

    for k, i, j in zip(*np.nonzero(effects.parameter_mask())):
        k, i, j = int(k), int(i), int(j)
        current = psi[k, i, j]
        proposal = psi.copy()
        for _ in range(int(cfg.max_redraws)):
            value = current + cfg.mh_step * rng.standard_normal()
            proposal[k, i, j] = value
            if symmetric:
                proposal[k, j, i] = value
            ok, logdet_new = target.filter_terms(proposal)
            if ok:
                break
        else:
            counts.exhausted[k, i, j] += 1
            if cfg.raise_on_exhausted:
                raise StabilityProposalError(
                    f"no stable proposal in {cfg.max_redraws} draws for psi{k + 1}[{i + 1},{j + 1}]"
                    + (f" at iteration {iteration}" if iteration is not None else ""),
                    element=(k + 1, i + 1, j + 1),
                )
            logger.info("redraw budget spent at psi%d[%d,%d]; element left unchanged",
                        k + 1, i + 1, j + 1)
            continue
        counts.proposed[k, i, j] += 1
        quad_new = float(np.sum(theta * target.scatter(proposal)))
        key = (k, i, j)
        if key not in prior_cache:
            prior_cache[key] = element_log_prior(effects, k, i, j, current, cfg.prior, ng, tight)
        lp_new = element_log_prior(effects, k, i, j, value, cfg.prior, ng, tight)
        delta = (logdet_new - 0.5 * quad_new + lp_new) - (logdet - 0.5 * quad + prior_cache[key])
        accept = delta > 0 if cfg.greedy else math.log(rng.random()) < delta
        if accept:
            psi = proposal
            logdet, quad = logdet_new, quad_new
            prior_cache[key] = lp_new
            counts.accepted[k, i, j] += 1
    return effects.with_values(psi), counts


def omega_sq_conditional(alpha: np.ndarray, kappa: float, b0: float, b1: float) -> tuple[float, float]:
    """``(shape, rate)`` of the global ``omega^2`` full conditional."""
    alpha = np.asarray(alpha, dtype=float)
    return b0 + kappa * alpha.size, b1 + 0.5 * kappa * float(alpha.sum())


def update_ng_shrinkage(effects: SpatialEffects, ng: NgShrinkState,
                        rng: np.random.Generator) -> NgShrinkState:
    """Draw every local variance from its GIG conditional, then ``omega^2``.

    All ``2 p^2`` local variances are updated, including entries whose prior
    does not use them, so the ``omega^2`` shape is ``b0 + 2 p^2 kappa``.
    """
    psi = effects.stacked
    new = ng.copy()
    lam = ng.kappa - 0.5
    rate = ng.kappa * ng.omega_sq
    chi = np.maximum(psi ** 2, CHI_FLOOR)
    alpha = np.empty_like(chi)
    for idx in np.ndindex(chi.shape):
        alpha[idx] = sample_gig(lam, chi[idx], rate, rng)
    new.alpha = np.maximum(alpha, ALPHA_FLOOR)
    new.omega_sq = draw_omega_sq(new.alpha, ng, rng)
    return new


def draw_omega_sq(alpha: np.ndarray, ng: NgShrinkState, rng: np.random.Generator) -> float:
    """One draw of ``omega^2`` given the local variances ``alpha``."""
    shape, rate = omega_sq_conditional(alpha, ng.kappa, ng.b0, ng.b1)
    return float(sample_gamma(shape, rate, rng))
