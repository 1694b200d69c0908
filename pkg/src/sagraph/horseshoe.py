"""Column-wise block Gibbs sweep for the graphical horseshoe.

Off-diagonal precision entries carry ``N(0, lambda_ij^2 xi^2)`` priors with
half-Cauchy local and global scales, realized through inverse-gamma
auxiliaries (``nu`` for the local, ``zeta_hs`` for the global scale). The
diagonal has a flat prior.

The running inverse ``sigma`` is downdated and updated column by column,
so one sweep costs ``O(p^4)`` without any full ``p x p`` inversion.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .dist import sample_gamma, sample_inverse_gamma, sample_mvn
from .exceptions import DomainError, NumericalError
from .params import PrecisionState

__all__ = ["column_conditional", "horseshoe_sweep"]


def _others(p: int, i: int) -> np.ndarray:
    return np.r_[0:i, i + 1:p]


def column_conditional(inv_rest: np.ndarray, s: np.ndarray, i: int, prior_var: np.ndarray,
                       *, iteration: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the off-diagonal column ``theta[-i, i]``.

    Parameters
    ----------
    inv_rest : (p-1, p-1) array
        Inverse of ``theta[-i, -i]``.
    s : (p, p) array
        Scatter matrix.
    prior_var : (p-1,) array
        Prior variances ``lambda^2 xi^2`` of the column entries.
    """
    p = s.shape[0]
    idx = _others(p, i)
    inv_c = s[i, i] * inv_rest + np.diag(1.0 / prior_var)
    inv_c = 0.5 * (inv_c + inv_c.T)
    try:
        chol = linalg.cho_factor(inv_c, lower=True, check_finite=False)
    except linalg.LinAlgError:
        jitter = 1e-10 * np.trace(inv_c) / inv_c.shape[0]
        try:
            chol = linalg.cho_factor(inv_c + jitter * np.eye(inv_c.shape[0]), lower=True,
                                     check_finite=False)
        except linalg.LinAlgError as exc:
            raise NumericalError(
                "horseshoe column precision is not positive definite",
                iteration=iteration, column=i + 1, condition=float(np.linalg.cond(inv_c)),
            ) from exc
    cov = linalg.cho_solve(chol, np.eye(inv_c.shape[0]), check_finite=False)
    cov = 0.5 * (cov + cov.T)
    return -cov @ s[idx, i], cov


def horseshoe_sweep(state: PrecisionState, s: np.ndarray, n: int, rng: np.random.Generator,
                    *, iteration: int | None = None) -> PrecisionState:
    """One pass over all columns of ``theta`` followed by the global scale.

    Parameters
    ----------
    state : PrecisionState
        Current precision matrix, its inverse and the shrinkage scales. Not
        modified.
    s : (p, p) array
        Scatter matrix of the (spatially filtered) residuals.
    n : int
        Number of rows behind ``s``.
    iteration : int, optional
        Reported in :class:`NumericalError` diagnostics.

    Returns
    -------
    PrecisionState
    """
    s = np.asarray(s, dtype=float)
    p = s.shape[0]
    if s.shape != state.theta.shape:
        raise DomainError(f"scatter matrix is {s.shape}, theta is {state.theta.shape}")
    new = state.copy()
    theta, sigma, lam_sq, nu = new.theta, new.sigma, new.lambda_sq, new.nu

    for i in range(p):
        idx = _others(p, i)
        sig_rest = sigma[np.ix_(idx, idx)]
        sig_col = sigma[idx, i]
        inv_rest = sig_rest - np.outer(sig_col, sig_col) / sigma[i, i]

        gamma = sample_gamma(n / 2.0 + 1.0, s[i, i] / 2.0, rng)
        if p == 1:
            theta[0, 0] = gamma
            sigma[0, 0] = 1.0 / gamma
            break
        mean, cov = column_conditional(inv_rest, s, i, lam_sq[idx, i] * new.xi_sq,
                                       iteration=iteration)
        beta = sample_mvn(mean, cov, rng)

        theta[idx, i] = beta
        theta[i, idx] = beta
        w = inv_rest @ beta
        theta[i, i] = gamma + beta @ w

        lam = sample_inverse_gamma(1.0, 1.0 / nu[idx, i] + beta ** 2 / (2.0 * new.xi_sq), rng)
        lam_sq[idx, i] = lam
        lam_sq[i, idx] = lam
        v = sample_inverse_gamma(1.0, 1.0 + 1.0 / lam, rng)
        nu[idx, i] = v
        nu[i, idx] = v

        sigma[np.ix_(idx, idx)] = inv_rest + np.outer(w, w) / gamma
        sigma[idx, i] = -w / gamma
        sigma[i, idx] = -w / gamma
        sigma[i, i] = 1.0 / gamma

    iu = np.triu_indices(p, 1)
    m = iu[0].size
    rate = 1.0 / new.zeta_hs + float(np.sum(theta[iu] ** 2 / (2.0 * lam_sq[iu])))
    new.xi_sq = float(sample_inverse_gamma((m + 1) / 2.0, rate, rng))
    new.zeta_hs = float(sample_inverse_gamma(1.0, 1.0 + 1.0 / new.xi_sq, rng))
    return new
