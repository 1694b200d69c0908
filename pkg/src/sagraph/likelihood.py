"""Scatter matrix and exact Gaussian log-likelihood of the spatial model."""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg

from .exceptions import DomainError, ShapeError, StabilityError
from .lattice import WeightPair
from .params import _as_psi, _check_dims, cross_products, filter_matrix, spatial_filter_apply

__all__ = ["scatter_matrix", "log_det_filter", "log_likelihood"]

LOG_2PI = math.log(2.0 * math.pi)


def scatter_matrix(x: np.ndarray, weights: WeightPair, effects) -> np.ndarray:
    """``S = E^T E`` with ``E`` the spatially filtered residuals."""
    e = spatial_filter_apply(effects, weights, x)
    s = e.T @ e
    return 0.5 * (s + s.T)


def _logdet_from_products(prod: np.ndarray) -> tuple[float, float]:
    if prod.size == 0:
        return 1.0, 0.0
    factors = 1.0 - prod.astype(complex)
    if np.any(factors == 0):
        return 0.0, -math.inf
    total = np.log(factors).sum()
    # conjugate pairs cancel in the imaginary part; what is left is pi * (#negative real factors)
    sign = -1.0 if int(round(total.imag / math.pi)) % 2 else 1.0
    return sign, float(total.real)


def log_det_filter(effects, weights: WeightPair, method: str = "auto") -> tuple[float, float]:
    """``(sign, log|det R(psi)|)``.

    ``method="dense"`` runs an LU factorization of the full ``np x np`` filter
    matrix; the default uses the two-category block factorization when the
    weights allow it.
    """
    psi = _as_psi(effects)
    _check_dims(psi, weights)
    if method != "dense":
        prod = cross_products(psi, weights)
        if prod is not None:
            return _logdet_from_products(prod)
        if method == "factored":
            raise ShapeError("weights do not have the two-category block form")
    lu, piv = linalg.lu_factor(filter_matrix(psi, weights), check_finite=False)
    d = np.diag(lu)
    if np.any(d == 0):
        return 0.0, -math.inf
    swaps = np.count_nonzero(piv != np.arange(piv.size))
    sign = (-1.0) ** swaps * np.prod(np.sign(d))
    return float(sign), float(np.log(np.abs(d)).sum())


def _spd_logdet(theta: np.ndarray) -> float:
    try:
        c = linalg.cholesky(theta, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise DomainError("theta is not positive definite") from exc
    return 2.0 * float(np.log(np.diag(c)).sum())


def log_likelihood(x: np.ndarray, weights: WeightPair, effects, theta: np.ndarray,
                   method: str = "auto") -> float:
    """Exact log-likelihood

    ``-(np/2) log 2pi + (n/2) log det theta + log det R(psi) - tr(S theta) / 2``.

    Raises
    ------
    DomainError
        ``theta`` is not symmetric positive definite.
    StabilityError
        ``det R(psi) <= 0``.
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    psi = _as_psi(effects)
    _check_dims(psi, weights, x)
    if theta.shape != (psi.shape[1],) * 2:
        raise ShapeError(f"theta must be {psi.shape[1]}x{psi.shape[1]}, got {theta.shape}")
    if not np.allclose(theta, theta.T, rtol=0, atol=1e-12):
        raise DomainError("theta is not symmetric")
    n, p = x.shape
    logdet_theta = _spd_logdet(theta)
    sign, logdet_r = log_det_filter(psi, weights, method)
    if sign <= 0:
        raise StabilityError("det R(psi) <= 0; spatial effects violate the stability condition")
    s = scatter_matrix(x, weights, psi)
    return -0.5 * n * p * LOG_2PI + 0.5 * n * logdet_theta + logdet_r - 0.5 * float(np.sum(s * theta))
