"""Model parameters, identifiability restrictions and the spatial filter.

Conventions used throughout the package:

* ``psi_1`` pairs with ``weights.w_21`` (effects of ``c2`` variables onto
  ``c1`` locations), ``psi_2`` with ``weights.w_12``.
* ``vec`` stacks columns, so the filter matrix is
  ``R = I_np - kron(psi_1.T, w_21) - kron(psi_2.T, w_12)`` and
  ``R @ vec(X) == vec(X - w_21 X psi_1 - w_12 X psi_2)``.

For two-category weights the nonzero blocks of ``M = I - R`` only link
``c1`` rows to ``c2`` columns and back. Then ``det(I - M)`` equals
``det(I - (psi_1 psi_2)^T (x) (B C))`` with ``B``, ``C`` the cross blocks, and
the eigenvalues of ``M`` are ``+-sqrt(lambda_a * mu_b)`` where ``lambda`` are
the eigenvalues of ``psi_1 @ psi_2`` and ``mu`` those of ``B @ C``. ``mu`` is
fixed per layout, so the stability check and the log-determinant cost a
``p x p`` eigenproblem instead of an ``np x np`` one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Union

import numpy as np

from .exceptions import IdentifiabilityError, ShapeError
from .lattice import WeightPair

__all__ = [
    "Symmetric",
    "Triangular",
    "KnownMask",
    "Restriction",
    "SpatialEffects",
    "PrecisionState",
    "NgShrinkState",
    "apply_restriction",
    "filter_matrix",
    "filter_eigenvalues",
    "stability_check",
    "spatial_filter_apply",
]

DENSE_NORM_PRECHECK = 2000


@dataclass(frozen=True)
class Symmetric:
    """``psi_k == psi_k.T``; the upper triangle holds the free parameters."""

    name = "symmetric"


@dataclass(frozen=True)
class Triangular:
    """Entries off the chosen triangle carry the tight ``N(0, tau)`` prior."""

    orientation: Literal["upper", "lower"] = "upper"
    name = "triangular"

    def __post_init__(self):
        if self.orientation not in ("upper", "lower"):
            raise IdentifiabilityError(f"orientation must be 'upper' or 'lower', got {self.orientation!r}")


@dataclass(frozen=True, eq=False)
class KnownMask:
    """Informative ``N(mean, sd)`` priors on masked ("known") entries.

    ``mask``, ``means`` and ``sds`` have shape ``(2, p, p)``; index 0 refers to
    ``psi_1``.
    """

    mask: np.ndarray
    means: np.ndarray
    sds: np.ndarray
    name = "known-mask"

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        means = np.asarray(self.means, dtype=float)
        sds = np.asarray(self.sds, dtype=float)
        if mask.ndim != 3 or mask.shape[0] != 2 or mask.shape[1] != mask.shape[2]:
            raise ShapeError(f"mask must have shape (2, p, p), got {mask.shape}")
        if means.shape != mask.shape or sds.shape != mask.shape:
            raise ShapeError("means and sds must match the mask shape")
        if np.any(sds[mask] <= 0):
            raise IdentifiabilityError("prior sds of known entries must be positive")
        for arr in (mask, means, sds):
            arr.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)

    @classmethod
    def from_records(cls, p: int, records) -> "KnownMask":
        """Build from ``(k, i, j, mean, sd)`` tuples with 1-based indices."""
        mask = np.zeros((2, p, p), dtype=bool)
        means = np.zeros((2, p, p))
        sds = np.ones((2, p, p))
        for k, i, j, mean, sd in records:
            k, i, j = int(k), int(i), int(j)
            if k not in (1, 2) or not (1 <= i <= p and 1 <= j <= p):
                raise IdentifiabilityError(f"known-effect record ({k}, {i}, {j}) out of range for p={p}")
            mask[k - 1, i - 1, j - 1] = True
            means[k - 1, i - 1, j - 1] = float(mean)
            sds[k - 1, i - 1, j - 1] = float(sd)
        return cls(mask, means, sds)

    def records(self) -> list[tuple[int, int, int, float, float]]:
        return [
            (k + 1, i + 1, j + 1, float(self.means[k, i, j]), float(self.sds[k, i, j]))
            for k, i, j in zip(*np.nonzero(self.mask))
        ]


Restriction = Union[Symmetric, Triangular, KnownMask]


@dataclass(frozen=True, eq=False)
class SpatialEffects:
    """The pair ``(psi_1, psi_2)`` together with its identifiability restriction.

    ``tau`` is the variance of the tight priors, ``mu_diag`` the prior mean of
    the diagonal entries.
    """

    psi_1: np.ndarray
    psi_2: np.ndarray
    restriction: Restriction = field(default_factory=Symmetric)
    tau: float = 0.001
    mu_diag: float = 0.0

    def __post_init__(self):
        a = np.array(self.psi_1, dtype=float)
        b = np.array(self.psi_2, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
            raise ShapeError(f"psi matrices must be equal square shapes, got {a.shape}, {b.shape}")
        if isinstance(self.restriction, KnownMask) and self.restriction.mask.shape[1] != a.shape[0]:
            raise ShapeError("known-effect mask does not match p")
        if self.tau <= 0:
            raise IdentifiabilityError("tau must be positive")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "psi_1", a)
        object.__setattr__(self, "psi_2", b)

    @property
    def p(self) -> int:
        return self.psi_1.shape[0]

    @property
    def stacked(self) -> np.ndarray:
        """Writable ``(2, p, p)`` copy."""
        return np.stack([self.psi_1, self.psi_2])

    def with_values(self, psi: np.ndarray) -> "SpatialEffects":
        return replace(self, psi_1=psi[0], psi_2=psi[1])

    def tight_mask(self) -> np.ndarray:
        """Entries whose prior is tight (``N(mu_diag or 0, tau)`` or a known-effect prior).

        Diagonals are tight under every restriction.
        """
        p = self.p
        r = self.restriction
        eye = np.eye(p, dtype=bool)
        if isinstance(r, KnownMask):
            return r.mask | eye
        if isinstance(r, Triangular):
            off = np.tril(np.ones((p, p), dtype=bool), -1) if r.orientation == "upper" \
                else np.triu(np.ones((p, p), dtype=bool), 1)
            one = eye | off
        else:
            one = eye
        return np.stack([one, one])

    def parameter_mask(self) -> np.ndarray:
        """Entries updated as separate parameters (the lower triangle mirrors the
        upper one under the symmetric restriction)."""
        p = self.p
        if isinstance(self.restriction, Symmetric):
            one = np.triu(np.ones((p, p), dtype=bool))
            return np.stack([one, one])
        return np.ones((2, p, p), dtype=bool)

    def free_mask(self) -> np.ndarray:
        """Unique parameters without a tight prior: the universe for F1."""
        return self.parameter_mask() & ~self.tight_mask()


@dataclass
class PrecisionState:
    """Within-location precision matrix and its horseshoe auxiliaries.

    ``sigma`` is the running inverse of ``theta``; ``lambda_sq`` and ``nu`` are
    symmetric with meaningful off-diagonal entries.
    """

    theta: np.ndarray
    sigma: np.ndarray
    lambda_sq: np.ndarray
    nu: np.ndarray
    xi_sq: float = 1.0
    zeta_hs: float = 1.0

    @classmethod
    def initial(cls, p: int) -> "PrecisionState":
        return cls(np.eye(p), np.eye(p), np.ones((p, p)), np.ones((p, p)), 1.0, 1.0)

    def copy(self) -> "PrecisionState":
        return PrecisionState(self.theta.copy(), self.sigma.copy(), self.lambda_sq.copy(),
                              self.nu.copy(), self.xi_sq, self.zeta_hs)


@dataclass
class NgShrinkState:
    """Normal-gamma shrinkage: local variances ``alpha`` (shape ``(2, p, p)``)
    and global ``omega_sq``, with hyperparameters ``kappa``, ``b0``, ``b1``."""

    alpha: np.ndarray
    omega_sq: float = 1.0
    kappa: float = 0.1
    b0: float = 0.01
    b1: float = 0.01

    def __post_init__(self):
        self.alpha = np.array(self.alpha, dtype=float)
        if min(self.kappa, self.b0, self.b1, self.omega_sq) <= 0 or np.any(self.alpha <= 0):
            raise IdentifiabilityError("normal-gamma state must be entrywise positive")

    @classmethod
    def initial(cls, p: int, kappa: float = 0.1, b0: float = 0.01, b1: float = 0.01) -> "NgShrinkState":
        return cls(np.ones((2, p, p)), 1.0, kappa, b0, b1)

    def copy(self) -> "NgShrinkState":
        return NgShrinkState(self.alpha.copy(), self.omega_sq, self.kappa, self.b0, self.b1)


def apply_restriction(draft, restriction: Restriction, tau: float = 0.001,
                      mu_diag: float = 0.0) -> SpatialEffects:
    """Impose a restriction on a draft ``(psi_1, psi_2)`` pair.

    Symmetric copies the upper triangle onto the lower one. Triangular keeps
    the values; the off-triangle entries are tracked as tight-prior targets via
    :meth:`SpatialEffects.tight_mask`. KnownMask requires at least
    ``ceil(p^2 / 2)`` known entries per matrix.
    """
    psi = np.array([np.asarray(draft[0], dtype=float), np.asarray(draft[1], dtype=float)])
    if not np.all(np.isfinite(psi)):
        raise ShapeError("draft spatial effects must be finite")
    p = psi.shape[1]
    if isinstance(restriction, Symmetric):
        upper = np.triu(psi)
        psi = upper + np.transpose(np.triu(psi, 1), (0, 2, 1))
    elif isinstance(restriction, KnownMask):
        need = math.ceil(p * p / 2)
        counts = restriction.mask.reshape(2, -1).sum(axis=1)
        if np.any(counts < need):
            raise IdentifiabilityError(
                f"known-effect restriction needs >= {need} known entries per matrix, got {counts.tolist()}"
            )
    elif not isinstance(restriction, Triangular):
        raise IdentifiabilityError(f"unknown restriction {restriction!r}")
    return SpatialEffects(psi[0], psi[1], restriction, tau, mu_diag)


def _check_dims(psi: np.ndarray, weights: WeightPair, x: np.ndarray | None = None) -> None:
    if psi.shape[1:] != (psi.shape[1], psi.shape[1]):
        raise ShapeError(f"psi must be (2, p, p), got {psi.shape}")
    if x is not None and x.shape != (weights.n, psi.shape[1]):
        raise ShapeError(f"X must be ({weights.n}, {psi.shape[1]}), got {x.shape}")


def _as_psi(effects) -> np.ndarray:
    if isinstance(effects, SpatialEffects):
        return np.stack([effects.psi_1, effects.psi_2])
    psi = np.asarray(effects, dtype=float)
    if psi.ndim != 3 or psi.shape[0] != 2:
        raise ShapeError(f"expected SpatialEffects or a (2, p, p) array, got shape {psi.shape}")
    return psi


def filter_matrix(effects, weights: WeightPair) -> np.ndarray:
    """Dense ``R(psi) = I_np - sum_k psi_k^T (x) W_k``."""
    psi = _as_psi(effects)
    _check_dims(psi, weights)
    n, p = weights.n, psi.shape[1]
    return np.eye(n * p) - np.kron(psi[0].T, weights.w_21) - np.kron(psi[1].T, weights.w_12)


def cross_products(psi: np.ndarray, weights: WeightPair) -> np.ndarray | None:
    """All products ``lambda_a * mu_b`` (see module docstring), or ``None``
    when the weights lack the two-category block form."""
    split = weights.bipartite
    if split is None:
        return None
    lam = np.linalg.eigvals(psi[0] @ psi[1])
    return np.multiply.outer(lam, split[2]).ravel()


def filter_eigenvalues(effects, weights: WeightPair, method: str = "auto") -> np.ndarray:
    """Spectrum of ``sum_k psi_k^T (x) W_k`` (zero modes omitted on the fast path)."""
    psi = _as_psi(effects)
    _check_dims(psi, weights)
    if method != "dense":
        prod = cross_products(psi, weights)
        if prod is not None:
            root = np.sqrt(prod.astype(complex))
            return np.concatenate([root, -root])
        if method == "factored":
            raise ShapeError("weights do not have the two-category block form")
    return np.linalg.eigvals(np.eye(weights.n * psi.shape[1]) - filter_matrix(psi, weights))


def _stable_from_products(prod: np.ndarray) -> bool:
    if prod.size == 0:
        return True
    re = np.abs(np.sqrt(prod.astype(complex)).real)
    if re.max() >= 1.0:
        return False
    # det R = prod(1 - lambda mu); complex factors pair with their conjugates
    real = np.abs(prod.imag) <= 1e-12 * np.maximum(1.0, np.abs(prod.real))
    return bool(np.all(1.0 - prod.real[real] > 0))


def stability_check(effects, weights: WeightPair, method: str = "auto") -> bool:
    """True iff every eigenvalue of ``sum_k psi_k^T (x) W_k`` has real part in
    ``(-1, 1)`` and ``det R(psi) > 0``.

    ``method`` is ``"auto"`` (block factorization when available), ``"factored"``
    or ``"dense"`` (general eigensolver on the ``np x np`` matrix).
    """
    psi = _as_psi(effects)
    _check_dims(psi, weights)
    if method != "dense":
        prod = cross_products(psi, weights)
        if prod is not None:
            return _stable_from_products(prod)
        if method == "factored":
            raise ShapeError("weights do not have the two-category block form")
    n, p = weights.n, psi.shape[1]
    m = np.eye(n * p) - filter_matrix(psi, weights)
    if n * p > DENSE_NORM_PRECHECK:
        # spectral radius <= induced inf-norm; below 1 the condition holds outright
        if np.abs(m).sum(axis=1).max() < 1.0:
            return True
    ev = np.linalg.eigvals(m)
    if np.any(np.abs(ev.real) >= 1.0):
        return False
    sign, _ = np.linalg.slogdet(np.eye(n * p) - m)
    return bool(sign > 0)


def spatial_filter_apply(effects, weights: WeightPair, x: np.ndarray) -> np.ndarray:
    """Residuals ``E = X - w_21 X psi_1 - w_12 X psi_2``."""
    psi = _as_psi(effects)
    x = np.asarray(x, dtype=float)
    _check_dims(psi, weights, x)
    return x - weights.w_21 @ x @ psi[0] - weights.w_12 @ x @ psi[1]
