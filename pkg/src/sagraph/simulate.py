"""Ground-truth models and data for simulation studies."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import linalg

from .exceptions import ConfigurationError, DomainError, StabilityError
from .lattice import Layout, WeightPair, build_weights, strip_layout
from .params import KnownMask, SpatialEffects, Symmetric, Triangular, filter_matrix, stability_check

logger = logging.getLogger(__name__)

__all__ = [
    "gen_network",
    "gen_precision",
    "gen_effects",
    "gen_data",
    "SimulatedData",
    "simulate_dataset",
    "write_truth",
    "read_truth",
]

NETWORK_KINDS = ("random", "scale_free", "star")
RESCALE_FACTOR = 0.9
MAX_RESCALES = 500


def gen_network(kind: str, p: int, rng: np.random.Generator, edge_prob: float = 0.2) -> np.ndarray:
    """Symmetric 0/1 adjacency with zero diagonal.

    ``random`` keeps each pair with probability ``edge_prob``; ``scale_free``
    grows a preferential-attachment tree (one edge per new node); ``star``
    joins node 1 to all others.
    """
    if p < 2:
        raise ConfigurationError("network needs p >= 2")
    a = np.zeros((p, p), dtype=int)
    if kind == "random":
        iu = np.triu_indices(p, 1)
        a[iu] = rng.random(iu[0].size) < edge_prob
    elif kind == "scale_free":
        a[0, 1] = 1
        degree = np.zeros(p)
        degree[:2] = 1
        for new in range(2, p):
            target = rng.choice(new, p=degree[:new] / degree[:new].sum())
            a[min(target, new), max(target, new)] = 1
            degree[target] += 1
            degree[new] = 1
    elif kind == "star":
        a[0, 1:] = 1
    else:
        raise ConfigurationError(f"network kind must be one of {NETWORK_KINDS}, got {kind!r}")
    return a + a.T


def gen_precision(adjacency: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Diagonally dominant precision matrix with the adjacency's zero pattern.

    Edge magnitudes are uniform on ``[0.2, 0.6]`` with a random sign; each
    diagonal entry is its row's absolute sum plus 0.1.
    """
    a = np.asarray(adjacency)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.array_equal(a, a.T) or np.any(np.diag(a)):
        raise ConfigurationError("adjacency must be symmetric with zero diagonal")
    p = a.shape[0]
    iu = np.triu_indices(p, 1)
    vals = rng.uniform(0.2, 0.6, iu[0].size) * rng.choice([-1.0, 1.0], iu[0].size)
    theta = np.zeros((p, p))
    theta[iu] = np.where(a[iu] != 0, vals, 0.0)
    theta = theta + theta.T
    theta[np.diag_indices(p)] = np.abs(theta).sum(axis=1) + 0.1
    return theta


def _draft_effects(restriction, sparse: bool, p: int, rng: np.random.Generator) -> np.ndarray:
    psi = np.zeros((2, p, p))
    iu = np.triu_indices(p, 1)
    m = iu[0].size
    n_drawn = (3 * p * (p - 1)) // 8
    for k in range(2):
        if isinstance(restriction, KnownMask):
            off = ~np.eye(p, dtype=bool)
            vals = rng.uniform(-1.0, 1.0, (p, p))
            if sparse:
                keep = np.zeros(p * p, dtype=bool)
                keep[rng.choice(np.flatnonzero(off.ravel()), size=(3 * p * p - 3 * p) // 4,
                                replace=False)] = True
                vals = np.where(keep.reshape(p, p), vals, 0.0)
            psi[k] = np.where(off, vals, 0.0)
            continue
        upper = np.zeros(m)
        if sparse:
            pos = rng.choice(m, size=n_drawn, replace=False)
            upper[pos] = rng.uniform(-1.0, 1.0, n_drawn)
        else:
            upper = rng.uniform(-1.0, 1.0, m)
        psi[k][iu] = upper
        if isinstance(restriction, Symmetric):
            psi[k] = psi[k] + psi[k].T
        elif isinstance(restriction, Triangular) and restriction.orientation == "lower":
            psi[k] = psi[k].T
    return psi


def gen_effects(restriction, sparse: bool, p: int, tau: float, rng: np.random.Generator,
                weights: WeightPair, mu_diag: float = 0.0) -> SpatialEffects:
    """Random restricted effects that satisfy the stability condition.

    Sparse draws fill ``floor(3 p (p-1) / 8)`` entries of the free triangle
    with ``U(-1, 1)`` values and zero the rest; dense draws fill the whole
    free triangle. Diagonals are ``N(mu_diag, tau)``. Entries of a
    known-effect mask are set to their prior means. If unstable, all drawn
    entries are shrunk jointly by powers of 0.9 until the check passes.
    """
    if not isinstance(restriction, (Symmetric, Triangular, KnownMask)):
        raise ConfigurationError(f"unknown restriction {restriction!r}")
    if tau <= 0:
        raise ConfigurationError("tau must be positive")
    psi = _draft_effects(restriction, sparse, p, rng)
    diag = mu_diag + math.sqrt(tau) * rng.standard_normal((2, p))
    for k in range(2):
        psi[k][np.diag_indices(p)] = diag[k]
    fixed = np.zeros((2, p, p), dtype=bool)
    if isinstance(restriction, KnownMask):
        fixed = restriction.mask
        psi = np.where(fixed, restriction.means, psi)

    scaled = psi
    for step in range(MAX_RESCALES):
        if stability_check(scaled, weights):
            if step:
                logger.info("effects rescaled by %.6g to meet the stability condition",
                            RESCALE_FACTOR ** step)
            return SpatialEffects(scaled[0], scaled[1], restriction, tau, mu_diag)
        scaled = np.where(fixed, psi, psi * RESCALE_FACTOR ** (step + 1))
    raise StabilityError("could not rescale effects into the stable region")


def gen_data(effects, theta: np.ndarray, weights: WeightPair, n: int, rng: np.random.Generator,
             *, return_residuals: bool = False):
    """Draw ``E`` with rows ``N(0, theta^{-1})`` and solve ``R(psi) vec(X) = vec(E)``.

    Returns ``X``, or ``(X, E)`` with ``return_residuals=True``.
    """
    theta = np.asarray(theta, dtype=float)
    if n != weights.n:
        raise ConfigurationError(f"n={n} does not match the {weights.n} locations of the weights")
    p = theta.shape[0]
    if not stability_check(effects, weights):
        raise StabilityError("spatial effects violate the stability condition")
    try:
        chol = linalg.cholesky(theta, lower=True)
    except linalg.LinAlgError as exc:
        raise DomainError("theta is not positive definite") from exc
    z = rng.standard_normal((n, p))
    # row e = L^{-T} z has covariance (L L^T)^{-1}
    e = linalg.solve_triangular(chol, z.T, lower=True, trans="T").T
    r = filter_matrix(effects, weights)
    x = linalg.solve(r, e.reshape(-1, order="F")).reshape((n, p), order="F")
    return (x, e) if return_residuals else x


@dataclass(frozen=True)
class SimulatedData:
    x: np.ndarray
    layout: Layout
    weights: WeightPair
    effects: SpatialEffects
    theta: np.ndarray
    adjacency: np.ndarray


def simulate_dataset(n: int, p: int, network: str, restriction, sparse: bool,
                     rng: np.random.Generator, tau: float = 0.001, edge_prob: float = 0.2,
                     layout: Layout | None = None) -> SimulatedData:
    """Network, precision, effects and data on an alternating strip (or ``layout``)."""
    layout = layout or strip_layout(n)
    weights = build_weights(layout)
    adj = gen_network(network, p, rng, edge_prob)
    theta = gen_precision(adj, rng)
    effects = gen_effects(restriction, sparse, p, tau, rng, weights)
    x = gen_data(effects, theta, weights, layout.n, rng)
    return SimulatedData(x, layout, weights, effects, theta, adj)


def write_truth(path: str | Path, effects: SpatialEffects, theta: np.ndarray, **meta) -> None:
    """JSON ground truth: ``psi_1``, ``psi_2``, ``theta`` plus free-form metadata."""
    doc = dict(meta)
    doc.update(psi_1=effects.psi_1.tolist(), psi_2=effects.psi_2.tolist(),
               theta=np.asarray(theta).tolist())
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_truth(path: str | Path) -> tuple[np.ndarray, np.ndarray, dict]:
    """Returns ``(psi, theta, meta)`` with ``psi`` of shape ``(2, p, p)``."""
    try:
        doc = json.loads(Path(path).read_text())
        psi = np.array([doc.pop("psi_1"), doc.pop("psi_2")], dtype=float)
        theta = np.array(doc.pop("theta"), dtype=float)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigurationError(f"cannot read ground truth {path}: {exc}") from exc
    return psi, theta, doc
