"""Full Gibbs sampler, chain storage, summaries and edge selection.

One iteration runs the horseshoe sweep over the precision matrix, then the
MH pass over the spatial effects, then (normal-gamma prior only) the
shrinkage update. Post burn-in draws are kept in memory as arrays and can be
written to a CSV chain file with a JSON sidecar.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import FitConfig, config_hash
from .dist import make_rng
from .exceptions import ConfigurationError, DomainError, SagraphError
from .horseshoe import horseshoe_sweep
from .lattice import Layout, WeightPair, build_weights
from .params import NgShrinkState, PrecisionState, SpatialEffects, apply_restriction
from .spatial_mh import EffectsTarget, MhCounts, mh_update_effects, update_ng_shrinkage

logger = logging.getLogger(__name__)

__all__ = [
    "Chain",
    "PosteriorSummary",
    "EdgeSelection",
    "Diagnostics",
    "run_gibbs",
    "posterior_summary",
    "select_edges",
    "autocorrelation",
    "effective_sample_size",
    "diagnostics",
    "parameter_names",
    "write_chain",
    "read_chain",
]


@dataclass
class Chain:
    """Stored post burn-in draws plus the run's metadata.

    ``psi`` has shape ``(m, 2, p, p)``, ``theta`` ``(m, p, p)``; ``omega_sq``
    is ``None`` unless the normal-gamma prior was used.
    """

    psi: np.ndarray
    theta: np.ndarray
    xi_sq: np.ndarray
    omega_sq: np.ndarray | None
    config: FitConfig
    seed: int | None
    counts: MhCounts
    iterations: int
    burn_in: int

    @property
    def p(self) -> int:
        return self.theta.shape[1]

    @property
    def size(self) -> int:
        return self.theta.shape[0]

    @property
    def acceptance_rate(self) -> float:
        return self.counts.rate()

    def effects_template(self) -> SpatialEffects:
        """Zero effects carrying this chain's restriction, ``tau`` and ``mu_diag``."""
        z = np.zeros((self.p, self.p))
        return SpatialEffects(z, z, self.config.build_restriction(self.p), self.config.tau,
                              self.config.mu_diag)

    def truncated(self, m: int) -> "Chain":
        om = None if self.omega_sq is None else self.omega_sq[:m]
        return Chain(self.psi[:m], self.theta[:m], self.xi_sq[:m], om, self.config, self.seed,
                     self.counts, self.iterations, self.burn_in)


def _as_weights(spatial) -> WeightPair:
    if isinstance(spatial, WeightPair):
        return spatial
    if isinstance(spatial, Layout):
        return build_weights(spatial)
    raise ConfigurationError("expected a Layout or WeightPair")


def initial_effects(p: int, config: FitConfig) -> SpatialEffects:
    eps = np.full((2, p, p), config.init_eps)
    return apply_restriction(eps, config.build_restriction(p), config.tau, config.mu_diag)


def run_gibbs(x: np.ndarray, spatial, config: FitConfig | None = None, seed: int | None = None,
              *, rng: np.random.Generator | None = None) -> Chain:
    """Sample the joint posterior of ``(psi_1, psi_2, theta)``.

    Parameters
    ----------
    x : (n, p) array
        Observations, one row per location.
    spatial : Layout or WeightPair
    config : FitConfig
        Prior, restriction, iteration counts and tuning.
    seed : int
        Seeds a fresh generator; ignored when ``rng`` is given.

    Raises
    ------
    SagraphError
        Any numerical or stability failure; the exception carries
        ``iteration`` and ``partial_chain`` attributes.
    """
    config = config or FitConfig()
    x = np.asarray(x, dtype=float)
    weights = _as_weights(spatial)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ConfigurationError(f"X must be (n, p) with n >= 2, got shape {x.shape}")
    n, p = x.shape
    if rng is None:
        if seed is None:
            raise ConfigurationError("run_gibbs needs a seed or a generator")
        rng = make_rng(seed)
    mh = config.mh_config()
    target = EffectsTarget(x, weights)

    effects = initial_effects(p, config)
    prec = PrecisionState.initial(p)
    ng = NgShrinkState.initial(p, config.kappa, config.b0, config.b1) if config.is_normal_gamma else None

    m = config.iterations - config.burn_in
    psi_draws = np.empty((m, 2, p, p))
    theta_draws = np.empty((m, p, p))
    xi_draws = np.empty(m)
    om_draws = np.empty(m) if ng is not None else None
    counts = MhCounts.zeros(p)
    stored = 0

    for it in range(1, config.iterations + 1):
        try:
            s = target.scatter(effects.stacked)
            prec = horseshoe_sweep(prec, s, n, rng, iteration=it)
            if config.refresh_every and it % config.refresh_every == 0:
                prec.sigma = np.linalg.inv(prec.theta)
                prec.sigma = 0.5 * (prec.sigma + prec.sigma.T)
            effects, c = mh_update_effects(effects, prec.theta, weights, x, mh, ng, rng,
                                           target=target, iteration=it)
            counts += c
            if ng is not None:
                ng = update_ng_shrinkage(effects, ng, rng)
        except SagraphError as exc:
            exc.iteration = it
            exc.partial_chain = Chain(psi_draws[:stored], theta_draws[:stored], xi_draws[:stored],
                                      None if om_draws is None else om_draws[:stored], config, seed,
                                      counts, it, config.burn_in)
            logger.error("sampler aborted at iteration %d: %s", it, exc)
            raise
        if it > config.burn_in:
            psi_draws[stored] = effects.stacked
            theta_draws[stored] = prec.theta
            xi_draws[stored] = prec.xi_sq
            if om_draws is not None:
                om_draws[stored] = ng.omega_sq
            stored += 1

    return Chain(psi_draws, theta_draws, xi_draws, om_draws, config, seed, counts,
                 config.iterations, config.burn_in)


@dataclass(frozen=True)
class PosteriorSummary:
    """Mean, median and quartiles; ``psi_*`` arrays are ``(2, p, p)``, ``theta_*`` ``(p, p)``."""

    psi_mean: np.ndarray
    psi_median: np.ndarray
    psi_q25: np.ndarray
    psi_q75: np.ndarray
    theta_mean: np.ndarray
    theta_median: np.ndarray
    theta_q25: np.ndarray
    theta_q75: np.ndarray


def posterior_summary(chain: Chain) -> PosteriorSummary:
    if chain.size == 0:
        raise DomainError("chain holds no post burn-in draws")
    stats = []
    for arr in (chain.psi, chain.theta):
        stats += [arr.mean(axis=0), np.median(arr, axis=0),
                  np.quantile(arr, 0.25, axis=0), np.quantile(arr, 0.75, axis=0)]
    return PosteriorSummary(*stats)


@dataclass(frozen=True)
class EdgeSelection:
    """Selected entries: ``within`` for the precision matrix (symmetric, false
    diagonal), ``between_1`` / ``between_2`` for ``psi_1`` / ``psi_2``."""

    within: np.ndarray
    between_1: np.ndarray
    between_2: np.ndarray

    @property
    def between(self) -> np.ndarray:
        return np.stack([self.between_1, self.between_2])


def _excludes_zero(draws: np.ndarray, level: float) -> np.ndarray:
    lo, hi = np.quantile(draws, [(1.0 - level) / 2.0, (1.0 + level) / 2.0], axis=0)
    return (lo > 0) | (hi < 0)


def select_edges(chain: Chain, level: float | None = None) -> EdgeSelection:
    """Select every entry whose central credible interval excludes zero."""
    if chain.size == 0:
        raise DomainError("chain holds no post burn-in draws")
    level = chain.config.level if level is None else level
    within = _excludes_zero(chain.theta, level)
    within = within & within.T
    np.fill_diagonal(within, False)
    between = _excludes_zero(chain.psi, level)
    return EdgeSelection(within, between[0], between[1])


def autocorrelation(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Sample autocorrelation at lags ``0..max_lag`` (FFT, biased normalization)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    d = x - x.mean()
    size = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(d, size)
    acov = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1] / n
    if acov[0] == 0:
        out = np.zeros(max_lag + 1)
        out[0] = 1.0
        return out
    out = acov / acov[0]
    out[0] = 1.0
    return out


def effective_sample_size(x: np.ndarray) -> tuple[float, bool]:
    """Geyer initial positive sequence estimate; returns ``(ess, degenerate)``.

    A constant chain is degenerate and reports its length.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if np.ptp(x) == 0:
        return float(n), True
    rho = autocorrelation(x, n - 1)
    total = 0.0
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        total += pair
    tau = -1.0 + 2.0 * total
    return float(n / max(tau, 1.0 / n)), False


@dataclass(frozen=True)
class Diagnostics:
    names: list[str]
    acf: np.ndarray  # (parameters, max_lag), lags 1..max_lag
    ess: np.ndarray
    degenerate: np.ndarray


def diagnostics(chain: Chain, max_lag: int = 50) -> Diagnostics:
    """ACF at lags ``1..max_lag`` and ESS for every stored parameter."""
    if chain.size < 100:
        raise DomainError(f"diagnostics need >= 100 post burn-in draws, got {chain.size}")
    names, table = _flatten(chain)
    acf = np.empty((table.shape[1], max_lag))
    ess = np.empty(table.shape[1])
    degenerate = np.zeros(table.shape[1], dtype=bool)
    for c in range(table.shape[1]):
        acf[c] = autocorrelation(table[:, c], max_lag)[1:]
        ess[c], degenerate[c] = effective_sample_size(table[:, c])
    return Diagnostics(names, acf, ess, degenerate)


def parameter_names(p: int, normal_gamma: bool) -> list[str]:
    idx = [(i, j) for i in range(1, p + 1) for j in range(1, p + 1)]
    names = [f"psi1_{i}_{j}" for i, j in idx] + [f"psi2_{i}_{j}" for i, j in idx]
    names += [f"theta_{i}_{j}" for i, j in idx] + ["xi_sq"]
    if normal_gamma:
        names.append("omega_sq")
    return names


def _flatten(chain: Chain) -> tuple[list[str], np.ndarray]:
    m, p = chain.size, chain.p
    cols = [chain.psi[:, 0].reshape(m, -1), chain.psi[:, 1].reshape(m, -1),
            chain.theta.reshape(m, -1), chain.xi_sq[:, None]]
    if chain.omega_sq is not None:
        cols.append(chain.omega_sq[:, None])
    return parameter_names(p, chain.omega_sq is not None), np.hstack(cols)


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def chain_metadata(chain: Chain) -> dict:
    cfg = chain.config.to_dict()
    return {
        "seed": chain.seed,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "model_hash": chain.config.model_hash(),
        "iterations": chain.iterations,
        "burn_in": chain.burn_in,
        "stored_draws": chain.size,
        "acceptance_rate": chain.acceptance_rate,
        "accepted": chain.counts.accepted.tolist(),
        "proposed": chain.counts.proposed.tolist(),
        "exhausted": chain.counts.exhausted.tolist(),
        "version": __version__,
    }


def write_chain(chain: Chain, path: str | Path) -> Path:
    """Write the chain CSV and its ``.meta.json`` sidecar; returns the sidecar path."""
    path = Path(path)
    names, table = _flatten(chain)
    with path.open("w") as fh:
        fh.write(",".join(names) + "\n")
        for row in table:
            fh.write(",".join("%.17g" % v for v in row) + "\n")
    side = sidecar_path(path)
    side.write_text(json.dumps(chain_metadata(chain), indent=2, sort_keys=True) + "\n")
    return side


def read_chain(path: str | Path) -> Chain:
    path = Path(path)
    side = sidecar_path(path)
    try:
        meta = json.loads(side.read_text())
        header = path.open().readline().strip().split(",")
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read chain {path}: {exc}") from exc
    config = FitConfig.from_dict(meta["config"])
    ng = header[-1] == "omega_sq"
    p = int(round(np.sqrt((len(header) - 1 - int(ng)) / 3)))
    if header != parameter_names(p, ng):
        raise ConfigurationError(f"{path}: unexpected chain header")
    if table.size == 0:
        table = np.empty((0, len(header)))
    m, pp = table.shape[0], p * p
    psi = np.stack([table[:, :pp].reshape(m, p, p), table[:, pp:2 * pp].reshape(m, p, p)], axis=1)
    theta = table[:, 2 * pp:3 * pp].reshape(m, p, p)
    counts = MhCounts(np.asarray(meta["proposed"], dtype=np.int64),
                      np.asarray(meta["accepted"], dtype=np.int64),
                      np.asarray(meta["exhausted"], dtype=np.int64))
    return Chain(psi, theta, table[:, 3 * pp].copy(), table[:, 3 * pp + 1].copy() if ng else None,
                 config, meta["seed"], counts, meta["iterations"], meta["burn_in"])
