import math

import numpy as np
import pytest
from scipy import stats

from sagraph.config import FitConfig
from sagraph.dist import make_rng
from sagraph.exceptions import StabilityProposalError
from sagraph.gibbs import run_gibbs
from sagraph.lattice import build_weights, paired_layout, strip_layout
from sagraph.params import NgShrinkState, Symmetric, Triangular, apply_restriction, stability_check
from sagraph.simulate import simulate_dataset
from sagraph.spatial_mh import (
    EffectsTarget,
    MhConfig,
    NormalGammaPrior,
    NormalPrior,
    draw_omega_sq,
    element_log_prior,
    mh_update_effects,
    omega_sq_conditional,
    update_ng_shrinkage,
)
from sagraph.likelihood import log_det_filter, scatter_matrix

from conftest import random_stable_psi


def _chain(effects, theta, weights, x, cfg, rng, iterations, ng=None):
    target = EffectsTarget(x, weights)
    out = []
    for t in range(iterations):
        effects, _ = mh_update_effects(effects, theta, weights, x, cfg, ng, rng, target=target,
                                       iteration=t)
        out.append(effects.stacked)
    return np.array(out)


def _problem(rng, n=40, p=3):
    w = build_weights(strip_layout(n))
    x = rng.standard_normal((n, p))
    return w, x


def test_target_scatter_matches_direct(rng):
    w, x = _problem(rng)
    psi = random_stable_psi(rng, 3, w)
    target = EffectsTarget(x, w)
    assert np.allclose(target.scatter(psi), scatter_matrix(x, w, psi), atol=1e-10)
    ok, logdet = target.filter_terms(psi)
    assert ok and logdet == pytest.approx(log_det_filter(psi, w, method="dense")[1], abs=1e-10)


def test_same_seed_same_trajectory(rng):
    w, x = _problem(rng)
    eff = apply_restriction(np.zeros((2, 3, 3)), Symmetric(), tau=0.1)
    cfg = MhConfig(0.1, NormalPrior())
    a = _chain(eff, np.eye(3), w, x, cfg, make_rng(5), 30)
    b = _chain(eff, np.eye(3), w, x, cfg, make_rng(5), 30)
    assert np.array_equal(a, b)


def test_symmetric_draws_stay_symmetric(rng):
    w, x = _problem(rng)
    eff = apply_restriction(np.zeros((2, 3, 3)), Symmetric(), tau=0.1)
    draws = _chain(eff, np.eye(3), w, x, MhConfig(0.2, NormalPrior()), rng, 200)
    assert np.array_equal(draws, np.transpose(draws, (0, 1, 3, 2)))


@pytest.mark.slow
def test_no_unstable_draw_in_long_run(rng):
    w = build_weights(strip_layout(10))
    x = 3 * rng.standard_normal((10, 2))
    eff = apply_restriction(np.zeros((2, 2, 2)), Triangular(), tau=1.0)
    draws = _chain(eff, np.eye(2), w, x, MhConfig(0.5, NormalPrior(0, 3)), rng, 10**4)
    assert all(stability_check(d, w) for d in draws)


@pytest.mark.slow
def test_tight_prior_pins_diagonals(rng):
    w, x = _problem(rng, n=50)
    eff = apply_restriction(np.zeros((2, 3, 3)), Symmetric(), tau=1e-6)
    draws = _chain(eff, np.eye(3), w, x, MhConfig(0.1, NormalPrior()), rng, 2000)
    diag = np.diagonal(draws, axis1=2, axis2=3).mean(axis=0)
    assert np.all(np.abs(diag) < 0.03)


def test_greedy_rule_never_lowers_target(rng):
    w, x = _problem(rng)
    eff = apply_restriction(np.zeros((2, 3, 3)), Symmetric(), tau=0.1)
    cfg = MhConfig(0.1, NormalPrior(), greedy=True)
    target = EffectsTarget(x, w)

    def log_post(e):
        psi = e.stacked
        lp = sum(element_log_prior(e, k, i, j, psi[k, i, j], cfg.prior)
                 for k, i, j in zip(*np.nonzero(e.parameter_mask())))
        return target.filter_terms(psi)[1] - 0.5 * np.trace(target.scatter(psi)) + lp

    prev = log_post(eff)
    for _ in range(20):
        eff, _ = mh_update_effects(eff, np.eye(3), w, x, cfg, None, rng, target=target)
        cur = log_post(eff)
        assert cur >= prev - 1e-9
        prev = cur


def test_exhausted_redraws_skip_or_raise(rng):
    w = build_weights(paired_layout(3))
    x = rng.standard_normal((6, 1))
    eff = apply_restriction(np.full((2, 1, 1), 0.5), Symmetric(), tau=1.0)
    target = EffectsTarget(x, w)
    current = target.filter_terms(eff.stacked)
    # every proposal is declared unstable; the current state is not
    target.filter_terms = lambda psi: current if np.array_equal(psi, eff.stacked) else (False, math.nan)
    cfg = MhConfig(0.1, NormalPrior(), max_redraws=3)
    out, counts = mh_update_effects(eff, np.eye(1), w, x, cfg, None, rng, target=target)
    assert counts.exhausted.sum() == 2 and counts.proposed.sum() == 0
    assert np.array_equal(out.stacked, eff.stacked)
    with pytest.raises(StabilityProposalError) as info:
        mh_update_effects(eff, np.eye(1), w, x, MhConfig(0.1, NormalPrior(), 3, raise_on_exhausted=True),
                          None, rng, target=target)
    assert info.value.element == (1, 1, 1)


@pytest.mark.slow
def test_toy_posterior_matches_quadrature():
    """p = 1, n = 2: the joint posterior of (psi_1, psi_2) on a fine grid."""
    w = build_weights(paired_layout(1))
    x = np.array([[0.8], [-0.5]])
    eff = apply_restriction(np.zeros((2, 1, 1)), Symmetric(), tau=1.0)
    draws = _chain(eff, np.eye(1), w, x, MhConfig(0.8, NormalPrior()), make_rng(21), 200_000)
    a = draws[:, 0, 0, 0]

    g = np.linspace(-6, 6, 1201)
    p1, p2 = np.meshgrid(g, g, indexing="ij")
    # w_21 X and w_12 X swap the two rows
    r0 = x[0, 0] - p1 * x[1, 0]
    r1 = x[1, 0] - p2 * x[0, 0]
    # the stable set: eigenvalues +-sqrt(psi_1 psi_2) need real parts inside (-1, 1)
    stable = p1 * p2 < 1
    logpost = np.log(np.abs(1 - np.where(stable, p1 * p2, 0.0))) - 0.5 * (r0**2 + r1**2) \
        - 0.5 * (p1**2 + p2**2)
    dens = np.where(stable, np.exp(logpost - logpost.max()), 0.0)
    marginal = dens.sum(axis=1)

    edges = np.linspace(-3, 3, 31)
    centre_bin = np.digitize(g, edges) - 1
    expected = np.array([marginal[centre_bin == b].sum() for b in range(30)])
    expected /= expected.sum()
    observed, _ = np.histogram(a, edges)
    observed = observed / observed.sum()
    assert 0.5 * np.abs(observed - expected).sum() < 0.02


def test_omega_shape_for_four_variables():
    shape, _ = omega_sq_conditional(np.ones((2, 4, 4)), 0.1, 0.01, 0.01)
    assert shape == pytest.approx(3.21, abs=1e-12)


def test_omega_mean_with_frozen_alpha(rng):
    alpha = rng.uniform(0.5, 2.0, (2, 4, 4))
    ng = NgShrinkState(alpha, 1.0, 0.1, 0.01, 0.01)
    draws = np.array([draw_omega_sq(alpha, ng, rng) for _ in range(10**5)])
    shape, rate = 0.01 + 0.1 * 32, 0.01 + 0.05 * alpha.sum()
    assert draws.mean() == pytest.approx(shape / rate, rel=0.01)


def test_zero_effects_give_finite_alphas(rng):
    eff = apply_restriction(np.zeros((2, 4, 4)), Triangular())
    ng = NgShrinkState.initial(4, kappa=0.1)
    for _ in range(50):
        ng = update_ng_shrinkage(eff, ng, rng)
        assert np.all(np.isfinite(ng.alpha)) and np.all(ng.alpha > 0)
        assert np.isfinite(ng.omega_sq) and ng.omega_sq > 0


def test_normal_gamma_prior_uses_alpha():
    eff = apply_restriction(np.zeros((2, 2, 2)), Triangular())
    ng = NgShrinkState(np.full((2, 2, 2), 4.0))
    lp = element_log_prior(eff, 0, 0, 1, 1.0, NormalGammaPrior(), ng)
    assert lp == pytest.approx(stats.norm(0, 2.0).logpdf(1.0))


def test_acceptance_rate_on_simulation_setting():
    data = simulate_dataset(100, 4, "random", Symmetric(), sparse=False, rng=make_rng(8))
    chain = run_gibbs(data.x, data.weights, FitConfig(iterations=300, burn_in=100), seed=9)
    assert 0.05 < chain.acceptance_rate < 0.95
