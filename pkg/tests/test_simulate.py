import numpy as np
import pytest

from sagraph.dist import make_rng
from sagraph.exceptions import ConfigurationError, StabilityError
from sagraph.lattice import build_weights, paired_layout, strip_layout
from sagraph.params import KnownMask, Symmetric, Triangular, filter_matrix, \
    spatial_filter_apply, stability_check
from sagraph.simulate import (
    gen_data,
    gen_effects,
    gen_network,
    gen_precision,
    read_truth,
    simulate_dataset,
    write_truth,
)

from conftest import random_stable_psi


def _edges(a):
    return {(i + 1, j + 1) for i, j in zip(*np.nonzero(np.triu(a, 1)))}


def test_star_edges(rng):
    assert _edges(gen_network("star", 4, rng)) == {(1, 2), (1, 3), (1, 4)}


@pytest.mark.slow
def test_random_edge_count_mean():
    counts = [np.triu(gen_network("random", 20, make_rng(s))).sum() for s in range(10**4)]
    assert np.mean(counts) == pytest.approx(38, rel=0.02)


def test_scale_free_tree_properties():
    hubs = 0
    for s in range(500):
        a = gen_network("scale_free", 20, make_rng(s))
        assert np.triu(a).sum() == 19
        # connected: powers of (I + A) reach everything
        reach = np.linalg.matrix_power(np.eye(20, dtype=int) + a, 19)
        assert np.all(reach > 0)
        hubs += a.sum(axis=1).max() >= 4
    assert hubs >= 0.9 * 500


def test_unknown_network_kind(rng):
    with pytest.raises(ConfigurationError):
        gen_network("ring", 4, rng)


def test_precision_of_empty_graph_is_diagonal(rng):
    theta = gen_precision(np.zeros((5, 5), dtype=int), rng)
    assert np.array_equal(theta, np.diag(np.diag(theta))) and np.all(np.diag(theta) > 0)


def test_precision_spd_and_pattern():
    for s in range(1000):
        rng = make_rng(s)
        p = int(rng.integers(2, 12))
        adj = gen_network(["random", "scale_free", "star"][s % 3], p, rng, edge_prob=0.4)
        theta = gen_precision(adj, rng)
        assert np.linalg.eigvalsh(theta)[0] > 0
        d = np.sqrt(np.diag(theta))
        rho = -theta / np.outer(d, d)
        off = ~np.eye(p, dtype=bool)
        assert np.array_equal(rho[off] != 0, adj[off] != 0)


@pytest.mark.parametrize("restriction", [Symmetric(), Triangular(), Triangular("lower")])
def test_sparse_counts_per_triangle(rng, restriction):
    w = build_weights(strip_layout(30))
    for _ in range(20):
        eff = gen_effects(restriction, True, 4, 1e-3, rng, w)
        free = np.triu(np.ones((4, 4), dtype=bool), 1)
        if isinstance(restriction, Triangular) and restriction.orientation == "lower":
            free = free.T
        for m in (eff.psi_1, eff.psi_2):
            assert np.count_nonzero(m[free]) == 4 and np.count_nonzero(m[free] == 0) == 2


def test_diagonals_follow_tight_prior():
    w = build_weights(strip_layout(20))
    diag = []
    for s in range(2000):
        eff = gen_effects(Symmetric(), False, 4, 1e-3, make_rng(s), w)
        diag.append(np.r_[np.diag(eff.psi_1), np.diag(eff.psi_2)])
    diag = np.abs(np.array(diag))
    assert np.mean(diag < 4 * np.sqrt(1e-3)) >= 0.9999


def test_generated_effects_are_stable_and_restricted(rng):
    w = build_weights(strip_layout(25))
    for _ in range(50):
        eff = gen_effects(Symmetric(), False, 5, 1e-3, rng, w)
        assert stability_check(eff, w)
        assert np.array_equal(eff.psi_1, eff.psi_1.T) and np.array_equal(eff.psi_2, eff.psi_2.T)


def test_known_mask_entries_fixed_at_means(rng):
    p = 4
    recs = [(k, i, j, 0.05 * (i - j), 0.01) for k in (1, 2) for i in (1, 2) for j in range(1, 5)]
    km = KnownMask.from_records(p, recs)
    eff = gen_effects(km, True, p, 1e-3, rng, build_weights(strip_layout(20)))
    assert np.array_equal(eff.stacked[km.mask], km.means[km.mask])
    off_unknown = ~km.mask & ~np.eye(p, dtype=bool)
    assert np.count_nonzero(eff.stacked[off_unknown]) <= 2 * (3 * p * (p - 1)) // 4


def test_zero_effects_give_residuals(rng):
    w = build_weights(strip_layout(6))
    x, e = gen_data(np.zeros((2, 3, 3)), np.eye(3), w, 6, rng, return_residuals=True)
    assert np.array_equal(x, e)


def test_filter_recovers_residuals(rng):
    for _ in range(100):
        n, p = int(rng.integers(3, 15)), int(rng.integers(1, 5))
        w = build_weights(strip_layout(n))
        psi = random_stable_psi(rng, p, w, scale=0.8)
        a = rng.standard_normal((p, p))
        x, e = gen_data(psi, a @ a.T + np.eye(p), w, n, rng, return_residuals=True)
        assert np.max(np.abs(spatial_filter_apply(psi, w, x) - e)) < 1e-10


def test_data_covariance_matches_formula():
    w = build_weights(paired_layout(1))
    psi = np.array([[[0.3, -0.2], [0.1, 0.4]], [[-0.5, 0.2], [0.0, 0.3]]])
    theta = np.array([[2.0, 0.6], [0.6, 1.0]])
    rng = make_rng(17)
    draws = np.array([gen_data(psi, theta, w, 2, rng).reshape(-1, order="F") for _ in range(10**4)])
    r_inv = np.linalg.inv(filter_matrix(psi, w))
    oracle = r_inv @ np.kron(np.linalg.inv(theta), np.eye(2)) @ r_inv.T
    emp = draws.T @ draws / draws.shape[0]
    assert np.linalg.norm(emp - oracle) / np.linalg.norm(oracle) < 0.05


def test_gen_data_deterministic():
    w = build_weights(strip_layout(8))
    psi = 0.2 * np.ones((2, 2, 2))
    assert np.array_equal(gen_data(psi, np.eye(2), w, 8, make_rng(3)),
                          gen_data(psi, np.eye(2), w, 8, make_rng(3)))


def test_gen_data_rejects_unstable(rng, strip5):
    with pytest.raises(StabilityError):
        gen_data(np.stack([1.2 * np.diag([1.0, 0.0])] * 2), np.eye(2), strip5, 5, rng)


def test_truth_round_trip(tmp_path, rng):
    data = simulate_dataset(10, 3, "random", Symmetric(), False, rng)
    write_truth(tmp_path / "truth.json", data.effects, data.theta, seed=4)
    psi, theta, meta = read_truth(tmp_path / "truth.json")
    assert np.array_equal(psi, data.effects.stacked) and np.array_equal(theta, data.theta)
    assert meta == {"seed": 4}
