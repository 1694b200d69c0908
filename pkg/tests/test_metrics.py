import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from sagraph.exceptions import ShapeError
from sagraph.gibbs import EdgeSelection
from sagraph.metrics import f1, f1_counts, frobenius, rmse


def test_frobenius_examples(rng):
    assert frobenius(np.eye(3), np.eye(3)) == 0.0
    assert frobenius(np.eye(2), np.zeros((2, 2))) == pytest.approx(math.sqrt(2), abs=1e-15)
    a, b = rng.standard_normal((2, 4, 4))
    total = 0.0
    for i in range(4):
        for j in range(4):
            total += (a[i, j] - b[i, j]) ** 2
    assert frobenius(a, b) == pytest.approx(math.sqrt(total), abs=1e-12)


def test_rmse_examples(rng):
    z = np.zeros((2, 2, 2))
    assert rmse(z, z) == 0.0
    d = z.copy()
    d[1, 0, 1] = 0.4
    assert rmse(z, d) == pytest.approx(math.sqrt(0.16 / 8), abs=1e-15)
    a, b = rng.standard_normal((2, 2, 3, 3))
    total = sum((a[k, i, j] - b[k, i, j]) ** 2 for k in range(2) for i in range(3) for j in range(3))
    assert rmse(a, b) == pytest.approx(math.sqrt(total / 18), abs=1e-12)


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        frobenius(np.eye(2), np.eye(3))
    with pytest.raises(ShapeError):
        rmse(np.zeros((2, 2, 2)), np.zeros((2, 3, 3)))
    with pytest.raises(ShapeError):
        f1(np.zeros((2, 2, 2), bool), np.zeros((2, 3, 3), bool))


def test_f1_conventions():
    truth = np.zeros((2, 2, 2), bool)
    truth[0, 0, 1] = truth[1, 1, 0] = True
    assert f1(truth, truth) == 1.0
    assert f1(truth, np.zeros_like(truth)) == 0.0
    assert f1(np.zeros_like(truth), np.zeros_like(truth)) == 1.0


def test_f1_three_true_two_found():
    truth = np.zeros((2, 3, 3), bool)
    truth[0, 0, 1] = truth[0, 1, 2] = truth[1, 2, 0] = True
    sel = np.zeros_like(truth)
    sel[0, 0, 1] = sel[1, 2, 0] = True
    assert f1_counts(truth, sel) == (2, 0, 1)
    assert f1(truth, sel) == pytest.approx(0.8, abs=1e-15)


def test_f1_accepts_edge_selection_and_universe():
    truth = np.ones((2, 2, 2), bool)
    sel = EdgeSelection(np.zeros((2, 2), bool), np.eye(2, dtype=bool), np.zeros((2, 2), bool))
    universe = np.zeros((2, 2, 2), bool)
    universe[0] = np.eye(2, dtype=bool)
    assert f1(truth, sel, universe) == 1.0
    assert f1(truth, sel) == pytest.approx(2 * 0.25 / 1.25)


masks = arrays(bool, (2, 4, 4))


@settings(max_examples=100, deadline=None)
@given(masks, masks, st.permutations(range(4)))
def test_f1_invariant_under_relabeling(truth, sel, perm):
    perm = np.array(perm)
    pt = truth[:, perm][:, :, perm]
    ps = sel[:, perm][:, :, perm]
    assert f1(pt, ps) == f1(truth, sel)
    assert 0.0 <= f1(truth, sel) <= 1.0


@settings(max_examples=100, deadline=None)
@given(arrays(float, (2, 2, 4, 4), elements=st.floats(-5, 5)), st.permutations(range(4)))
def test_errors_invariant_under_permutation(pair, perm):
    perm = np.array(perm)
    a, b = pair
    pa, pb = a[:, perm][:, :, perm], b[:, perm][:, :, perm]
    assert rmse(pa, pb) == pytest.approx(rmse(a, b), abs=1e-12)
    assert frobenius(pa[0], pb[0]) == pytest.approx(frobenius(a[0], b[0]), abs=1e-12)
