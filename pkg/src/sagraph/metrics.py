"""Discrepancy measures between ground truth and estimates."""

from __future__ import annotations

import numpy as np

from .exceptions import ShapeError

__all__ = ["frobenius", "rmse", "f1_counts", "f1"]


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def _stack(effects) -> np.ndarray:
    if hasattr(effects, "psi_1"):
        return np.stack([effects.psi_1, effects.psi_2])
    return np.asarray(effects, dtype=float)


def frobenius(theta_true, theta_hat) -> float:
    a, b = _pair(theta_true, theta_hat)
    return float(np.sqrt(np.sum((a - b) ** 2)))


def rmse(effects_true, effects_hat) -> float:
    """Root mean squared error over all ``2 p^2`` entries of both matrices."""
    a, b = _pair(_stack(effects_true), _stack(effects_hat))
    if a.ndim != 3 or a.shape[0] != 2:
        raise ShapeError(f"expected a (2, p, p) pair, got {a.shape}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def f1_counts(true_nonzero, selected, universe=None) -> tuple[int, int, int]:
    """``(TP, FP, FN)`` over the entries of ``universe`` (all entries if omitted).

    ``selected`` is a boolean array or an object with a ``between`` attribute.
    """
    sel = np.asarray(getattr(selected, "between", selected), dtype=bool)
    truth = np.asarray(true_nonzero, dtype=bool)
    if sel.shape != truth.shape:
        raise ShapeError(f"shape mismatch: {truth.shape} vs {sel.shape}")
    u = np.ones_like(truth) if universe is None else np.asarray(universe, dtype=bool)
    tp = int(np.sum(sel & truth & u))
    fp = int(np.sum(sel & ~truth & u))
    fn = int(np.sum(~sel & truth & u))
    return tp, fp, fn


def f1(true_nonzero, selected, universe=None) -> float:
    """F1 of the selected entries against the true nonzero pattern.

    With no discoveries the score is 0 if true nonzeros exist and 1 if the
    truth is empty too.
    """
    tp, fp, fn = f1_counts(true_nonzero, selected, universe)
    if tp + fp == 0:
        return 1.0 if fn == 0 else 0.0
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)
