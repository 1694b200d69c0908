"""Lattice layouts and the category-pair spatial weight matrices.

A layout is a set of locations ``1..n``, each carrying one of two category
labels, plus a symmetric neighbour relation. Spatial effects only travel
between neighbouring locations of *different* categories, so each layout
yields two weight matrices:

``w_21``
    effects of category ``c2`` onto ``c1`` locations (rows are ``c1``
    locations, columns their ``c2`` neighbours);
``w_12``
    effects of category ``c1`` onto ``c2`` locations.

Both are row-normalized adjacency matrices, so ``(w_21 @ X)[i]`` is the
average of ``X`` over the ``c2`` neighbours of location ``i``.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ConfigurationError, ShapeError

logger = logging.getLogger(__name__)

__all__ = [
    "Layout",
    "WeightPair",
    "build_adjacency",
    "row_normalize",
    "build_weights",
    "layout_from_grid",
    "strip_layout",
    "paired_layout",
    "disjoint_union",
    "read_layout",
    "write_layout",
]


@dataclass(frozen=True)
class Layout:
    """Locations with category labels and an undirected neighbour relation.

    ``categories[i - 1]`` is the label of location ``i``. Neighbour pairs are
    stored once, as 1-based ``(i, j)`` with ``i < j``.
    """

    categories: tuple[str, ...]
    neighbours: frozenset[tuple[int, int]]
    category_order: tuple[str, ...] = field(default=())

    def __post_init__(self):
        cats = tuple(str(c) for c in self.categories)
        object.__setattr__(self, "categories", cats)
        n = len(cats)
        pairs = set()
        for i, j in self.neighbours:
            i, j = int(i), int(j)
            if i == j:
                raise ConfigurationError(f"location {i} listed as its own neighbour")
            if not (1 <= i <= n and 1 <= j <= n):
                raise ConfigurationError(f"neighbour pair ({i}, {j}) outside 1..{n}")
            pairs.add((min(i, j), max(i, j)))
        object.__setattr__(self, "neighbours", frozenset(pairs))

        seen = list(dict.fromkeys(cats))
        order = tuple(self.category_order) or tuple(seen)
        if len(set(order)) != len(order) or not set(seen) <= set(order):
            raise ConfigurationError(f"category order {order} does not cover labels {seen}")
        if len(order) > 2:
            raise ConfigurationError(
                f"at most two categories per layout, got {len(order)}: {order}"
            )
        object.__setattr__(self, "category_order", order)

    @property
    def n(self) -> int:
        return len(self.categories)

    @property
    def c1(self) -> str:
        return self.category_order[0]

    @property
    def c2(self) -> str | None:
        return self.category_order[1] if len(self.category_order) > 1 else None

    def adjacency(self) -> np.ndarray:
        """Plain symmetric 0/1 neighbour matrix, ignoring categories."""
        a = np.zeros((self.n, self.n))
        for i, j in self.neighbours:
            a[i - 1, j - 1] = a[j - 1, i - 1] = 1.0
        return a

    def relabel(self, mapping: dict[str, str]) -> "Layout":
        cats = tuple(mapping.get(c, c) for c in self.categories)
        order = tuple(mapping.get(c, c) for c in self.category_order)
        return Layout(cats, self.neighbours, order)


@dataclass(frozen=True)
class WeightPair:
    """The two cross-category weight matrices of a layout."""

    w_21: np.ndarray
    w_12: np.ndarray

    def __post_init__(self):
        w21 = np.array(self.w_21, dtype=float)
        w12 = np.array(self.w_12, dtype=float)
        if w21.ndim != 2 or w21.shape[0] != w21.shape[1] or w21.shape != w12.shape:
            raise ShapeError(f"weight matrices must be equal square shapes, got {w21.shape}, {w12.shape}")
        w21.setflags(write=False)
        w12.setflags(write=False)
        object.__setattr__(self, "w_21", w21)
        object.__setattr__(self, "w_12", w12)

    @property
    def n(self) -> int:
        return self.w_21.shape[0]

    def __iter__(self):
        yield self.w_21
        yield self.w_12

    @cached_property
    def bipartite(self) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
        """Cross-block split used for the cheap spectrum of the spatial filter.

        Returns ``(rows_1, rows_2, mu)`` where ``rows_1`` are the locations that
        receive effects through ``w_21``, ``rows_2`` the remaining ones, and
        ``mu`` the eigenvalues of ``w_21[rows_1, rows_2] @ w_12[rows_2, rows_1]``.
        ``None`` when the matrices do not have the two-category block form
        (possible only for hand-supplied weights).
        """
        w21, w12 = self.w_21, self.w_12
        side1 = (w21 != 0).any(axis=1) | (w12 != 0).any(axis=0)
        side2 = (w21 != 0).any(axis=0) | (w12 != 0).any(axis=1)
        if np.any(side1 & side2):
            return None
        rows_1 = np.flatnonzero(~side2)
        rows_2 = np.flatnonzero(side2)
        if rows_1.size == 0 or rows_2.size == 0:
            mu = np.zeros(0, dtype=complex)
        else:
            b = w21[np.ix_(rows_1, rows_2)]
            c = w12[np.ix_(rows_2, rows_1)]
            mu = np.linalg.eigvals(b @ c).astype(complex)
        # zero modes contribute nothing to the spectrum or the determinant
        mu = mu[np.abs(mu) > 1e-14]
        return rows_1, rows_2, mu


def _check_labels(layout: Layout, *labels: str) -> None:
    for lab in labels:
        if lab not in layout.category_order:
            raise ConfigurationError(
                f"unknown category label {lab!r}; layout has {layout.category_order}"
            )


def build_adjacency(layout: Layout, from_cat: str, to_cat: str) -> np.ndarray:
    """0/1 matrix with ``a[i, j] = 1`` iff ``i`` is ``to_cat``, ``j`` is
    ``from_cat`` and the two are neighbours (1-based ids map to 0-based rows)."""
    if from_cat == to_cat:
        raise ConfigurationError("within-category spatial effects are not modeled")
    _check_labels(layout, from_cat, to_cat)
    cats = np.asarray(layout.categories)
    mask = np.outer(cats == to_cat, cats == from_cat)
    return layout.adjacency() * mask


def row_normalize(a: np.ndarray) -> np.ndarray:
    """Divide each nonzero row by its count of nonzero entries."""
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ConfigurationError("adjacency entries must be nonnegative")
    counts = np.count_nonzero(a, axis=1).astype(float)
    out = np.zeros_like(a)
    rows = counts > 0
    out[rows] = a[rows] / counts[rows, None]
    return out


def build_weights(layout: Layout) -> WeightPair:
    """Row-normalized ``(w_21, w_12)`` for a layout.

    With a single category present both matrices are zero.
    """
    if layout.c2 is None:
        z = np.zeros((layout.n, layout.n))
        return WeightPair(z, z.copy())
    c1, c2 = layout.c1, layout.c2
    return WeightPair(
        row_normalize(build_adjacency(layout, c2, c1)),
        row_normalize(build_adjacency(layout, c1, c2)),
    )


def layout_from_grid(grid: Sequence[Sequence[str]], category_order: Sequence[str] = ()) -> Layout:
    """Layout from a rectangular grid of labels with 4-neighbour adjacency.

    Locations are numbered row by row starting at 1.
    """
    rows = [list(r) for r in grid]
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ConfigurationError("grid must be rectangular and non-empty")
    nr, nc = len(rows), len(rows[0])
    cats = [str(c) for r in rows for c in r]
    pairs = set()
    for r in range(nr):
        for c in range(nc):
            k = r * nc + c + 1
            if c + 1 < nc:
                pairs.add((k, k + 1))
            if r + 1 < nr:
                pairs.add((k, k + nc))
    return Layout(tuple(cats), frozenset(pairs), tuple(category_order))


def strip_layout(n: int, labels: tuple[str, str] = ("c1", "c2")) -> Layout:
    """Alternating ``c1, c2, c1, ...`` chain of ``n`` locations."""
    if n < 1:
        raise ConfigurationError("strip needs at least one location")
    cats = tuple(labels[i % 2] for i in range(n))
    order = labels if n > 1 else labels[:1]
    return Layout(cats, frozenset((i, i + 1) for i in range(1, n)), order)


def paired_layout(n_pairs: int, labels: tuple[str, str] = ("c1", "c2"),
                  flipped: Iterable[int] = ()) -> Layout:
    """Isolated two-plot pairs; each location has one cross-category neighbour.

    Pair ``k`` occupies locations ``2k+1, 2k+2``; pairs listed in ``flipped``
    put ``labels[1]`` first.
    """
    flipped = set(flipped)
    cats = []
    for k in range(n_pairs):
        a, b = labels if k not in flipped else labels[::-1]
        cats += [a, b]
    pairs = frozenset((2 * k + 1, 2 * k + 2) for k in range(n_pairs))
    return Layout(tuple(cats), pairs, labels)


def disjoint_union(first: Layout, second: Layout) -> Layout:
    """Place two layouts side by side with no neighbours between them."""
    if set(second.category_order) - set(first.category_order):
        order = first.category_order + tuple(
            c for c in second.category_order if c not in first.category_order
        )
    else:
        order = first.category_order
    shift = first.n
    pairs = set(first.neighbours) | {(i + shift, j + shift) for i, j in second.neighbours}
    return Layout(first.categories + second.categories, frozenset(pairs), order)


def read_layout(path: str | Path) -> Layout:
    """Read a ``id,category,neighbours`` file.

    ``neighbours`` is a semicolon-separated id list. Asymmetric input is
    symmetrized with a warning.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["id", "category", "neighbours"]:
            raise ConfigurationError(f"{path}: header must be 'id,category,neighbours'")
        records = []
        for row in reader:
            try:
                lid = int(row["id"])
                nbrs = [int(x) for x in (row["neighbours"] or "").split(";") if x.strip()]
            except ValueError as exc:
                raise ConfigurationError(f"{path}: bad record {row}") from exc
            records.append((lid, row["category"].strip(), nbrs))
    records.sort()
    ids = [r[0] for r in records]
    if ids != list(range(1, len(ids) + 1)):
        raise ConfigurationError(f"{path}: ids must be exactly 1..n, each once")
    directed = {(i, j) for i, _, nbrs in records for j in nbrs}
    if any((j, i) not in directed for i, j in directed):
        logger.warning("%s: neighbour relation was asymmetric; symmetrized", path)
    cats = tuple(r[1] for r in records)
    return Layout(cats, frozenset(directed))


def write_layout(layout: Layout, path: str | Path) -> None:
    nbrs: dict[int, list[int]] = {i: [] for i in range(1, layout.n + 1)}
    for i, j in sorted(layout.neighbours):
        nbrs[i].append(j)
        nbrs[j].append(i)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "category", "neighbours"])
        for i in range(1, layout.n + 1):
            w.writerow([i, layout.categories[i - 1], ";".join(map(str, sorted(nbrs[i])))])
