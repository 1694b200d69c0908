"""Spatial chain graph: within-location undirected edges plus directed
cross-category edges, and its dot / JSON export.

Vertex ``(i, c)`` is variable ``i`` (1-based) at a location of category
``c``. ``psi_2`` carries effects of ``c1`` variables onto ``c2`` locations,
so a selected ``psi_2[i, j]`` is the edge ``(i, c1) -> (j, c2)``; a selected
``psi_1[i, j]`` is ``(i, c2) -> (j, c1)``. Directed edges may join the same
variable index since the two vertices differ in category.

Structured export schema (JSON)::

    {
      "format": "spatial-chain-graph", "version": 1,
      "categories": ["c1", "c2"], "p": 4,
      "vertices": [{"variable": 1, "category": "c1"}, ...],
      "undirected_edges": [{"i": 1, "j": 3, "weight": -0.31}, ...],
      "directed_edges": [{"source": {"variable": 1, "category": "c1"},
                          "target": {"variable": 4, "category": "c2"},
                          "weight": 0.52, "ordering": "c1->c2"}, ...]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, ShapeError

__all__ = ["Vertex", "UndirectedEdge", "DirectedEdge", "ChainGraph", "build_chain_graph",
           "export_graph", "import_graph"]

FORMAT_NAME = "spatial-chain-graph"
POSITIVE_COLOR = "#1a9850"
NEGATIVE_COLOR = "#d73027"


@dataclass(frozen=True, order=True)
class Vertex:
    variable: int
    category: str


@dataclass(frozen=True, order=True)
class UndirectedEdge:
    i: int
    j: int
    weight: float


@dataclass(frozen=True, order=True)
class DirectedEdge:
    source: Vertex
    target: Vertex
    weight: float
    ordering: str


@dataclass(frozen=True)
class ChainGraph:
    categories: tuple[str, str]
    p: int
    undirected_edges: tuple[UndirectedEdge, ...]
    directed_edges: tuple[DirectedEdge, ...]

    def __post_init__(self):
        for e in self.undirected_edges:
            if not (1 <= e.i < e.j <= self.p):
                raise ConfigurationError(f"undirected edge ({e.i}, {e.j}) must satisfy 1 <= i < j <= p")
        for e in self.directed_edges:
            if e.source.category == e.target.category:
                raise ConfigurationError("directed edges must join different categories")
        object.__setattr__(self, "undirected_edges", tuple(sorted(self.undirected_edges)))
        object.__setattr__(self, "directed_edges",
                           tuple(sorted(self.directed_edges, key=_directed_key(self.categories))))

    @property
    def vertices(self) -> tuple[Vertex, ...]:
        return tuple(Vertex(i, c) for c in self.categories for i in range(1, self.p + 1))


def _directed_key(categories):
    rank = {c: k for k, c in enumerate(categories)}

    def key(e: DirectedEdge):
        return (rank[e.source.category], e.source.variable, rank[e.target.category], e.target.variable)

    return key


def build_chain_graph(theta_hat, effects_hat, selection,
                      categories: tuple[str, str] = ("c1", "c2")) -> ChainGraph:
    """Edges from an edge selection, weighted by the point estimates.

    Parameters
    ----------
    theta_hat : (p, p) array
    effects_hat : SpatialEffects or (2, p, p) array
        ``(psi_1, psi_2)`` estimates.
    selection : EdgeSelection
    """
    theta = np.asarray(theta_hat, dtype=float)
    psi = np.stack([effects_hat.psi_1, effects_hat.psi_2]) if hasattr(effects_hat, "psi_1") \
        else np.asarray(effects_hat, dtype=float)
    p = theta.shape[0]
    within = np.asarray(selection.within, dtype=bool)
    between = [np.asarray(selection.between_1, dtype=bool), np.asarray(selection.between_2, dtype=bool)]
    if within.shape != (p, p) or psi.shape != (2, p, p) or any(b.shape != (p, p) for b in between):
        raise ShapeError("selection and estimate shapes do not match")
    c1, c2 = categories
    und = [UndirectedEdge(int(i) + 1, int(j) + 1, float(theta[i, j]))
           for i, j in zip(*np.nonzero(np.triu(within | within.T, 1)))]
    directed = []
    for k, (src, dst) in enumerate([(c2, c1), (c1, c2)]):
        for i, j in zip(*np.nonzero(between[k])):
            directed.append(DirectedEdge(Vertex(int(i) + 1, src), Vertex(int(j) + 1, dst),
                                         float(psi[k, i, j]), f"{src}->{dst}"))
    return ChainGraph((c1, c2), p, tuple(und), tuple(directed))


def _node_id(v: Vertex) -> str:
    return json.dumps(f"{v.variable}:{v.category}")


def _color(w: float) -> str:
    return POSITIVE_COLOR if w >= 0 else NEGATIVE_COLOR


def _to_dot(g: ChainGraph) -> str:
    c1, c2 = g.categories
    lines = ["digraph spatial_chain_graph {", "  node [shape=circle];"]
    for c in g.categories:
        lines.append(f"  subgraph {json.dumps('cluster_' + c)} {{")
        lines.append(f"    label={json.dumps(c)};")
        for i in range(1, g.p + 1):
            lines.append(f"    {_node_id(Vertex(i, c))} [label=\"{i}\"];")
        lines.append("  }")
    # within-location edges hold at every location, so they appear in both categories
    for c in g.categories:
        for e in g.undirected_edges:
            lines.append(
                f"  {_node_id(Vertex(e.i, c))} -> {_node_id(Vertex(e.j, c))} "
                f"[dir=none, style=dotted, color=\"{_color(e.weight)}\", tooltip=\"{e.weight:.6g}\"];"
            )
    for e in g.directed_edges:
        style = "dashed" if (e.source.category, e.target.category) == (c1, c2) else "solid"
        lines.append(
            f"  {_node_id(e.source)} -> {_node_id(e.target)} "
            f"[style={style}, color=\"{_color(e.weight)}\", tooltip=\"{e.weight:.6g}\"];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _to_structured(g: ChainGraph) -> str:
    doc = {
        "format": FORMAT_NAME,
        "version": 1,
        "categories": list(g.categories),
        "p": g.p,
        "vertices": [{"variable": v.variable, "category": v.category} for v in g.vertices],
        "undirected_edges": [{"i": e.i, "j": e.j, "weight": e.weight} for e in g.undirected_edges],
        "directed_edges": [
            {"source": {"variable": e.source.variable, "category": e.source.category},
             "target": {"variable": e.target.variable, "category": e.target.category},
             "weight": e.weight, "ordering": e.ordering}
            for e in g.directed_edges
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def export_graph(graph: ChainGraph, fmt: str = "dot") -> str:
    """Serialize as ``"dot"`` or ``"structured"`` (JSON, schema in the module docstring)."""
    if fmt == "dot":
        return _to_dot(graph)
    if fmt == "structured":
        return _to_structured(graph)
    raise ConfigurationError(f"unknown graph format {fmt!r}; use 'dot' or 'structured'")


def import_graph(text: str) -> ChainGraph:
    """Inverse of the structured export."""
    try:
        doc = json.loads(text)
        if doc.get("format") != FORMAT_NAME:
            raise ConfigurationError("not a structured chain-graph document")
        und = [UndirectedEdge(int(e["i"]), int(e["j"]), float(e["weight"])) for e in doc["undirected_edges"]]
        directed = [
            DirectedEdge(Vertex(int(e["source"]["variable"]), e["source"]["category"]),
                         Vertex(int(e["target"]["variable"]), e["target"]["category"]),
                         float(e["weight"]), e["ordering"])
            for e in doc["directed_edges"]
        ]
        return ChainGraph(tuple(doc["categories"]), int(doc["p"]), tuple(und), tuple(directed))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed chain-graph document: {exc}") from exc
