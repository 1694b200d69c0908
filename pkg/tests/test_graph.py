import json

import numpy as np
import pydot
import pytest

from sagraph.exceptions import ConfigurationError, ShapeError
from sagraph.gibbs import EdgeSelection
from sagraph.graph import (
    NEGATIVE_COLOR,
    POSITIVE_COLOR,
    ChainGraph,
    DirectedEdge,
    Vertex,
    build_chain_graph,
    export_graph,
    import_graph,
)


def _example():
    """Zero patterns of a four-variable example: psi_{c1,c2}, psi_{c2,c1}, theta."""
    to_c2 = np.zeros((4, 4))
    to_c2[0, 0], to_c2[0, 3], to_c2[1, 2], to_c2[2, 3], to_c2[3, 3] = 0.5, -0.3, 0.4, 0.2, -0.6
    to_c1 = np.zeros((4, 4))
    to_c1[0, 1], to_c1[1, 1], to_c1[1, 3] = 0.7, -0.2, 0.3
    theta = np.eye(4) * 2
    for (i, j), v in {(0, 2): 0.4, (0, 3): -0.5, (1, 2): 0.3, (2, 3): -0.2}.items():
        theta[i, j] = theta[j, i] = v
    psi = np.stack([to_c1, to_c2])
    off = ~np.eye(4, dtype=bool)
    sel = EdgeSelection((theta != 0) & off, to_c1 != 0, to_c2 != 0)
    return theta, psi, sel


def test_example_edge_sets():
    g = build_chain_graph(*_example())
    assert {(e.i, e.j) for e in g.undirected_edges} == {(1, 3), (1, 4), (2, 3), (3, 4)}
    forward = {(e.source.variable, e.target.variable) for e in g.directed_edges if e.ordering == "c1->c2"}
    backward = {(e.source.variable, e.target.variable) for e in g.directed_edges if e.ordering == "c2->c1"}
    assert forward == {(1, 1), (1, 4), (2, 3), (3, 4), (4, 4)}
    assert backward == {(1, 2), (2, 2), (2, 4)}
    for e in g.directed_edges:
        src, dst = e.ordering.split("->")
        assert (e.source.category, e.target.category) == (src, dst)


def test_example_dot_edge_count_and_parse():
    text = export_graph(build_chain_graph(*_example()), "dot")
    graphs = pydot.graph_from_dot_data(text)
    assert len(graphs) == 1
    g = graphs[0]
    edges = list(g.get_edges())
    for sub in g.get_subgraphs():
        edges += sub.get_edges()
    # each within-location edge is drawn in both categories
    assert len(edges) == 2 * 4 + 5 + 3
    styles = [e.get("style") for e in edges]
    assert styles.count("dotted") == 8 and styles.count("dashed") == 5 and styles.count("solid") == 3
    assert {e.get("color").strip('"') for e in edges} <= {POSITIVE_COLOR, NEGATIVE_COLOR}


def test_empty_graph():
    sel = EdgeSelection(np.zeros((3, 3), bool), np.zeros((3, 3), bool), np.zeros((3, 3), bool))
    g = build_chain_graph(np.eye(3), np.zeros((2, 3, 3)), sel)
    assert not g.undirected_edges and not g.directed_edges and len(g.vertices) == 6
    text = export_graph(g, "dot")
    assert "->" not in text
    assert len(pydot.graph_from_dot_data(text)) == 1


def test_structured_round_trip():
    g = build_chain_graph(*_example(), categories=("maize", "bean"))
    text = export_graph(g, "structured")
    assert json.loads(text)["format"] == "spatial-chain-graph"
    assert import_graph(text) == g


def test_export_is_deterministic():
    a = export_graph(build_chain_graph(*_example()), "dot")
    b = export_graph(build_chain_graph(*_example()), "dot")
    assert a == b


def test_symmetric_within_selection():
    theta, psi, sel = _example()
    one_sided = EdgeSelection(np.triu(sel.within), sel.between_1, sel.between_2)
    g = build_chain_graph(theta, psi, one_sided)
    assert len(g.undirected_edges) == 4


def test_errors():
    theta, psi, sel = _example()
    with pytest.raises(ConfigurationError):
        export_graph(build_chain_graph(theta, psi, sel), "graphml")
    with pytest.raises(ShapeError):
        build_chain_graph(np.eye(3), psi, sel)
    with pytest.raises(ConfigurationError):
        import_graph('{"format": "other"}')
    with pytest.raises(ConfigurationError):
        ChainGraph(("c1", "c2"), 2, (), (DirectedEdge(Vertex(1, "c1"), Vertex(2, "c1"), 0.1, "c1->c1"),))
