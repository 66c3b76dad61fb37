"""Property-graph store: construction rules, label index, Dijkstra."""

import pytest

from graphopt.graph import (DanglingEndpointError, EmptyLabelsError,
                            FrozenGraphError, GraphError,
                            InvalidPropertyError, NegativeOrMissingWeight,
                            PropertyGraph)
from graphopt.rng import SeededRng
from tests.reference import bellman_ford


def two_node_graph():
    g = PropertyGraph()
    g.add_node({"Drug"}, {"name": "a"})
    g.add_node({"Gene"}, {"name": "b"})
    return g


def test_node_ids_dense_insertion_order():
    g = PropertyGraph()
    assert g.add_node({"A"}, {}) == 0
    assert g.add_node({"A"}, {}) == 1
    assert g.add_node({"B"}, {}) == 2


def test_edge_id_assignment():
    g = two_node_graph()
    assert g.add_edge(0, "TARGETS", 1, {}) == 0


def test_empty_labels_rejected():
    g = PropertyGraph()
    with pytest.raises(EmptyLabelsError):
        g.add_node(set(), {})


def test_dangling_endpoint_rejected():
    g = two_node_graph()
    with pytest.raises(DanglingEndpointError):
        g.add_edge(0, "X", 99, {})


def test_frozen_graph_rejects_mutation():
    g = two_node_graph()
    g.freeze()
    with pytest.raises(FrozenGraphError):
        g.add_node({"C"}, {})
    with pytest.raises(FrozenGraphError):
        g.add_edge(0, "T", 1, {})


def test_property_types():
    g = PropertyGraph()
    g.add_node({"A"}, {"s": "x", "i": 3, "f": 1.5, "b": True,
                       "xs": [1, 2, 3]})
    with pytest.raises(InvalidPropertyError):
        g.add_node({"A"}, {"bad": object()})
    with pytest.raises(InvalidPropertyError):
        g.add_node({"A"}, {"nested": [[1]]})


def test_label_index():
    g = PropertyGraph()
    g.add_node({"Drug"}, {})
    g.add_node({"Gene"}, {})
    g.add_node({"Drug"}, {})
    g.freeze()
    assert g.nodes_by_label("Drug") == [0, 2]
    assert g.nodes_by_label("Missing") == []


def test_label_index_large_sorted():
    g = PropertyGraph()
    for _ in range(100):
        g.add_node({"City"}, {})
    g.freeze()
    ids = g.nodes_by_label("City")
    assert len(ids) == 100
    assert ids == sorted(ids)


def test_label_index_consistency():
    # n in index(L) <=> L in labels(n), across a mixed-label graph
    g = PropertyGraph()
    rng = SeededRng(4)
    pool = ("A", "B", "C")
    for _ in range(60):
        labels = {pool[rng.integer(0, 3)] for _ in range(rng.integer(1, 4))}
        g.add_node(labels, {})
    g.freeze()
    for label in pool:
        members = set(g.nodes_by_label(label))
        for node in g.nodes:
            assert (node.id in members) == (label in node.labels)


def test_shortest_paths_requires_frozen():
    g = two_node_graph()
    with pytest.raises(GraphError):
        g.shortest_paths([0], "w", "T")


def test_shortest_paths_path_graph():
    g = PropertyGraph()
    for _ in range(3):
        g.add_node({"N"}, {})
    g.add_edge(0, "ROAD", 1, {"distance_km": 1.0})
    g.add_edge(1, "ROAD", 2, {"distance_km": 1.0})
    g.freeze()
    dist = g.shortest_paths([0], "distance_km", "ROAD")
    assert dist[(0, 2)] == 2.0
    assert dist[(0, 0)] == 0.0


def test_unreachable_pair_absent():
    g = PropertyGraph()
    for _ in range(6):
        g.add_node({"N"}, {})
    g.add_edge(0, "T", 1, {"w": 1.0})
    g.freeze()
    dist = g.shortest_paths([0], "w", "T")
    assert (0, 5) not in dist


def test_negative_weight_rejected():
    g = two_node_graph()
    g.add_edge(0, "T", 1, {"w": -1.0})
    g.freeze()
    with pytest.raises(NegativeOrMissingWeight):
        g.shortest_paths([0], "w", "T")


def test_missing_weight_rejected():
    g = two_node_graph()
    g.add_edge(0, "T", 1, {})
    g.freeze()
    with pytest.raises(NegativeOrMissingWeight):
        g.shortest_paths([0], "w", "T")


def _random_weighted_graph(rng, max_nodes=200):
    n = rng.integer(2, max_nodes + 1)
    g = PropertyGraph()
    for _ in range(n):
        g.add_node({"N"}, {})
    edges = []
    n_edges = rng.integer(n, 3 * n)
    for _ in range(n_edges):
        u = rng.integer(0, n)
        v = rng.integer(0, n)
        if u == v:
            continue
        w = round(rng.uniform(0.0, 10.0), 3)
        g.add_edge(u, "T", v, {"w": w})
        edges.append((u, v, w))
    g.freeze()
    return g, n, edges


def test_dijkstra_matches_bellman_ford_100_random_graphs():
    """Cross-validation against an independent Bellman-Ford on random
    weighted digraphs up to 200 nodes."""
    rng = SeededRng(2024)
    for trial in range(100):
        g, n, edges = _random_weighted_graph(rng)
        source = rng.integer(0, n)
        dist = g.shortest_paths([source], "w", "T")
        ref = bellman_ford(n, edges, source)
        mine = {node: d for (s, node), d in dist.items()}
        assert mine.keys() == ref.keys(), f"trial {trial}: reachability"
        for node, d in ref.items():
            assert mine[node] == pytest.approx(d, abs=1e-9), (
                f"trial {trial}, node {node}")


def test_multi_source_matches_per_source():
    rng = SeededRng(77)
    g, n, edges = _random_weighted_graph(rng, max_nodes=40)
    combined = g.shortest_paths([0, 1, 2], "w", "T")
    for s in (0, 1, 2):
        alone = g.shortest_paths([s], "w", "T")
        assert alone == {k: v for k, v in combined.items() if k[0] == s}
