"""In-memory property graph with label indices and weighted shortest paths.

Nodes and edges carry dense integer ids (insertion order) and typed
property maps.  A graph is mutable while being built; after ``freeze()``
it is immutable and safe to share across concurrent readers.  All query
and solve phases operate on frozen graphs only.

External string keys (site codes, country names, ...) are ordinary
properties; the dense ids enable array-backed adjacency and alignment
with candidate arrays.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

PropertyValue = Union[str, int, float, bool, list]

_SCALAR_TYPES = (str, bool, int, float)  # bool before int: bool is an int subclass


class GraphError(Exception):
    """Base class for property-graph errors."""


class FrozenGraphError(GraphError):
    """Mutation attempted on a frozen graph."""


class EmptyLabelsError(GraphError):
    """Node added without any label."""


class DanglingEndpointError(GraphError):
    """Edge endpoint does not refer to an existing node."""


class InvalidPropertyError(GraphError):
    """Property value outside the supported type set."""


class NegativeOrMissingWeight(GraphError):
    """Shortest-path weight property absent, non-numeric, or negative."""


def _check_property(name: str, value: PropertyValue) -> None:
    if isinstance(value, bool) or isinstance(value, (str, int)):
        return
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidPropertyError(f"property {name!r}: non-finite float {value!r}")
        return
    if isinstance(value, list):
        if not value:
            return
        first = value[0]
        if isinstance(first, list):
            raise InvalidPropertyError(f"property {name!r}: nested lists are not supported")
        # Homogeneous lists only; int/float may mix (numeric list).
        kind = bool if isinstance(first, bool) else type(first)
        for item in value:
            if isinstance(item, bool):
                ok = kind is bool
            elif kind in (int, float):
                ok = isinstance(item, (int, float)) and not isinstance(item, bool)
            else:
                ok = isinstance(item, kind)
            if not ok:
                raise InvalidPropertyError(f"property {name!r}: heterogeneous list")
            if isinstance(item, float) and not math.isfinite(item):
                raise InvalidPropertyError(f"property {name!r}: non-finite float in list")
        return
    raise InvalidPropertyError(f"property {name!r}: unsupported type {type(value).__name__}")


def _checked_properties(properties: Mapping[str, PropertyValue] | None) -> dict:
    props = dict(properties or {})
    for name, value in props.items():
        _check_property(name, value)
    return props


@dataclass(frozen=True)
class Node:
    id: int
    labels: frozenset[str]
    properties: dict


@dataclass(frozen=True)
class Edge:
    id: int
    type: str
    src: int
    dst: int
    properties: dict


@dataclass
class PropertyGraph:
    nodes: list[Node] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    _label_index: dict[str, list[int]] = field(default_factory=dict)
    _out_edges: dict[int, list[int]] = field(default_factory=dict)
    _frozen: bool = False

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _require_mutable(self) -> None:
        if self._frozen:
            raise FrozenGraphError("graph is frozen")

    def add_node(self, labels: Iterable[str], properties: Mapping[str, PropertyValue] | None = None) -> int:
        self._require_mutable()
        label_set = frozenset(labels)
        if not label_set:
            raise EmptyLabelsError("node needs at least one label")
        node_id = len(self.nodes)
        self.nodes.append(Node(node_id, label_set, _checked_properties(properties)))
        for label in label_set:
            self._label_index.setdefault(label, []).append(node_id)
        self._out_edges[node_id] = []
        return node_id

    def add_edge(self, src: int, type: str, dst: int, properties: Mapping[str, PropertyValue] | None = None) -> int:
        self._require_mutable()
        n = len(self.nodes)
        if not (0 <= src < n and 0 <= dst < n):
            raise DanglingEndpointError(f"edge {src}->{dst} references a missing node")
        edge_id = len(self.edges)
        self.edges.append(Edge(edge_id, type, src, dst, _checked_properties(properties)))
        self._out_edges[src].append(edge_id)
        return edge_id

    def freeze(self) -> "PropertyGraph":
        """Make the graph immutable; idempotent.  Returns self for chaining."""
        self._frozen = True
        return self

    def nodes_by_label(self, label: str) -> list[int]:
        """Node ids carrying the label, ascending.  Unknown label gives []."""
        if not self._frozen:
            raise GraphError("nodes_by_label requires a frozen graph")
        # Ids are appended in insertion order, so the index is already sorted.
        return list(self._label_index.get(label, ()))

    def out_edges(self, node_id: int) -> list[int]:
        return self._out_edges[node_id]

    def shortest_paths(
        self,
        sources: Iterable[int],
        weight_property: str,
        edge_type: str,
    ) -> dict[tuple[int, int], float]:
        """Exact Dijkstra distances from every source over one edge type.

        Returns {(source, node): distance} for reachable nodes only (each
        source reaches itself at 0.0).  Every edge of ``edge_type`` must
        carry ``weight_property`` as a finite non-negative number.
        """
        if not self._frozen:
            raise GraphError("shortest_paths requires a frozen graph")
        adjacency: dict[int, list[tuple[int, float]]] = {}
        for edge in self.edges:
            if edge.type != edge_type:
                continue
            weight = edge.properties.get(weight_property)
            if isinstance(weight, bool) or not isinstance(weight, (int, float)):
                raise NegativeOrMissingWeight(
                    f"edge {edge.id}: {weight_property!r} missing or non-numeric"
                )
            weight = float(weight)
            if not math.isfinite(weight) or weight < 0.0:
                raise NegativeOrMissingWeight(
                    f"edge {edge.id}: {weight_property!r} = {weight!r}"
                )
            adjacency.setdefault(edge.src, []).append((edge.dst, weight))

        distances: dict[tuple[int, int], float] = {}
        for source in sorted(set(sources)):
            best = {source: 0.0}
            heap = [(0.0, source)]
            done = set()
            while heap:
                dist, node = heapq.heappop(heap)
                if node in done:
                    continue
                done.add(node)
                distances[(source, node)] = dist
                for nxt, weight in adjacency.get(node, ()):
                    cand = dist + weight
                    if cand < best.get(nxt, math.inf):
                        best[nxt] = cand
                        heapq.heappush(heap, (cand, nxt))
        return distances
