"""Tanner graph girth and degree statistics."""

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Literal

import networkx as nx
import numpy as np
import numpy.typing as npt

from gqla.core._code import ParityCheckMatrix

NodeKind = Literal["vn", "cn"]
Node = tuple[NodeKind, int]


def _as_matrix(h: ParityCheckMatrix | npt.ArrayLike) -> npt.NDArray[np.uint8]:
    if isinstance(h, ParityCheckMatrix):
        return h.full
    return np.atleast_2d(np.asarray(h, dtype=np.uint8))


@dataclass(frozen=True)
class TannerGraph:
    """Bipartite graph with an edge (c, v) for every H[c, v] = 1."""

    graph: nx.Graph
    n: int
    m: int

    @classmethod
    def from_matrix(cls, h: ParityCheckMatrix | npt.ArrayLike) -> "TannerGraph":
        """Build the graph of a full parity check matrix."""
        matrix = _as_matrix(h)
        m, n = matrix.shape
        graph = nx.Graph()
        graph.add_nodes_from((("vn", v) for v in range(n)), bipartite=0)
        graph.add_nodes_from((("cn", c) for c in range(m)), bipartite=1)
        graph.add_edges_from(
            (("cn", int(c)), ("vn", int(v))) for c, v in np.argwhere(matrix)
        )
        return cls(graph, n, m)

    def nodes(self, kind: NodeKind) -> list[Node]:
        """All nodes of one class, in index order."""
        count = self.n if kind == "vn" else self.m
        return [(kind, i) for i in range(count)]


def node_girth(graph: TannerGraph, node: Node) -> int | None:
    """Length of the shortest cycle through `node`, None if there is none.

    Breadth-first search from the node, labelling every vertex with the
    neighbour of the root it descends from. An edge joining two different
    labels closes a cycle through the root of length depth(u) + depth(w) + 1.
    """
    adjacency = graph.graph.adj
    depth: dict[Node, int] = {}
    branch: dict[Node, Node] = {}
    queue: deque[Node] = deque()
    for first in adjacency[node]:
        depth[first] = 1
        branch[first] = first
        queue.append(first)

    best: int | None = None
    while queue:
        u = queue.popleft()
        # closures found from here on are at least 2 * depth(u) long
        if best is not None and 2 * depth[u] >= best:
            break
        for w in adjacency[u]:
            if w == node:
                continue
            if w not in depth:
                depth[w] = depth[u] + 1
                branch[w] = branch[u]
                queue.append(w)
            elif branch[w] != branch[u]:
                length = depth[u] + depth[w] + 1
                best = length if best is None else min(best, length)
    return best


@dataclass
class GirthHistogram:
    """Node girth counts per node class; acyclic nodes counted apart."""

    vn: Counter[int] = field(default_factory=Counter)
    cn: Counter[int] = field(default_factory=Counter)
    vn_acyclic: int = 0
    cn_acyclic: int = 0

    def counts(self, kind: NodeKind) -> Counter[int]:
        """Girth counts of one class."""
        return self.vn if kind == "vn" else self.cn

    def acyclic(self, kind: NodeKind) -> int:
        """Number of nodes of one class on no cycle."""
        return self.vn_acyclic if kind == "vn" else self.cn_acyclic

    @property
    def code_girth(self) -> int | None:
        """Shortest cycle in the whole graph."""
        girths = list(self.vn) + list(self.cn)
        return min(girths) if girths else None


@dataclass
class DegreeDistribution:
    """Column (VN) and row (CN) weights of the full H."""

    vn_degrees: npt.NDArray[np.int64]
    cn_degrees: npt.NDArray[np.int64]

    def histogram(self, kind: NodeKind) -> Counter[int]:
        """Degree value to node count."""
        degrees = self.vn_degrees if kind == "vn" else self.cn_degrees
        return Counter(int(d) for d in degrees)

    @property
    def edges(self) -> int:
        """Number of edges of the graph."""
        return int(self.vn_degrees.sum())


def girth_histograms(h: ParityCheckMatrix | npt.ArrayLike) -> GirthHistogram:
    """Node girth of every variable and check node."""
    graph = TannerGraph.from_matrix(h)
    result = GirthHistogram()
    for kind in ("vn", "cn"):
        for node in graph.nodes(kind):
            girth = node_girth(graph, node)
            if girth is None:
                if kind == "vn":
                    result.vn_acyclic += 1
                else:
                    result.cn_acyclic += 1
            else:
                result.counts(kind)[girth] += 1
    return result


def degree_distributions(
    h: ParityCheckMatrix | npt.ArrayLike,
) -> DegreeDistribution:
    """Exact row and column weights, identity block included."""
    matrix = _as_matrix(h).astype(np.int64)
    return DegreeDistribution(
        vn_degrees=matrix.sum(axis=0), cn_degrees=matrix.sum(axis=1)
    )
