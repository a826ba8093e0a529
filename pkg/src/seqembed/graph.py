"""Dynamic undirected weighted graph with component and spanning-forest queries."""

from bisect import bisect_left, insort
from collections import deque
from dataclasses import dataclass, field
from itertools import chain

import numpy as np

Edge = tuple[int, int, float]


class GraphError(ValueError):
    """Invalid graph mutation (self-loop, duplicate edge, bad node id)."""


class Graph:
    """Undirected weighted graph over a fixed node set with edge insertion.

    Adjacency is kept per node as parallel lists sorted by neighbor id,
    so membership tests are O(log degree) and neighbor order is
    deterministic. A CSR snapshot for the walk kernels is cached and
    invalidated on mutation.
    """

    def __init__(self, node_count: int):
        if node_count < 1:
            raise GraphError(f"node_count must be >= 1, got {node_count}")
        self.node_count = node_count
        self.edge_count = 0
        self._nbr: list[list[int]] = [[] for _ in range(node_count)]
        self._wgt: list[list[float]] = [[] for _ in range(node_count)]
        self._csr = None

    @classmethod
    def from_edges(cls, node_count: int, edges) -> "Graph":
        g = cls(node_count)
        for u, v, *w in edges:
            g.add_edge(u, v, w[0] if w else 1.0)
        return g

    def _check_node(self, u: int):
        if not 0 <= u < self.node_count:
            raise GraphError(f"node id {u} out of range [0, {self.node_count})")

    def add_edge(self, u: int, v: int, w: float = 1.0):
        """Insert undirected edge (u, v) with weight w in both directions."""
        self._check_node(u)
        self._check_node(v)
        if u == v:
            raise GraphError(f"self-loop ({u}, {v}) rejected")
        if w < 0:
            raise GraphError(f"negative weight {w} rejected")
        if self.has_edge(u, v):
            raise GraphError(f"duplicate edge ({u}, {v}) rejected")
        for a, b in ((u, v), (v, u)):
            i = bisect_left(self._nbr[a], b)
            self._nbr[a].insert(i, b)
            self._wgt[a].insert(i, w)
        self.edge_count += 1
        self._csr = None

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self._nbr[u]
        i = bisect_left(nbrs, v)
        return i < len(nbrs) and nbrs[i] == v

    def degree(self, u: int) -> int:
        return len(self._nbr[u])

    def neighbors(self, u: int):
        """Neighbor ids and weights of u, sorted by id."""
        return self._nbr[u], self._wgt[u]

    def edges(self):
        """Yield each undirected edge once as (u, v, w) with u < v."""
        for u in range(self.node_count):
            for v, w in zip(self._nbr[u], self._wgt[u]):
                if u < v:
                    yield (u, v, w)

    def csr(self):
        """CSR view (indptr, indices, weights); cached until the next mutation."""
        if self._csr is None:
            degrees = np.fromiter(
                (len(n) for n in self._nbr), dtype=np.int64, count=self.node_count
            )
            indptr = np.zeros(self.node_count + 1, dtype=np.int64)
            np.cumsum(degrees, out=indptr[1:])
            indices = np.fromiter(
                chain.from_iterable(self._nbr), dtype=np.int64, count=2 * self.edge_count
            )
            weights = np.fromiter(
                chain.from_iterable(self._wgt), dtype=np.float64, count=2 * self.edge_count
            )
            self._csr = (indptr, indices, weights)
        return self._csr

    def copy(self) -> "Graph":
        g = Graph(self.node_count)
        g.edge_count = self.edge_count
        g._nbr = [list(n) for n in self._nbr]
        g._wgt = [list(w) for w in self._wgt]
        return g


def connected_components(g: Graph) -> np.ndarray:
    """Label each node with its component id, dense in [0, n_components).

    Components are numbered in order of their lowest node id, so the
    labeling is deterministic for a given graph.
    """
    labels = np.full(g.node_count, -1, dtype=np.int64)
    next_label = 0
    for start in range(g.node_count):
        if labels[start] >= 0:
            continue
        labels[start] = next_label
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g._nbr[u]:
                if labels[v] < 0:
                    labels[v] = next_label
                    queue.append(v)
        next_label += 1
    return labels


@dataclass
class EdgeStream:
    """A graph split into a spanning forest plus a replayable edge stream.

    ``initial_edges`` form a spanning forest with the same component
    partition as the full graph; ``deferred_edges`` are the remaining
    edges, shuffled by ``seed``, to be replayed one at a time.
    """

    initial_edges: list = field(default_factory=list)
    deferred_edges: list = field(default_factory=list)
    seed: int = 0


def spanning_forest_split(g: Graph, seed: int = 0) -> EdgeStream:
    """Split g into a BFS spanning forest and a shuffled deferred-edge stream.

    The BFS tree of each component is rooted at its lowest node id, so the
    forest is deterministic given the graph; only the deferred order
    depends on the seed.
    """
    if g.edge_count == 0:
        raise GraphError("cannot split an empty graph")
    in_forest = set()
    visited = np.zeros(g.node_count, dtype=bool)
    initial: list[Edge] = []
    for start in range(g.node_count):
        if visited[start]:
            continue
        visited[start] = True
        queue = deque([start])
        while queue:
            u = queue.popleft()
            nbrs, wgts = g.neighbors(u)
            for v, w in zip(nbrs, wgts):
                if not visited[v]:
                    visited[v] = True
                    initial.append((min(u, v), max(u, v), w))
                    in_forest.add((min(u, v), max(u, v)))
                    queue.append(v)

    deferred = [e for e in g.edges() if (e[0], e[1]) not in in_forest]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(deferred))
    deferred = [deferred[i] for i in order]
    return EdgeStream(initial_edges=initial, deferred_edges=deferred, seed=seed)
