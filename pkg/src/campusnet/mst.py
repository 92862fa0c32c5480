"""Prim's minimum spanning tree over distance-weighted site graphs.

``prim_mst`` follows the textbook heap-based formulation: every vertex enters
the queue keyed by its distance ``D``, the root at 0 and the rest at infinity;
the minimum-key vertex is removed and its incident edges relax the keys of
vertices still queued. Decrease-key is realised by lazy deletion, and equal
keys are broken by the vertex's position in ``WeightedGraph.vertices``.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geodesy import check_unique, site_distance_km

BRUTE_FORCE_MAX_N = 8


class GraphError(ValueError):
    pass


class DisconnectedGraphError(GraphError):
    def __init__(self, vertex):
        super().__init__(f"graph is disconnected: vertex {vertex!r} is unreachable")
        self.vertex = vertex


@dataclass(frozen=True)
class WeightedGraph:
    vertices: tuple
    edges: tuple  # (u, v, w)
    _adj: dict = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple((u, v, float(w)) for u, v, w in self.edges))
        index = {}
        for i, v in enumerate(self.vertices):
            if v in index:
                raise GraphError(f"duplicate vertex {v!r}")
            index[v] = i
        adj = {v: [] for v in self.vertices}
        pairs = set()
        for u, v, w in self.edges:
            if u not in index or v not in index:
                raise GraphError(f"edge ({u!r}, {v!r}) references unknown vertex")
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
            if not w >= 0.0:
                raise GraphError(f"edge ({u!r}, {v!r}) has negative or NaN weight {w}")
            key = frozenset((u, v))
            if key in pairs:
                raise GraphError(f"duplicate edge ({u!r}, {v!r})")
            pairs.add(key)
            adj[u].append((v, w))
            adj[v].append((u, w))
        object.__setattr__(self, "_adj", adj)
        object.__setattr__(self, "_index", index)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def incident(self, u):
        return self._adj[u]

    def index(self, v) -> int:
        return self._index[v]

    def weight(self, u, v) -> float | None:
        for z, w in self._adj[u]:
            if z == v:
                return w
        return None

    def scaled(self, c: float) -> "WeightedGraph":
        return WeightedGraph(self.vertices, [(u, v, w * c) for u, v, w in self.edges])


@dataclass(frozen=True)
class SpanningTree:
    root: object
    parent: dict  # vertex -> (parent vertex, weight) or None for the root
    key: dict  # final distance key D per vertex
    order: tuple  # extraction order

    @property
    def edges(self) -> list[tuple]:
        """Tree edges ``(parent, child, weight)`` in the order they were added."""
        return [(self.parent[v][0], v, self.parent[v][1]) for v in self.order if self.parent[v]]

    @property
    def total_weight(self) -> float:
        return math.fsum(w for _, _, w in self.edges)

    def children(self, v) -> list:
        return [c for c in self.order if self.parent[c] and self.parent[c][0] == v]

    def preorder(self) -> list:
        """Depth-first preorder from the root; siblings visited in extraction order."""
        out, stack = [], [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children(v)))
        return out


def graph_from_sites(sites) -> WeightedGraph:
    """Complete graph over ``sites`` weighted by great-circle distance in km."""
    sites = list(sites)
    if not sites:
        raise GraphError("need at least one site")
    check_unique(sites)
    edges = [
        (a.id, b.id, site_distance_km(a, b)) for a, b in itertools.combinations(sites, 2)
    ]
    return WeightedGraph([s.id for s in sites], edges)


def prim_mst(g: WeightedGraph, s) -> SpanningTree:
    if s not in g._index:
        raise GraphError(f"start vertex {s!r} not in graph")
    dist = {v: math.inf for v in g.vertices}
    parent = {v: None for v in g.vertices}
    dist[s] = 0.0
    heap = [(dist[v], g.index(v), v) for v in g.vertices]
    heapq.heapify(heap)
    in_queue = set(g.vertices)
    order = []
    while in_queue:
        d, _, u = heapq.heappop(heap)
        if u not in in_queue or d != dist[u]:
            continue  # stale entry left behind by a key decrease
        if d == math.inf:
            raise DisconnectedGraphError(u)
        in_queue.remove(u)
        order.append(u)
        for z, r in g.incident(u):
            if z in in_queue and r < dist[z]:
                dist[z] = r
                parent[z] = (u, r)
                heapq.heappush(heap, (r, g.index(z), z))
    return SpanningTree(root=s, parent=parent, key=dist, order=tuple(order))


@lru_cache(maxsize=None)
def _labeled_trees(n: int) -> np.ndarray:
    """All n**(n-2) labeled trees on range(n) as an (T, n-1, 2) index array."""
    if n == 1:
        return np.zeros((1, 0, 2), dtype=np.int64)
    if n == 2:
        return np.array([[[0, 1]]], dtype=np.int64)
    trees = []
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        edges = []
        for x in seq:
            leaf = min(i for i in range(n) if degree[i] == 1)
            edges.append((leaf, x))
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = (i for i in range(n) if degree[i] == 1)
        edges.append((u, v))
        trees.append(edges)
    return np.array(trees, dtype=np.int64)


def brute_force_mst_weight(g: WeightedGraph) -> float:
    """Minimum spanning-tree weight by exhaustive enumeration (n <= 8).

    Every labeled tree on the vertex set is scored; trees using a missing edge
    score infinity. Independent of ``prim_mst`` by construction.
    """
    n = g.n
    if n > BRUTE_FORCE_MAX_N:
        raise GraphError(f"brute force refused for n={n} > {BRUTE_FORCE_MAX_N}")
    if n == 0:
        raise GraphError("empty graph")
    w = np.full((n, n), np.inf)
    for u, v, wt in g.edges:
        i, j = g.index(u), g.index(v)
        w[i, j] = w[j, i] = wt
    trees = _labeled_trees(n)
    if n == 1:
        return 0.0
    totals = w[trees[:, :, 0], trees[:, :, 1]].sum(axis=1)
    best = totals.min()
    if best == np.inf:
        raise DisconnectedGraphError(_first_unreachable(g))
    # numpy summation order is not fsum's; settle near-ties exactly
    near = np.nonzero(totals <= best * (1 + 1e-9) + 1e-300)[0]
    return min(math.fsum(w[i, j] for i, j in trees[t]) for t in near)


def _first_unreachable(g: WeightedGraph):
    seen, stack = {g.vertices[0]}, [g.vertices[0]]
    while stack:
        for z, _ in g.incident(stack.pop()):
            if z not in seen:
                seen.add(z)
                stack.append(z)
    return next(v for v in g.vertices if v not in seen)
