"""Regular graph families and their distance-2 neighborhood structure.

Nodes are the contiguous integers ``0..n-1``. Every graph built here is simple,
undirected, connected and r-regular; :class:`Graph` refuses anything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import comb, gcd
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import DisconnectedError, GraphError, NotRegularError

FAMILIES = ("circle", "circulant", "hypercube", "complete", "complete_bipartite")


@dataclass(frozen=True)
class Graph:
    n: int
    adjacency: tuple[tuple[int, ...], ...]
    r: int
    name: str = field(default="", compare=False)

    @classmethod
    def from_adjacency(cls, adjacency: Sequence[Sequence[int]], name: str = "") -> "Graph":
        adj = tuple(tuple(sorted(int(j) for j in nbrs)) for nbrs in adjacency)
        r = validate_regular(adj)
        return cls(n=len(adj), adjacency=adj, r=r, name=name)

    @classmethod
    def from_edges(cls, n: int, edges, name: str = "") -> "Graph":
        adj = [[] for _ in range(n)]
        for i, j in edges:
            adj[i].append(j)
            adj[j].append(i)
        return cls.from_adjacency(adj, name=name)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nbrs in enumerate(self.adjacency) for j in nbrs if i < j]

    @cached_property
    def closed(self) -> np.ndarray:
        """(n, r+1) array; row k lists the closed neighborhood of k in sorted order."""
        out = np.array(
            [sorted((k,) + nbrs) for k, nbrs in enumerate(self.adjacency)], dtype=np.int64
        )
        out.setflags(write=False)
        return out

    def sparse_adjacency(self) -> sp.csr_matrix:
        rows = np.repeat(np.arange(self.n), self.r)
        cols = np.fromiter((j for nbrs in self.adjacency for j in nbrs), dtype=np.int64,
                           count=self.n * self.r)
        data = np.ones(rows.size, dtype=np.int64)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))


def _check_simple(adj: Sequence[Sequence[int]]) -> None:
    n = len(adj)
    if n == 0:
        raise GraphError("graph has no nodes")
    for i, nbrs in enumerate(adj):
        if len(set(nbrs)) != len(nbrs):
            raise GraphError(f"simple: node {i} has duplicate edges")
        for j in nbrs:
            if not 0 <= j < n:
                raise GraphError(f"node {i} has out-of-range neighbor {j}")
            if j == i:
                raise GraphError(f"simple: node {i} has a self-loop")
            if i not in adj[j]:
                raise GraphError(f"undirected: edge {i}->{j} has no reverse edge")


def validate_regular(g: Graph | Sequence[Sequence[int]]) -> int:
    """Return the common degree r; raise if not simple, regular and connected."""
    adj = g.adjacency if isinstance(g, Graph) else g
    _check_simple(adj)
    degrees = {i: len(nbrs) for i, nbrs in enumerate(adj)}
    if len(set(degrees.values())) != 1:
        raise NotRegularError(degrees)
    n = len(adj)
    rows = [i for i, nbrs in enumerate(adj) for _ in nbrs]
    cols = [j for nbrs in adj for j in nbrs]
    mat = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, _ = connected_components(mat, directed=False)
    if ncomp != 1:
        raise DisconnectedError(f"connected: graph has {ncomp} components")
    return degrees[0]


# -- families ---------------------------------------------------------------

def circulant_offsets(n: int, offsets) -> list[int]:
    offsets = sorted({int(s) for s in offsets})
    if n < 3:
        raise GraphError(f"circulant needs n >= 3 (got {n})")
    if not offsets:
        raise GraphError("circulant offset set must be nonempty")
    bad = [s for s in offsets if not 1 <= s <= n // 2]
    if bad:
        raise GraphError(f"circulant offsets {bad} outside 1..{n // 2}")
    if gcd(n, *offsets) != 1:
        raise DisconnectedError(
            f"connected: circulant C({n}, {offsets}) splits into {gcd(n, *offsets)} components"
        )
    return offsets


def circulant(n: int, offsets) -> Graph:
    offsets = circulant_offsets(n, offsets)
    adj = []
    for v in range(n):
        nbrs = set()
        for s in offsets:
            nbrs.add((v + s) % n)
            nbrs.add((v - s) % n)
        adj.append(nbrs)
    return Graph.from_adjacency(adj, name=f"circulant(n={n}, offsets={offsets})")


def circle(n: int) -> Graph:
    if n < 3:
        raise GraphError(f"circle needs n >= 3 (got {n})")
    g = circulant(n, [1])
    return Graph(g.n, g.adjacency, g.r, name=f"circle(n={n})")


def hypercube(dim: int) -> Graph:
    if dim < 1:
        raise GraphError(f"hypercube needs dim >= 1 (got {dim})")
    adj = [[v ^ (1 << b) for b in range(dim)] for v in range(1 << dim)]
    return Graph.from_adjacency(adj, name=f"hypercube(dim={dim})")


def complete(n: int) -> Graph:
    if n < 2:
        raise GraphError(f"complete graph needs n >= 2 (got {n})")
    adj = [[j for j in range(n) if j != i] for i in range(n)]
    return Graph.from_adjacency(adj, name=f"complete(n={n})")


def complete_bipartite(side: int) -> Graph:
    if side < 1:
        raise GraphError(f"complete bipartite needs side >= 1 (got {side})")
    left = list(range(side))
    right = list(range(side, 2 * side))
    adj = [right for _ in left] + [left for _ in right]
    return Graph.from_adjacency(adj, name=f"complete_bipartite(side={side})")


def _family_args(kind: str, params: dict) -> dict:
    params = dict(params)
    params.pop("kind", None)
    expected = {
        "circle": {"n"},
        "circulant": {"n", "offsets"},
        "hypercube": {"dim"},
        "complete": {"n"},
        "complete_bipartite": {"side"},
    }
    if kind not in expected:
        raise GraphError(f"unknown family {kind!r}; choose from {FAMILIES}")
    if set(params) != expected[kind]:
        raise GraphError(f"{kind} takes parameters {sorted(expected[kind])}, got {sorted(params)}")
    for key, val in params.items():
        if key == "offsets":
            continue
        if isinstance(val, bool) or not isinstance(val, (int, np.integer)):
            raise GraphError(f"{kind}: parameter {key} must be an integer")
    return params


def build_family(kind: str, **params) -> Graph:
    """Build one of ``circle, circulant, hypercube, complete, complete_bipartite``.

    Parameters are ``n`` (circle, complete), ``n`` and ``offsets`` (circulant),
    ``dim`` (hypercube) and ``side`` (complete_bipartite, N = 2*side).
    """
    params = _family_args(kind, params)
    return {
        "circle": circle,
        "circulant": circulant,
        "hypercube": hypercube,
        "complete": complete,
        "complete_bipartite": complete_bipartite,
    }[kind](**params)


def family_dims(kind: str, **params) -> tuple[int, int, int]:
    """(N, r, r*) in closed form, without building the graph.

    Lets the bound and sweep paths handle sizes (hypercube dim 30, circle 10^8)
    whose graphs are too large to materialise.
    """
    params = _family_args(kind, params)
    if kind == "circle":
        n = params["n"]
        if n < 3:
            raise GraphError(f"circle needs n >= 3 (got {n})")
        return n, 2, min(4, n - 1)
    if kind == "circulant":
        n = params["n"]
        offsets = circulant_offsets(n, params["offsets"])
        one = {s % n for s in offsets} | {(-s) % n for s in offsets}
        two = one | {(a + b) % n for a in one for b in one}
        two.discard(0)
        return n, len(one), len(two)
    if kind == "hypercube":
        d = params["dim"]
        if d < 1:
            raise GraphError(f"hypercube needs dim >= 1 (got {d})")
        return 2 ** d, d, d + comb(d, 2)
    if kind == "complete":
        n = params["n"]
        if n < 2:
            raise GraphError(f"complete graph needs n >= 2 (got {n})")
        return n, n - 1, n - 1
    m = params["side"]
    if m < 1:
        raise GraphError(f"complete bipartite needs side >= 1 (got {m})")
    return 2 * m, m, 2 * m - 1


# -- neighborhoods ----------------------------------------------------------

@dataclass(frozen=True)
class NeighborhoodIndex:
    closed_neighborhoods: tuple[frozenset, ...]
    near_pairs: np.ndarray  # (M, 2), i < j, shortest-path distance 1 or 2
    r_star_per_node: np.ndarray
    r_star: Optional[int]

    @cached_property
    def pair_i(self) -> np.ndarray:
        return np.ascontiguousarray(self.near_pairs[:, 0])

    @cached_property
    def pair_j(self) -> np.ndarray:
        return np.ascontiguousarray(self.near_pairs[:, 1])


def build_neighborhood_index(g: Graph) -> NeighborhoodIndex:
    """Closed neighborhoods and all unordered pairs at distance 1 or 2.

    Distance-2 reachability is the support of A + A^2 with the diagonal removed,
    i.e. a breadth-first search truncated at depth 2.
    """
    a = g.sparse_adjacency()
    reach = (a + a @ a).tolil()
    reach.setdiag(0)
    reach = reach.tocsr()
    reach.eliminate_zeros()
    r_star_per_node = np.diff(reach.indptr).astype(np.int64)
    upper = sp.triu(reach, k=1).tocoo()
    order = np.lexsort((upper.col, upper.row))
    pairs = np.stack([upper.row[order], upper.col[order]], axis=1).astype(np.int64)
    pairs.setflags(write=False)
    r_star_per_node.setflags(write=False)
    closed = tuple(frozenset(row.tolist()) for row in g.closed)
    r_star = int(r_star_per_node[0]) if np.all(r_star_per_node == r_star_per_node[0]) else None
    return NeighborhoodIndex(closed, pairs, r_star_per_node, r_star)
