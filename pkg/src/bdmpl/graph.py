"""Undirected graphs over p labelled vertices and the sparsity prior.

The sampler state space is the set of simple undirected graphs. Membership
tests must be O(1) and neighbor enumeration cheap at a couple hundred
vertices, so adjacency is kept twice: a dense boolean matrix and per-vertex
neighbor sets, always consistent. Edges are canonicalized as (min, max);
every API accepts either order.
"""

from dataclasses import dataclass

import numpy as np


def canonical_edge(e):
    i, j = int(e[0]), int(e[1])
    if i == j:
        raise ValueError(f"self-loop ({i},{i}) is not a valid edge")
    return (i, j) if i < j else (j, i)


def pair_count(p):
    return p * (p - 1) // 2


def pair_index(p, i, j):
    """Linear index of the unordered pair (i, j) in row-major upper triangle."""
    i, j = canonical_edge((i, j))
    if j >= p:
        raise ValueError(f"vertex {j} out of range for p={p}")
    return i * (2 * p - i - 1) // 2 + (j - i - 1)


def pair_arrays(p):
    """(i, j) endpoint arrays for all unordered pairs, in pair_index order."""
    iu, ju = np.triu_indices(p, k=1)
    return iu.astype(np.int32), ju.astype(np.int32)


class UndirectedGraph:
    """Simple undirected graph on vertices 0..p-1."""

    __slots__ = ("p", "adj", "_nbrs", "_nbr_tuples", "n_edges")

    def __init__(self, p, edges=()):
        if p < 1:
            raise ValueError("vertex count must be positive")
        self.p = int(p)
        self.adj = np.zeros((p, p), dtype=bool)
        self._nbrs = [set() for _ in range(p)]
        self._nbr_tuples = [None] * p
        self.n_edges = 0
        for e in edges:
            i, j = canonical_edge(e)
            self._check_vertex(j)
            if not self.adj[i, j]:
                self._set(i, j, True)

    def _check_vertex(self, v):
        if not 0 <= v < self.p:
            raise ValueError(f"vertex {v} out of range for p={self.p}")

    def _set(self, i, j, present):
        self.adj[i, j] = present
        self.adj[j, i] = present
        if present:
            self._nbrs[i].add(j)
            self._nbrs[j].add(i)
            self.n_edges += 1
        else:
            self._nbrs[i].discard(j)
            self._nbrs[j].discard(i)
            self.n_edges -= 1
        self._nbr_tuples[i] = None
        self._nbr_tuples[j] = None

    def has_edge(self, i, j):
        i, j = canonical_edge((i, j))
        self._check_vertex(j)
        self._check_vertex(i)
        return bool(self.adj[i, j])

    def neighbors(self, i):
        """Neighbor set of vertex i (a copy)."""
        self._check_vertex(i)
        return set(self._nbrs[i])

    def neighbors_tuple(self, i):
        """Neighbors of i as a sorted tuple; memoized until the next toggle."""
        self._check_vertex(i)
        t = self._nbr_tuples[i]
        if t is None:
            t = tuple(sorted(self._nbrs[i]))
            self._nbr_tuples[i] = t
        return t

    def degree(self, i):
        self._check_vertex(i)
        return len(self._nbrs[i])

    def toggle(self, e):
        """Flip edge e in place: birth if absent, death if present."""
        i, j = canonical_edge(e)
        self._check_vertex(j)
        self._check_vertex(i)
        self._set(i, j, not self.adj[i, j])

    def edge_list(self):
        """All edges as a sorted list of canonical (i, j) pairs."""
        out = []
        for i in range(self.p):
            for j in self._nbrs[i]:
                if j > i:
                    out.append((i, j))
        out.sort()
        return out

    def copy(self):
        g = UndirectedGraph.__new__(UndirectedGraph)
        g.p = self.p
        g.adj = self.adj.copy()
        g._nbrs = [set(s) for s in self._nbrs]
        g._nbr_tuples = list(self._nbr_tuples)
        g.n_edges = self.n_edges
        return g

    def __eq__(self, other):
        if not isinstance(other, UndirectedGraph):
            return NotImplemented
        return self.p == other.p and bool(np.array_equal(self.adj, other.adj))

    def __repr__(self):
        return f"UndirectedGraph(p={self.p}, edges={self.n_edges})"


def complete_graph(p):
    return UndirectedGraph(p, [(i, j) for i in range(p) for j in range(i + 1, p)])


def neighbors(g, i):
    """Vertices adjacent to i in g."""
    return g.neighbors(i)


def toggle_edge(g, e):
    """Graph with edge e flipped; g itself is unchanged."""
    out = g.copy()
    out.toggle(e)
    return out


@dataclass(frozen=True)
class GraphPrior:
    """Bernoulli edge-inclusion prior: Pr(G) proportional to (beta/(1-beta))^|E|."""

    beta: float

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0,1), got {self.beta}")

    @property
    def log_ratio(self):
        return float(np.log(self.beta) - np.log1p(-self.beta))


def log_prior_ratio(prior, delta):
    """Log prior ratio for adding (delta=+1) or removing (delta=-1) one edge."""
    if delta not in (1, -1):
        raise ValueError(f"delta must be +1 or -1, got {delta}")
    return delta * prior.log_ratio


def write_edge_list(g, path):
    """Edge-list text format: header "p=<count>", then one "i j" line per edge."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"p={g.p}\n")
        for i, j in g.edge_list():
            fh.write(f"{i} {j}\n")


def read_edge_list(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("p="):
            raise ValueError(f"{path}: expected header 'p=<count>', got {header!r}")
        p = int(header[2:])
        edges = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'i j', got {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
    return UndirectedGraph(p, edges)
