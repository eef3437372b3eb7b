"""Graph centrality measures and hub extraction.

Closeness uses the harmonic convention (sum of inverse shortest-path
distances) so disconnected graphs are well defined; betweenness is exact
Brandes shortest-path betweenness, unnormalized; page rank is power
iteration with teleport on the undirected adjacency.
"""

import csv
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

MEASURES = ("degree", "closeness", "betweenness", "pagerank")


def degree(g):
    """Edges incident to each vertex."""
    return np.array([g.degree(i) for i in range(g.p)], dtype=np.int64)


def _bfs_distances(g, source):
    dist = np.full(g.p, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in g._nbrs[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def closeness(g):
    """Harmonic closeness: sum over reachable vertices of 1/distance."""
    out = np.zeros(g.p, dtype=np.float64)
    for source in range(g.p):
        dist = _bfs_distances(g, source)
        reach = dist > 0
        if np.any(reach):
            out[source] = float(np.sum(1.0 / dist[reach]))
    return out


def betweenness(g):
    """Exact shortest-path betweenness (Brandes), unnormalized.

    Each unordered pair contributes once.
    """
    p = g.p
    out = np.zeros(p, dtype=np.float64)
    for s in range(p):
        stack = []
        preds = [[] for _ in range(p)]
        sigma = np.zeros(p, dtype=np.float64)
        sigma[s] = 1.0
        dist = np.full(p, -1, dtype=np.int64)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for u in g._nbrs[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
                if dist[u] == dist[v] + 1:
                    sigma[u] += sigma[v]
                    preds[u].append(v)
        delta = np.zeros(p, dtype=np.float64)
        while stack:
            u = stack.pop()
            for v in preds[u]:
                delta[v] += sigma[v] / sigma[u] * (1.0 + delta[u])
            if u != s:
                out[u] += delta[u]
    return out / 2.0


def pagerank(g, damping=0.85, tol=1e-10, max_iter=10_000):
    """Power iteration on the undirected adjacency with uniform teleport.

    Dangling (isolated) vertices redistribute uniformly. Converges when the
    max-norm change drops below tol; hitting the iteration cap emits a
    warning rather than aborting.
    """
    p = g.p
    adj = g.adj.astype(np.float64)
    deg = adj.sum(axis=1)
    dangling = deg == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        trans = np.where(deg[:, None] > 0, adj / deg[:, None], 0.0)
    rank = np.full(p, 1.0 / p)
    teleport = (1.0 - damping) / p
    for _ in range(max_iter):
        dangling_mass = rank[dangling].sum() / p
        new = teleport + damping * (trans.T @ rank + dangling_mass)
        if np.max(np.abs(new - rank)) < tol:
            return new
        rank = new
    warnings.warn(f"page rank did not converge within {max_iter} iterations")
    return rank


@dataclass
class CentralityReport:
    """Per-vertex values of the four measures, with labels."""

    labels: list
    degree: np.ndarray
    closeness: np.ndarray
    betweenness: np.ndarray
    pagerank: np.ndarray

    def values(self, measure):
        if measure not in MEASURES:
            raise ValueError(f"unknown measure {measure!r}; choose from {MEASURES}")
        return getattr(self, measure)


def centrality_report(g, labels=None):
    if labels is None:
        labels = [f"v{i}" for i in range(g.p)]
    if len(labels) != g.p:
        raise ValueError("one label per vertex required")
    return CentralityReport(
        labels=list(labels),
        degree=degree(g),
        closeness=closeness(g),
        betweenness=betweenness(g),
        pagerank=pagerank(g),
    )


def top_k(report, measure, k):
    """Vertices ranked descending by the measure; ties keep vertex order."""
    values = report.values(measure)
    if not 1 <= k <= values.shape[0]:
        raise ValueError(f"k must lie in [1, {values.shape[0]}], got {k}")
    order = sorted(range(values.shape[0]), key=lambda v: (-values[v], v))
    return order[:k]


def write_centrality_csv(report, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex", "label", "degree", "closeness", "betweenness",
                         "pagerank"])
        for v in range(len(report.labels)):
            writer.writerow([
                v, report.labels[v], int(report.degree[v]),
                repr(float(report.closeness[v])),
                repr(float(report.betweenness[v])),
                repr(float(report.pagerank[v])),
            ])
