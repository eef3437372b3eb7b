"""Greedy hill-climbing baseline.

Phase one estimates each vertex's neighborhood independently: starting from
the empty set, single vertices are added or removed whenever the move
improves local score plus neighborhood-size prior term, taking the first
improving move in ascending candidate order until a full pass finds none.
Phase two combines the per-vertex estimates into one graph under the "and"
rule (both endpoints name each other) or the "or" rule (either does).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import GraphPrior, UndirectedGraph
from .score import MplScorer


@dataclass
class HcResult:
    neighborhoods: list
    and_graph: UndirectedGraph
    or_graph: UndirectedGraph
    scores: np.ndarray


def _neighborhood_objective(scorer, lpr, i, nbd):
    return scorer.local(i, nbd) + len(nbd) * lpr


def hc_neighborhood(data, i, hyper=None, prior=None, include_prior=True,
                    scorer=None):
    """Greedy neighborhood estimate for vertex i."""
    if scorer is None:
        scorer = MplScorer(data, hyper)
    lpr = prior.log_ratio if (include_prior and prior is not None) else 0.0
    nbd = set()
    current = _neighborhood_objective(scorer, lpr, i, nbd)
    improved = True
    while improved:
        improved = False
        for j in range(data.p):
            if j == i:
                continue
            candidate = set(nbd)
            if j in candidate:
                candidate.discard(j)
            else:
                candidate.add(j)
            value = _neighborhood_objective(scorer, lpr, i, candidate)
            if value > current:
                nbd = candidate
                current = value
                improved = True
    return nbd


def hc_learn_full(data, hyper=None, prior=None, include_prior=True, threads=1):
    """Per-vertex neighborhoods plus both combined graphs."""
    if prior is None:
        prior = GraphPrior(0.5)
    scorer = MplScorer(data, hyper)
    lpr = prior.log_ratio if include_prior else 0.0

    def solve(i):
        return hc_neighborhood(data, i, prior=prior, include_prior=include_prior,
                               scorer=scorer)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            neighborhoods = list(pool.map(solve, range(data.p)))
    else:
        neighborhoods = [solve(i) for i in range(data.p)]
    and_graph = combine_neighborhoods(neighborhoods, "and")
    or_graph = combine_neighborhoods(neighborhoods, "or")
    scores = np.array(
        [_neighborhood_objective(scorer, lpr, i, neighborhoods[i]) for i in range(data.p)]
    )
    return HcResult(neighborhoods=[tuple(sorted(s)) for s in neighborhoods],
                    and_graph=and_graph, or_graph=or_graph, scores=scores)


def combine_neighborhoods(neighborhoods, criterion):
    """Edge (i,j) present iff j in nbd(i) and/or i in nbd(j)."""
    if criterion not in ("and", "or"):
        raise ValueError(f"criterion must be 'and' or 'or', got {criterion!r}")
    p = len(neighborhoods)
    edges = []
    for i in range(p):
        for j in range(i + 1, p):
            fwd = j in neighborhoods[i]
            back = i in neighborhoods[j]
            keep = (fwd and back) if criterion == "and" else (fwd or back)
            if keep:
                edges.append((i, j))
    return UndirectedGraph(p, edges)


def hc_learn(data, hyper=None, prior=None, criterion="and", include_prior=True,
             threads=1):
    """Hill-climbing graph estimate under the given combination criterion."""
    if criterion not in ("and", "or"):
        raise ValueError(f"criterion must be 'and' or 'or', got {criterion!r}")
    result = hc_learn_full(data, hyper, prior, include_prior=include_prior,
                           threads=threads)
    return result.and_graph if criterion == "and" else result.or_graph
