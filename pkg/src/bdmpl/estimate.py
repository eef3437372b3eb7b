"""Posterior summaries from a chain trace.

All estimators are Rao-Blackwellized: a state's weight is its waiting time,
so the probability of any event is the fraction of (post burn-in) chain time
spent in states where it holds.
"""

import csv

import numpy as np

from . import kernels
from .graph import UndirectedGraph

_GRAPH_POSTERIOR_SOFT_LIMIT = 25


def edge_inclusion_probs(trace, skip_burnin=True):
    """p x p symmetric matrix of posterior edge inclusion probabilities.

    entry(e) = sum_t I(e in G_t) W_t / sum_t W_t over retained iterations.
    """
    burnin = trace.burnin if skip_burnin else 0
    if burnin >= trace.n_iterations:
        raise ValueError("no iterations left after burn-in removal")
    init = trace.initial_graph()
    presence, total = kernels.presence_times(
        trace.iters, trace.di, trace.dj, trace.signs, trace.w,
        init.adj.astype(np.uint8), burnin, trace.n_iterations, trace.p,
    )
    if not total > 0.0:
        raise ValueError("trace carries no waiting time after burn-in removal")
    probs = presence / total
    probs = probs + probs.T
    np.fill_diagonal(probs, 0.0)
    return probs


def median_graph(probs, threshold=0.5):
    """Graph of edges with inclusion probability strictly above threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0,1), got {threshold}")
    p = probs.shape[0]
    iu, ju = np.triu_indices(p, k=1)
    keep = probs[iu, ju] > threshold
    return UndirectedGraph(p, [(int(a), int(b)) for a, b in zip(iu[keep], ju[keep])])


def graph_posterior(trace, skip_burnin=True, allow_large=False):
    """Waiting-time share per visited graph, keyed by its sorted edge tuple.

    Canonicalizing every visited graph is only feasible for small p; the
    soft limit guards against fingerprinting huge states by accident.
    """
    if trace.p > _GRAPH_POSTERIOR_SOFT_LIMIT and not allow_large:
        raise ValueError(
            f"graph_posterior is intended for p <= {_GRAPH_POSTERIOR_SOFT_LIMIT}; "
            "pass allow_large=True to override"
        )
    burnin = trace.burnin if skip_burnin else 0
    if burnin >= trace.n_iterations:
        raise ValueError("no iterations left after burn-in removal")
    g = trace.initial_graph()
    weights = {}
    total = 0.0
    row = 0
    n_rows = trace.n_rows
    for m in range(trace.n_iterations):
        wm = trace.w[row] if row < n_rows and trace.iters[row] == m else 0.0
        if m >= burnin:
            key = tuple(g.edge_list())
            weights[key] = weights.get(key, 0.0) + wm
            total += wm
        while row < n_rows and trace.iters[row] == m:
            g.toggle((int(trace.di[row]), int(trace.dj[row])))
            row += 1
    if not total > 0.0:
        raise ValueError("trace carries no waiting time after burn-in removal")
    return {key: weight / total for key, weight in weights.items()}


def convergence_trace(trace, skip_burnin=False):
    """Running sum of edge inclusion probabilities per iteration prefix.

    Returns (iterations, cum_edge_prob_sum, edge_counts). Since
    sum_e I(e in G) = |E(G)|, the running posterior-sum equals
    cumsum(|E_t| W_t) / cumsum(W_t); its final value matches the sum of
    edge_inclusion_probs over the upper triangle.
    """
    burnin = trace.burnin if skip_burnin else 0
    first = np.ones(trace.n_rows, dtype=bool)
    first[1:] = trace.iters[1:] != trace.iters[:-1]
    its = trace.iters[first]
    w = trace.w[first].copy()
    counts = trace.edge_counts[first]
    w[its < burnin] = 0.0
    cum_w = np.cumsum(w)
    cum_ew = np.cumsum(counts * w)
    with np.errstate(invalid="ignore", divide="ignore"):
        running = np.where(cum_w > 0.0, cum_ew / cum_w, 0.0)
    return its, running, counts


def write_edge_probs_csv(probs, path):
    """Upper-triangle (i, j, prob) listing."""
    p = probs.shape[0]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "prob"])
        for i in range(p):
            for j in range(i + 1, p):
                writer.writerow([i, j, repr(float(probs[i, j]))])


def read_edge_probs_csv(path):
    entries = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["i", "j", "prob"]:
            raise ValueError(f"{path}: expected 'i,j,prob' header")
        for rec in reader:
            if rec:
                entries.append((int(rec[0]), int(rec[1]), float(rec[2])))
    p = max(max(i, j) for i, j, _ in entries) + 1
    probs = np.zeros((p, p))
    for i, j, v in entries:
        probs[i, j] = v
        probs[j, i] = v
    return probs


def write_prob_matrix_csv(probs, path):
    """Dense matrix CSV for heatmap rendering."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in probs:
            writer.writerow([repr(float(v)) for v in row])


def write_convergence_csv(trace, path, skip_burnin=False):
    its, running, counts = convergence_trace(trace, skip_burnin=skip_burnin)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "cum_edge_prob_sum", "edge_count"])
        for k in range(its.shape[0]):
            writer.writerow([int(its[k]), repr(float(running[k])), int(counts[k])])
