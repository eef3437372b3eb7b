"""Synthetic graphs, data simulation, and structure-recovery metrics.

Data are drawn from a pairwise binary Markov random field on the target
graph: spins s in {-1,+1}, energy sum_(i,j) w_ij s_i s_j + sum_i h_i s_i,
sampled by systematic-scan Gibbs with a long burn-in and thinning. Edge
weights default to magnitude Uniform[0.5, 1.0] with fair-coin signs and zero
vertex fields; the magnitudes are a protocol parameter since no reference
generator is available to match exactly.
"""

import csv
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hillclimb, rng as rngmod, sampler as samplermod
from .data import CategoricalDataset, from_rows
from .estimate import edge_inclusion_probs, median_graph
from .graph import GraphPrior, UndirectedGraph, pair_arrays
from .kernels import gibbs_chain
from .score import DirichletHyper


@dataclass(frozen=True)
class GraphSpec:
    """Synthetic graph family: random, cluster, or scalefree.

    edge_prob drives random/cluster; m is the scale-free attachment count;
    components gives cluster sizes (default: two equal halves).
    """

    kind: str
    p: int
    edge_prob: float = 0.4
    m: int = 1
    components: tuple = None

    def __post_init__(self):
        if self.kind not in ("random", "cluster", "scalefree"):
            raise ValueError(f"unknown graph kind {self.kind!r}")
        if self.p < 2:
            raise ValueError("need at least two vertices")
        if self.kind in ("random", "cluster") and not 0.0 <= self.edge_prob <= 1.0:
            raise ValueError("edge probability must lie in [0,1]")
        if self.kind == "scalefree" and not 1 <= self.m < self.p:
            raise ValueError("attachment count must satisfy 1 <= m < p")
        if self.kind == "cluster":
            comps = self.components
            if comps is None:
                comps = (self.p - self.p // 2, self.p // 2)
                object.__setattr__(self, "components", comps)
            if sum(comps) != self.p or any(c < 1 for c in comps):
                raise ValueError("component sizes must be positive and sum to p")


def gen_graph(spec, seed):
    """Sample a graph of the given family."""
    rng = rngmod.substream(seed, rngmod.STREAM_GRAPH)
    if spec.kind == "random":
        iu, ju = pair_arrays(spec.p)
        mask = rng.random(iu.shape[0]) < spec.edge_prob
        return UndirectedGraph(spec.p, [(int(a), int(b)) for a, b in zip(iu[mask], ju[mask])])
    if spec.kind == "cluster":
        edges = []
        offset = 0
        for size in spec.components:
            members = range(offset, offset + size)
            for i in members:
                for j in range(i + 1, offset + size):
                    if rng.random() < spec.edge_prob:
                        edges.append((i, j))
            offset += size
        return UndirectedGraph(spec.p, edges)
    # Barabasi-Albert preferential attachment: grow from a 2-vertex seed
    # edge, each new vertex attaching m edges proportionally to degree.
    edges = [(0, 1)]
    degree = np.zeros(spec.p, dtype=np.int64)
    degree[0] = degree[1] = 1
    for v in range(2, spec.p):
        existing = degree[:v].astype(np.float64)
        targets = set()
        while len(targets) < min(spec.m, v):
            probs = existing / existing.sum()
            t = int(rng.choice(v, p=probs))
            targets.add(t)
        for t in sorted(targets):
            edges.append((t, v))
            degree[t] += 1
            degree[v] += 1
    return UndirectedGraph(spec.p, edges)


@dataclass
class MrfModel:
    """Pairwise binary MRF: one weight per edge of graph, one field per vertex."""

    graph: UndirectedGraph
    weights: dict
    fields: np.ndarray

    def __post_init__(self):
        edge_set = set(self.graph.edge_list())
        if set(self.weights) != edge_set:
            raise ValueError("weights must be defined exactly on the graph's edges")
        if not np.all(np.isfinite(self.fields)) or not all(
            np.isfinite(v) for v in self.weights.values()
        ):
            raise ValueError("weights and fields must be finite")


def sample_mrf_model(graph, seed, weight_low=0.5, weight_high=1.0):
    """Random interaction weights: |w| ~ Uniform[low, high], sign a fair coin."""
    rng = rngmod.substream(seed, rngmod.STREAM_WEIGHTS)
    weights = {}
    for e in graph.edge_list():
        mag = rng.uniform(weight_low, weight_high)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        weights[e] = sign * mag
    return MrfModel(graph=graph, weights=weights,
                    fields=np.zeros(graph.p, dtype=np.float64))


def _model_csr(model):
    p = model.graph.p
    nbrs = [[] for _ in range(p)]
    for (i, j), wij in model.weights.items():
        nbrs[i].append((j, wij))
        nbrs[j].append((i, wij))
    ptr = np.zeros(p + 1, dtype=np.int64)
    idx = []
    wts = []
    for i in range(p):
        nbrs[i].sort()
        ptr[i + 1] = ptr[i] + len(nbrs[i])
        for j, wij in nbrs[i]:
            idx.append(j)
            wts.append(wij)
    return ptr, np.asarray(idx, dtype=np.int64), np.asarray(wts, dtype=np.float64)


def gen_data(model, n, seed, burnin_sweeps=1000, thinning=10):
    """n binary samples from the MRF by systematic-scan Gibbs."""
    if n < 1:
        raise ValueError("need at least one sample")
    p = model.graph.p
    ptr, idx, wts = _model_csr(model)
    n_uniform = p + (burnin_sweeps + n * thinning) * p
    uniforms = rngmod.substream(seed, rngmod.STREAM_GIBBS).random(n_uniform)
    rows = gibbs_chain(ptr, idx, wts, model.fields, n, thinning, burnin_sweeps,
                       uniforms)
    return from_rows(rows)


def synthetic_sparse_dataset(p=214, n_cells=55000, seed=0, mean_active=1.5,
                             big_counts=(58929, 42781, 28731, 28197, 22313),
                             target_n=476_601):
    """Hyper-sparse binary table of the shape seen in large mobility data.

    Cells are distinct sparse activity patterns; most counts are tiny with a
    heavy tail, a handful of single-variable cells are very large, and the
    all-zeros cell is padded so the total sample count lands near target_n.
    """
    rng = rngmod.substream(seed, rngmod.STREAM_SPARSE)
    n_random = n_cells - len(big_counts) - 1
    rows = np.zeros((0, p), dtype=np.uint8)
    while rows.shape[0] < n_random:
        draw = int(1.4 * (n_random - rows.shape[0])) + 64
        intensity = (1.0 + rng.poisson(mean_active, size=draw)) / p
        batch = (rng.random((draw, p)) < intensity[:, None]).astype(np.uint8)
        batch = batch[batch.sum(axis=1) > 1]  # reserve empty/singleton patterns
        rows = np.unique(np.concatenate([rows, batch]), axis=0)
    rows = rows[rng.permutation(rows.shape[0])[:n_random]]
    counts = rng.geometric(0.85, size=n_random).astype(np.int64)
    levels = np.zeros((p, n_cells), dtype=np.uint8)
    cell_counts = np.empty(n_cells, dtype=np.int64)
    for t, c in enumerate(big_counts):  # single-variable mega-cells
        levels[t, 1 + t] = 1
        cell_counts[1 + t] = c
    base = 1 + len(big_counts)
    levels[:, base:] = rows.T
    cell_counts[base:] = counts
    cell_counts[0] = max(target_n - int(cell_counts[1:].sum()), 1)  # all-zeros
    return CategoricalDataset(levels, cell_counts, np.full(p, 2, dtype=np.int64),
                              _checked=True)


def random_graph_with_edges(p, n_edges, seed):
    """Uniform random graph with exactly n_edges edges."""
    iu, ju = pair_arrays(p)
    if not 0 <= n_edges <= iu.shape[0]:
        raise ValueError(f"edge count {n_edges} out of range")
    rng = rngmod.substream(seed, rngmod.STREAM_GRAPH)
    chosen = rng.choice(iu.shape[0], size=n_edges, replace=False)
    return UndirectedGraph(p, [(int(iu[k]), int(ju[k])) for k in chosen])


# -- recovery metrics ---------------------------------------------------------


def confusion(true_g, est_g):
    """(TP, FP, FN, TN) over the upper triangle."""
    if true_g.p != est_g.p:
        raise ValueError("graphs must share the vertex count")
    iu, ju = np.triu_indices(true_g.p, k=1)
    t = true_g.adj[iu, ju]
    e = est_g.adj[iu, ju]
    tp = int(np.sum(t & e))
    fp = int(np.sum(~t & e))
    fn = int(np.sum(t & ~e))
    tn = int(np.sum(~t & ~e))
    return tp, fp, fn, tn


def f1_score(true_g, est_g):
    """2TP / (2TP + FP + FN); zero when the estimate recovers nothing."""
    tp, fp, fn, _ = confusion(true_g, est_g)
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 1.0


def shd(true_g, est_g):
    """Structural Hamming distance: FP + FN."""
    _, fp, fn, _ = confusion(true_g, est_g)
    return fp + fn


def roc_points(probs, true_g):
    """(FPR, TPR) points from sweeping a threshold over distinct probabilities.

    Includes (0,0) and (1,1). A degenerate truth (empty or complete graph)
    collapses one axis; it is reported with a warning, not an error.
    """
    if probs.shape[0] != true_g.p:
        raise ValueError("probability matrix and graph disagree on vertex count")
    iu, ju = np.triu_indices(true_g.p, k=1)
    scores = probs[iu, ju]
    truth = true_g.adj[iu, ju]
    pos = int(truth.sum())
    neg = truth.shape[0] - pos
    if pos == 0 or neg == 0:
        warnings.warn("true graph is empty or complete; ROC axis is degenerate")
    points = [(0.0, 0.0)]
    for thr in np.unique(scores)[::-1]:
        sel = scores >= thr
        tp = int(np.sum(sel & truth))
        fp = int(np.sum(sel & ~truth))
        points.append((fp / neg if neg else 1.0, tp / pos if pos else 1.0))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return np.asarray(points, dtype=np.float64)


def auc(points):
    """Trapezoidal area under a ROC point sequence."""
    x = points[:, 0]
    y = points[:, 1]
    return float(np.trapezoid(y, x))


# -- the simulation benchmark -------------------------------------------------


@dataclass
class BenchmarkProtocol:
    """One benchmark campaign: kinds x p x n cells, several replicates each."""

    kinds: tuple = ("random", "cluster", "scalefree")
    ps: tuple = (10, 20)
    ns: tuple = (200, 500, 1000)
    replicates: int = 50
    iterations: int = 100_000
    burnin: int = 60_000
    alpha: float = 0.5
    beta: float = 0.5
    weight_low: float = 0.5
    weight_high: float = 1.0
    seed: int = 0
    workers: int = 1
    edge_probs: dict = field(default_factory=lambda: {"random": 0.4, "cluster": 0.6})

    def spec_for(self, kind, p):
        if kind == "scalefree":
            return GraphSpec(kind=kind, p=p, m=1)
        return GraphSpec(kind=kind, p=p, edge_prob=self.edge_probs[kind])


@dataclass
class ReplicateResult:
    kind: str
    p: int
    n: int
    replicate: int
    f1: dict
    shd: dict
    auc_bd: float
    probs_upper: np.ndarray
    true_edges: np.ndarray


_KIND_IDS = {"random": 0, "cluster": 1, "scalefree": 2}


def _replicate_stream_index(kind, p, n, replicate):
    # stable 46-bit encoding; hash() would differ across interpreter sessions
    if not (p < (1 << 12) and n < (1 << 22) and replicate < (1 << 10)):
        raise ValueError("protocol cell too large to encode a replicate seed")
    return (((_KIND_IDS[kind] << 12 | p) << 22 | n) << 10) | replicate


def _run_replicate(protocol, kind, p, n, replicate):
    seed = rngmod.spawn_seed(
        protocol.seed, rngmod.STREAM_BENCH,
        _replicate_stream_index(kind, p, n, replicate),
    )
    spec = protocol.spec_for(kind, p)
    true_g = gen_graph(spec, seed)
    model = sample_mrf_model(true_g, seed, protocol.weight_low, protocol.weight_high)
    data = gen_data(model, n, seed)
    config = samplermod.SamplerConfig(
        iterations=protocol.iterations, burnin=protocol.burnin,
        beta=protocol.beta, alpha=protocol.alpha, seed=seed,
    )
    trace = samplermod.run(data, config)
    probs = edge_inclusion_probs(trace)
    est_bd = median_graph(probs)
    hyper = DirichletHyper(protocol.alpha)
    prior = GraphPrior(protocol.beta)
    hc = hillclimb.hc_learn_full(data, hyper, prior)
    results_f1 = {
        "bdmcmc": f1_score(true_g, est_bd),
        "hc_or": f1_score(true_g, hc.or_graph),
        "hc_and": f1_score(true_g, hc.and_graph),
    }
    results_shd = {
        "bdmcmc": shd(true_g, est_bd),
        "hc_or": shd(true_g, hc.or_graph),
        "hc_and": shd(true_g, hc.and_graph),
    }
    iu, ju = np.triu_indices(p, k=1)
    return ReplicateResult(
        kind=kind, p=p, n=n, replicate=replicate,
        f1=results_f1, shd=results_shd,
        auc_bd=auc(roc_points(probs, true_g)),
        probs_upper=probs[iu, ju].astype(np.float32),
        true_edges=true_g.adj[iu, ju],
    )


def _replicate_star(args):
    return _run_replicate(*args)


def run_benchmark(protocol):
    """Run the full campaign; returns the list of ReplicateResult."""
    jobs = [
        (protocol, kind, p, n, r)
        for kind in protocol.kinds
        for p in protocol.ps
        for n in protocol.ns
        for r in range(protocol.replicates)
    ]
    if protocol.workers > 1:
        with ProcessPoolExecutor(protocol.workers) as pool:
            results = list(pool.map(_replicate_star, jobs))
    else:
        results = [_replicate_star(job) for job in jobs]
    return results


def summarize_benchmark(results):
    """Mean/sd of F1 and SHD per (kind, p, n, method) cell."""
    cells = {}
    for r in results:
        for method in r.f1:
            key = (r.kind, r.p, r.n, method)
            cells.setdefault(key, {"f1": [], "shd": []})
            cells[key]["f1"].append(r.f1[method])
            cells[key]["shd"].append(r.shd[method])
    rows = []
    for (kind, p, n, method), vals in sorted(cells.items()):
        f1s = np.asarray(vals["f1"])
        shds = np.asarray(vals["shd"], dtype=np.float64)
        rows.append({
            "kind": kind, "p": p, "n": n, "method": method,
            "mean_f1": float(f1s.mean()),
            "sd_f1": float(f1s.std(ddof=1)) if f1s.size > 1 else 0.0,
            "mean_shd": float(shds.mean()),
            "sd_shd": float(shds.std(ddof=1)) if shds.size > 1 else 0.0,
        })
    return rows


def write_benchmark_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "p", "n", "method", "mean_f1", "sd_f1",
                         "mean_shd", "sd_shd"])
        for row in rows:
            writer.writerow([
                row["kind"], row["p"], row["n"], row["method"],
                repr(row["mean_f1"]), repr(row["sd_f1"]),
                repr(row["mean_shd"]), repr(row["sd_shd"]),
            ])


def write_roc_csv(results, path):
    """Pooled ROC points per (kind, p, n) cell from BDMCMC edge probabilities."""
    cells = {}
    for r in results:
        cells.setdefault((r.kind, r.p, r.n), []).append(r)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "p", "n", "replicate", "fpr", "tpr"])
        for (kind, p, n), reps in sorted(cells.items()):
            for r in reps:
                probs = np.zeros((p, p))
                iu, ju = np.triu_indices(p, k=1)
                probs[iu, ju] = r.probs_upper
                probs[ju, iu] = r.probs_upper
                true_g = UndirectedGraph(
                    p, [(int(a), int(b)) for a, b in zip(iu[r.true_edges], ju[r.true_edges])]
                )
                for fpr, tpr in roc_points(probs, true_g):
                    writer.writerow([kind, p, n, r.replicate, repr(fpr), repr(tpr)])
