"""Birth-death MCMC over the space of undirected graphs.

Each unordered pair e carries a jump rate

    R_e(G) = min{ exp(D_i + D_j + delta log(beta/(1-beta))), 1 }

where D_v is the change of vertex v's local log score when the edge toggles
and delta is +1 for a birth, -1 for a death. The chain holds in state G for
waiting time W(G) = 1 / sum_e R_e(G), jumps by toggling an edge picked with
probability proportional to its rate, and only the 2p-3 rates incident to
the toggled endpoints change, so those are the only ones recomputed. The
toggled endpoint scores computed during rate evaluation become the new
per-vertex current scores, which keeps the incremental path bit-identical
to a full recomputation.

Rates within an iteration are pure functions of an immutable
(graph, dataset, cache) snapshot and may be evaluated on several threads;
results are written slot-wise and summed in fixed pair order, so thread
count never changes output. Theoretical rates lie in (0, 1]; a rate whose
log falls below roughly -745 underflows to float 0.0, which only removes it
from the jump lottery.
"""

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data import CategoricalDataset
from .graph import GraphPrior, UndirectedGraph, canonical_edge, pair_arrays, pair_index
from .rng import STREAM_JUMPS, STREAM_START, STREAM_TIES, substream
from .score import DirichletHyper, MplScorer


class RateVector:
    """Rates for every unordered pair, plus the per-vertex current scores and
    the toggled endpoint scores that each rate evaluation produced."""

    __slots__ = ("p", "rates", "new_lo", "new_hi", "vertex_scores")

    def __init__(self, p):
        n_pairs = p * (p - 1) // 2
        self.p = p
        self.rates = np.zeros(n_pairs, dtype=np.float64)
        self.new_lo = np.zeros(n_pairs, dtype=np.float64)
        self.new_hi = np.zeros(n_pairs, dtype=np.float64)
        self.vertex_scores = np.zeros(p, dtype=np.float64)

    @property
    def n_pairs(self):
        return self.rates.shape[0]

    def total(self):
        return kernels.total_rate(self.rates)

    def copy(self):
        out = RateVector.__new__(RateVector)
        out.p = self.p
        out.rates = self.rates.copy()
        out.new_lo = self.new_lo.copy()
        out.new_hi = self.new_hi.copy()
        out.vertex_scores = self.vertex_scores.copy()
        return out

    def is_birth(self, graph):
        """Boolean tag per pair: True where the rate is a birth rate."""
        iu, ju = pair_arrays(self.p)
        return ~graph.adj[iu, ju]


def _log_rate(s_i, s_j, cur_i, cur_j, dlpr):
    return min(s_i + s_j - cur_i - cur_j + dlpr, 0.0)


def _without(nbd, v):
    return tuple(x for x in nbd if x != v)


class BdSampler:
    """Owns one chain: graph, rate vector, scorer, and counters.

    `rate_score_requests` counts local-score evaluations requested by rate
    computations (two per rate); cache hits count too, since the counter
    tracks the algorithm's work complexity, not memoization luck.
    """

    def __init__(self, data, graph=None, hyper=None, prior=None, scorer=None,
                 threads=1, _defer_rates=False):
        self.data = data
        self.scorer = scorer if scorer is not None else MplScorer(data, hyper)
        self.prior = prior if prior is not None else GraphPrior(0.5)
        self.graph = graph.copy() if graph is not None else UndirectedGraph(data.p)
        if self.graph.p != data.p:
            raise ValueError(f"graph has {self.graph.p} vertices, data has {data.p}")
        self.threads = max(1, int(threads))
        self.pair_i, self.pair_j = pair_arrays(data.p)
        self.rates = RateVector(data.p)
        self.rate_score_requests = 0
        self._pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None
        if not _defer_rates:
            self.rebuild_rates()

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- rate evaluation ---------------------------------------------------

    def _compute_pair(self, k):
        i = int(self.pair_i[k])
        j = int(self.pair_j[k])
        g = self.graph
        rv = self.rates
        nbd_i = g.neighbors_tuple(i)
        nbd_j = g.neighbors_tuple(j)
        if g.adj[i, j]:
            s_i = self.scorer.local(i, _without(nbd_i, j))
            s_j = self.scorer.local(j, _without(nbd_j, i))
            dlpr = -self.prior.log_ratio
        else:
            s_i = self.scorer.local_extended(i, nbd_i, j)
            s_j = self.scorer.local_extended(j, nbd_j, i)
            dlpr = self.prior.log_ratio
        lr = _log_rate(s_i, s_j, rv.vertex_scores[i], rv.vertex_scores[j], dlpr)
        rv.rates[k] = math.exp(lr)
        rv.new_lo[k] = s_i
        rv.new_hi[k] = s_j

    def _compute_pairs(self, indices):
        # two endpoint scores per rate; counted here, on the owning thread
        self.rate_score_requests += 2 * len(indices)
        if self._pool is None or len(indices) < 2 * self.threads:
            for k in indices:
                self._compute_pair(k)
            return
        chunk = (len(indices) + self.threads - 1) // self.threads

        def work(part):
            for k in part:
                self._compute_pair(k)

        futures = [
            self._pool.submit(work, indices[a:a + chunk])
            for a in range(0, len(indices), chunk)
        ]
        for f in futures:
            f.result()

    def rebuild_rates(self):
        """Recompute every rate from scratch (one per unordered pair)."""
        for v in range(self.data.p):
            self.rates.vertex_scores[v] = self.scorer.local(v, self.graph.neighbors_tuple(v))
        self._compute_pairs(range(self.rates.n_pairs))

    def _incident_pairs(self, vertices):
        p = self.data.p
        seen = set()
        out = []
        for v in vertices:
            for k in range(p):
                if k == v:
                    continue
                idx = pair_index(p, v, k)
                if idx not in seen:
                    seen.add(idx)
                    out.append(idx)
        out.sort()
        return out

    def apply_toggle(self, i, j):
        """Toggle edge (i, j) and refresh exactly the 2p-3 incident rates.

        The stored toggled scores for the chosen pair are promoted to the
        new current vertex scores, so no extra score evaluation is needed.
        """
        i, j = canonical_edge((i, j))
        k = pair_index(self.data.p, i, j)
        self.rates.vertex_scores[i] = self.rates.new_lo[k]
        self.rates.vertex_scores[j] = self.rates.new_hi[k]
        self.graph.toggle((i, j))
        self._compute_pairs(self._incident_pairs((i, j)))

    # -- chain steps ---------------------------------------------------------

    def step(self, u):
        """One birth-death jump driven by the uniform u.

        Returns (waiting_time, edge, sign) where sign is +1 for birth.
        """
        idx, total = kernels.pick_edge(self.rates.rates, u)
        if not total > 0.0:
            raise RuntimeError(
                "total jump rate underflowed to zero; the chain cannot move"
            )
        w = 1.0 / total
        i = int(self.pair_i[idx])
        j = int(self.pair_j[idx])
        sign = -1 if self.graph.adj[i, j] else 1
        self.apply_toggle(i, j)
        return w, (i, j), sign

    def multi_step(self, n0, tie_rng):
        """Toggle the n0 highest-rate edges in one iteration.

        Ties are broken by a seeded uniform draw per pair. This mode carries
        no stationarity guarantee; it exists to warm-start single-edge runs.
        """
        n_pairs = self.rates.n_pairs
        if not 2 <= n0 <= n_pairs:
            raise ValueError(f"n0 must lie in [2, {n_pairs}], got {n0}")
        total = self.rates.total()
        if not total > 0.0:
            raise RuntimeError("total jump rate underflowed to zero")
        w = 1.0 / total
        ties = tie_rng.random(n_pairs)
        order = np.lexsort((ties, -self.rates.rates))
        chosen = order[:n0]
        deltas = []
        touched = set()
        for k in chosen:
            i = int(self.pair_i[k])
            j = int(self.pair_j[k])
            sign = -1 if self.graph.adj[i, j] else 1
            self.graph.toggle((i, j))
            deltas.append(((i, j), sign))
            touched.add(i)
            touched.add(j)
        for v in sorted(touched):
            self.rates.vertex_scores[v] = self.scorer.local(v, self.graph.neighbors_tuple(v))
        self._compute_pairs(self._incident_pairs(sorted(touched)))
        return w, deltas


# -- functional operation surface -------------------------------------------


def edge_log_rate(data, g, e, hyper=None, prior=None, scorer=None):
    """log R_e(G): zero when the toggle improves the posterior, else the
    log posterior ratio. Only the two endpoint local scores are evaluated."""
    i, j = canonical_edge(e)
    if prior is None:
        prior = GraphPrior(0.5)
    if scorer is None:
        scorer = MplScorer(data, hyper, use_cache=False)
    nbd_i = g.neighbors_tuple(i)
    nbd_j = g.neighbors_tuple(j)
    cur_i = scorer.local(i, nbd_i)
    cur_j = scorer.local(j, nbd_j)
    if g.adj[i, j]:
        s_i = scorer.local(i, _without(nbd_i, j))
        s_j = scorer.local(j, _without(nbd_j, i))
        dlpr = -prior.log_ratio
    else:
        s_i = scorer.local_extended(i, nbd_i, j)
        s_j = scorer.local_extended(j, nbd_j, i)
        dlpr = prior.log_ratio
    return _log_rate(s_i, s_j, cur_i, cur_j, dlpr)


def edge_rate(data, g, e, hyper=None, prior=None, scorer=None):
    """Birth rate of e if absent from g, death rate if present."""
    return math.exp(edge_log_rate(data, g, e, hyper, prior, scorer))


def full_rates(data, g, hyper=None, prior=None, scorer=None, threads=1):
    """Rate vector with one entry per unordered pair of vertices."""
    sampler = BdSampler(data, graph=g, hyper=hyper, prior=prior, scorer=scorer,
                        threads=threads)
    try:
        return sampler.rates
    finally:
        sampler.close()


def incremental_rates(prev, toggled, data, g_new, hyper=None, prior=None,
                      scorer=None, threads=1):
    """Rate vector for g_new given rates for the graph one toggle away.

    Recomputes only the (p-1) + (p-1) - 1 = 2p-3 entries incident to the
    toggled endpoints; equals full_rates(g_new) exactly.
    """
    if prev.p != g_new.p or prev.p != data.p:
        raise ValueError("rate vector, graph, and data disagree on vertex count")
    i, j = canonical_edge(toggled)
    sampler = BdSampler(data, graph=g_new, hyper=hyper, prior=prior, scorer=scorer,
                        threads=threads, _defer_rates=True)
    try:
        rv = prev.copy()
        sampler.rates = rv
        rv.vertex_scores[i] = sampler.scorer.local(i, g_new.neighbors_tuple(i))
        rv.vertex_scores[j] = sampler.scorer.local(j, g_new.neighbors_tuple(j))
        sampler._compute_pairs(sampler._incident_pairs((i, j)))
        return rv
    finally:
        sampler.close()


def bd_step(state, rng, data, hyper=None, prior=None, scorer=None, threads=1):
    """One jump from state = (graph, rates); returns (graph', rates', W, edge).

    Inputs are not mutated.
    """
    graph, rates = state
    sampler = BdSampler(data, graph=graph, hyper=hyper, prior=prior, scorer=scorer,
                        threads=threads, _defer_rates=True)
    try:
        sampler.rates = rates.copy()
        w, edge, _sign = sampler.step(rng.random())
        return sampler.graph, sampler.rates, w, edge
    finally:
        sampler.close()


def multi_bd_step(state, n0, rng, data, hyper=None, prior=None, scorer=None,
                  threads=1):
    """Multiple-edge update: returns (graph', rates', W, deltas)."""
    graph, rates = state
    sampler = BdSampler(data, graph=graph, hyper=hyper, prior=prior, scorer=scorer,
                        threads=threads, _defer_rates=True)
    try:
        sampler.rates = rates.copy()
        w, deltas = sampler.multi_step(n0, rng)
        return sampler.graph, sampler.rates, w, deltas
    finally:
        sampler.close()


# -- chain configuration and trace -------------------------------------------


@dataclass
class SamplerConfig:
    """Run parameters. start may be "empty", "full", "prior", or a graph."""

    iterations: int
    burnin: int = 0
    beta: float = 0.5
    alpha: float = 0.5
    seed: int = 0
    mode: str = "single"
    n0: int = 2
    threads: int = 1
    start: object = "empty"
    cache: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if not 0 <= self.burnin < self.iterations:
            raise ValueError("burn-in must be shorter than the run")
        if self.mode not in ("single", "multiple"):
            raise ValueError(f"unknown update mode {self.mode!r}")
        if self.mode == "multiple" and self.n0 < 2:
            raise ValueError("multiple-edge mode needs n0 >= 2")


@dataclass
class ChainTrace:
    """Delta-encoded chain output.

    Row r records that the chain spent waiting time w[r] in the state whose
    edge count is edge_counts[r], then toggled (di[r], dj[r]) with signs[r]
    (+1 birth, -1 death). Rows of a multiple-edge iteration share the
    iteration index and waiting time. Reconstruction starts from
    initial_edges and applies deltas in row order.
    """

    p: int
    initial_edges: np.ndarray
    iters: np.ndarray
    di: np.ndarray
    dj: np.ndarray
    signs: np.ndarray
    w: np.ndarray
    edge_counts: np.ndarray
    n_iterations: int
    burnin: int
    meta: dict = field(default_factory=dict)

    @property
    def n_rows(self):
        return self.iters.shape[0]

    def iteration_waits(self):
        """Waiting time per iteration (first row of each iteration)."""
        first = np.ones(self.n_rows, dtype=bool)
        first[1:] = self.iters[1:] != self.iters[:-1]
        return self.w[first]

    def jump_times(self):
        """Cumulative jump time per row; constant within an iteration."""
        first = np.ones(self.n_rows, dtype=bool)
        first[1:] = self.iters[1:] != self.iters[:-1]
        contrib = np.where(first, self.w, 0.0)
        return np.cumsum(contrib)

    def initial_graph(self):
        return UndirectedGraph(self.p, [tuple(e) for e in self.initial_edges])

    def graph_at(self, iteration):
        """State occupied during the given iteration (before its deltas)."""
        g = self.initial_graph()
        for r in range(self.n_rows):
            if self.iters[r] >= iteration:
                break
            g.toggle((int(self.di[r]), int(self.dj[r])))
        return g

    def final_graph(self):
        g = self.initial_graph()
        for r in range(self.n_rows):
            g.toggle((int(self.di[r]), int(self.dj[r])))
        return g


def run(data, config):
    """Run the chain; returns a ChainTrace of config.iterations records."""
    if not isinstance(data, CategoricalDataset):
        raise TypeError("run expects a CategoricalDataset")
    prior = GraphPrior(config.beta)
    hyper = DirichletHyper(config.alpha)
    scorer = MplScorer(data, hyper, use_cache=config.cache)
    start = _resolve_start(config.start, data.p, config.beta, config.seed)
    n = config.iterations
    jump_u = substream(config.seed, STREAM_JUMPS).random(n)
    rows_per_iter = 1 if config.mode == "single" else config.n0
    n_rows = n * rows_per_iter
    iters = np.empty(n_rows, dtype=np.int64)
    di = np.empty(n_rows, dtype=np.int32)
    dj = np.empty(n_rows, dtype=np.int32)
    signs = np.empty(n_rows, dtype=np.int8)
    w = np.empty(n_rows, dtype=np.float64)
    edge_counts = np.empty(n_rows, dtype=np.int32)
    initial_edges = np.array(start.edge_list(), dtype=np.int32).reshape(-1, 2)
    with BdSampler(data, graph=start, prior=prior, scorer=scorer,
                   threads=config.threads) as sampler:
        row = 0
        for m in range(n):
            count_before = sampler.graph.n_edges
            if config.mode == "single":
                wm, (i, j), sign = sampler.step(jump_u[m])
                iters[row] = m
                di[row] = i
                dj[row] = j
                signs[row] = sign
                w[row] = wm
                edge_counts[row] = count_before
                row += 1
            else:
                tie_rng = substream(config.seed, STREAM_TIES, index=m)
                wm, deltas = sampler.multi_step(config.n0, tie_rng)
                for (i, j), sign in deltas:
                    iters[row] = m
                    di[row] = i
                    dj[row] = j
                    signs[row] = sign
                    w[row] = wm
                    edge_counts[row] = count_before
                    row += 1
    return ChainTrace(
        p=data.p,
        initial_edges=initial_edges,
        iters=iters[:row],
        di=di[:row],
        dj=dj[:row],
        signs=signs[:row],
        w=w[:row],
        edge_counts=edge_counts[:row],
        n_iterations=n,
        burnin=config.burnin,
        meta={
            "beta": config.beta,
            "alpha": config.alpha,
            "mode": config.mode,
            "n0": config.n0 if config.mode == "multiple" else 0,
            "seed": config.seed,
            "threads": config.threads,
            "kernel_backend": kernels.BACKEND,
        },
    )


def _resolve_start(start, p, beta, seed):
    if isinstance(start, UndirectedGraph):
        if start.p != p:
            raise ValueError("starting graph has wrong vertex count")
        return start.copy()
    if start == "empty":
        return UndirectedGraph(p)
    if start == "full":
        return UndirectedGraph(p, [(i, j) for i in range(p) for j in range(i + 1, p)])
    if start == "prior":
        rng = substream(seed, STREAM_START)
        iu, ju = pair_arrays(p)
        mask = rng.random(iu.shape[0]) < beta
        return UndirectedGraph(p, [(int(a), int(b)) for a, b in zip(iu[mask], ju[mask])])
    raise ValueError(f"unknown start {start!r}")


# -- trace persistence --------------------------------------------------------

_TRACE_COLUMNS = ("iteration", "jump_time", "waiting_time", "delta_edge_i",
                  "delta_edge_j", "delta_sign", "edge_count")


def write_trace_csv(trace, path):
    t = trace.jump_times()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# p={trace.p}\n")
        fh.write(f"# iterations={trace.n_iterations}\n")
        fh.write(f"# burnin={trace.burnin}\n")
        for key in ("beta", "alpha", "mode", "n0", "seed"):
            if key in trace.meta:
                fh.write(f"# {key}={trace.meta[key]}\n")
        for i, j in trace.initial_edges:
            fh.write(f"# init_edge={int(i)} {int(j)}\n")
        writer = csv.writer(fh)
        writer.writerow(_TRACE_COLUMNS)
        for r in range(trace.n_rows):
            writer.writerow([
                int(trace.iters[r]),
                repr(float(t[r])),
                repr(float(trace.w[r])),
                int(trace.di[r]),
                int(trace.dj[r]),
                int(trace.signs[r]),
                int(trace.edge_counts[r]),
            ])


def read_trace_csv(path):
    meta = {}
    init_edges = []
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    key = key.strip()
                    if key == "init_edge":
                        a, b = value.split()
                        init_edges.append((int(a), int(b)))
                    else:
                        meta[key] = value.strip()
                continue
            if line.startswith(_TRACE_COLUMNS[0]):
                continue
            if line:
                rows.append(line.split(","))
    if "p" not in meta:
        raise ValueError(f"{path}: missing '# p=' metadata")
    arr = np.array(rows, dtype=object)
    return ChainTrace(
        p=int(meta["p"]),
        initial_edges=np.array(init_edges, dtype=np.int32).reshape(-1, 2),
        iters=arr[:, 0].astype(np.int64),
        di=arr[:, 3].astype(np.int32),
        dj=arr[:, 4].astype(np.int32),
        signs=arr[:, 5].astype(np.int8),
        w=arr[:, 2].astype(np.float64),
        edge_counts=arr[:, 6].astype(np.int32),
        n_iterations=int(meta.get("iterations", int(arr[-1, 0]) + 1)),
        burnin=int(meta.get("burnin", 0)),
        meta={k: v for k, v in meta.items() if k not in ("p", "iterations", "burnin")},
    )


def write_trace_npz(trace, path):
    np.savez_compressed(
        path,
        p=trace.p,
        initial_edges=trace.initial_edges,
        iters=trace.iters,
        di=trace.di,
        dj=trace.dj,
        signs=trace.signs,
        w=trace.w,
        edge_counts=trace.edge_counts,
        n_iterations=trace.n_iterations,
        burnin=trace.burnin,
    )


def read_trace_npz(path):
    with np.load(path) as z:
        return ChainTrace(
            p=int(z["p"]),
            initial_edges=z["initial_edges"].reshape(-1, 2),
            iters=z["iters"],
            di=z["di"],
            dj=z["dj"],
            signs=z["signs"],
            w=z["w"],
            edge_counts=z["edge_counts"],
            n_iterations=int(z["n_iterations"]),
            burnin=int(z["burnin"]),
        )


def read_trace(path):
    path = str(path)
    if path.endswith(".npz"):
        return read_trace_npz(path)
    return read_trace_csv(path)
