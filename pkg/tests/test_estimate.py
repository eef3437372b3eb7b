import numpy as np
import pytest

from bdmpl.data import from_rows
from bdmpl.estimate import (
    convergence_trace,
    edge_inclusion_probs,
    graph_posterior,
    median_graph,
    read_edge_probs_csv,
    write_edge_probs_csv,
    write_prob_matrix_csv,
)
from bdmpl.graph import UndirectedGraph
from bdmpl.sampler import ChainTrace, SamplerConfig, run

from conftest import random_binary_dataset


def make_trace(p, records, initial_edges=(), burnin=0):
    """Hand-built trace: records are (delta_edge, sign, W) triples."""
    n = len(records)
    return ChainTrace(
        p=p,
        initial_edges=np.array(list(initial_edges), dtype=np.int32).reshape(-1, 2),
        iters=np.arange(n, dtype=np.int64),
        di=np.array([e[0][0] for e in records], dtype=np.int32),
        dj=np.array([e[0][1] for e in records], dtype=np.int32),
        signs=np.array([e[1] for e in records], dtype=np.int8),
        w=np.array([e[2] for e in records], dtype=np.float64),
        edge_counts=_edge_counts(p, records, initial_edges),
        n_iterations=n,
        burnin=burnin,
    )


def _edge_counts(p, records, initial_edges):
    g = UndirectedGraph(p, initial_edges)
    out = []
    for (i, j), _sign, _w in records:
        out.append(g.n_edges)
        g.toggle((i, j))
    return np.array(out, dtype=np.int32)


class TestEdgeProbs:
    def test_direct_example(self):
        # state {e} held for W=3, then e dies and state {} holds W=1:
        # prob(e) = 3 / 4
        trace = make_trace(3, [((0, 1), -1, 3.0), ((0, 2), 1, 1.0)],
                           initial_edges=[(0, 1)])
        probs = edge_inclusion_probs(trace)
        assert probs[0, 1] == 0.75
        assert probs[1, 0] == 0.75
        assert probs[0, 2] == 0.0  # born at the very end: zero holding time

    def test_always_present_is_one(self):
        trace = make_trace(3, [((1, 2), 1, 2.0), ((1, 2), -1, 5.0)],
                           initial_edges=[(0, 1)])
        probs = edge_inclusion_probs(trace)
        assert probs[0, 1] == 1.0

    def test_never_present_is_zero(self):
        trace = make_trace(3, [((0, 1), 1, 2.0)])
        probs = edge_inclusion_probs(trace)
        assert probs[1, 2] == 0.0

    def test_matrix_invariants(self):
        rng = np.random.default_rng(0)
        data = random_binary_dataset(rng, p=5, n=40)
        trace = run(data, SamplerConfig(iterations=300, burnin=50, seed=2))
        probs = edge_inclusion_probs(trace)
        assert probs.shape == (5, 5)
        assert np.array_equal(probs, probs.T)
        assert np.all(np.diag(probs) == 0.0)
        assert np.all((probs >= 0.0) & (probs <= 1.0))

    def test_rescaling_invariance(self):
        records = [((0, 1), -1, 3.0), ((0, 2), 1, 1.0), ((0, 2), -1, 2.5)]
        t1 = make_trace(3, records, initial_edges=[(0, 1)])
        scaled = [(e, s, 7.0 * w) for e, s, w in records]
        t2 = make_trace(3, scaled, initial_edges=[(0, 1)])
        np.testing.assert_allclose(edge_inclusion_probs(t1),
                                   edge_inclusion_probs(t2), rtol=1e-15)

    def test_burnin_handling(self):
        # burn-in iteration holds the edge; post burn-in does not
        trace = make_trace(2, [((0, 1), -1, 5.0), ((0, 1), 1, 1.0)],
                           initial_edges=[(0, 1)], burnin=1)
        assert edge_inclusion_probs(trace)[0, 1] == 0.0
        assert edge_inclusion_probs(trace, skip_burnin=False)[0, 1] == pytest.approx(5 / 6)

    def test_empty_effective_trace_rejected(self):
        trace = make_trace(2, [((0, 1), 1, 1.0)], burnin=0)
        trace.burnin = 1
        with pytest.raises(ValueError):
            edge_inclusion_probs(trace)


class TestMedianGraph:
    def test_threshold(self):
        probs = np.zeros((3, 3))
        probs[0, 1] = probs[1, 0] = 0.6
        probs[0, 2] = probs[2, 0] = 0.4
        assert median_graph(probs).edge_list() == [(0, 1)]

    def test_all_zero(self):
        assert median_graph(np.zeros((4, 4))).n_edges == 0

    def test_strict_inequality(self):
        probs = np.zeros((2, 2))
        probs[0, 1] = probs[1, 0] = 0.5
        assert median_graph(probs, threshold=0.5).n_edges == 0

    def test_custom_threshold(self):
        probs = np.zeros((3, 3))
        probs[0, 1] = probs[1, 0] = 0.95
        probs[1, 2] = probs[2, 1] = 0.85
        assert median_graph(probs, threshold=0.9).edge_list() == [(0, 1)]

    def test_threshold_bounds(self):
        with pytest.raises(ValueError):
            median_graph(np.zeros((2, 2)), threshold=1.0)


class TestGraphPosterior:
    def test_single_graph(self):
        trace = make_trace(2, [((0, 1), 1, 4.0)])
        post = graph_posterior(trace)
        assert post == {(): 1.0}

    def test_two_graphs(self):
        trace = make_trace(2, [((0, 1), 1, 1.0), ((0, 1), -1, 3.0)])
        post = graph_posterior(trace)
        assert post[()] == pytest.approx(0.25)
        assert post[((0, 1),)] == pytest.approx(0.75)

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(5)
        data = random_binary_dataset(rng, p=4, n=30)
        trace = run(data, SamplerConfig(iterations=500, burnin=100, seed=9))
        post = graph_posterior(trace)
        assert sum(post.values()) == pytest.approx(1.0, rel=1e-12)

    def test_marginalizes_to_edge_probs(self):
        rng = np.random.default_rng(6)
        data = random_binary_dataset(rng, p=4, n=30)
        trace = run(data, SamplerConfig(iterations=400, burnin=80, seed=10))
        post = graph_posterior(trace)
        probs = edge_inclusion_probs(trace)
        for i in range(4):
            for j in range(i + 1, 4):
                marginal = sum(prob for g, prob in post.items() if (i, j) in g)
                assert marginal == pytest.approx(probs[i, j], rel=1e-9, abs=1e-12)

    def test_soft_limit(self):
        trace = make_trace(30, [((0, 1), 1, 1.0)])
        with pytest.raises(ValueError, match="allow_large"):
            graph_posterior(trace)
        assert graph_posterior(trace, allow_large=True) == {(): 1.0}


class TestConvergenceTrace:
    def test_constant_graph_is_flat(self):
        # two iterations in the same two-edge state (delta toggles a third
        # edge back and forth is not constant; instead hold by births/deaths
        # of the same edge keeps |E| fixed before each jump)
        trace = make_trace(3, [((0, 1), 1, 2.0), ((0, 1), -1, 1.0),
                               ((0, 1), 1, 2.0), ((0, 1), -1, 1.0)],
                           initial_edges=[(1, 2)])
        its, running, counts = convergence_trace(trace)
        assert list(counts) == [1, 2, 1, 2]
        assert running[0] == 1.0

    def test_final_value_matches_edge_probs(self):
        rng = np.random.default_rng(8)
        data = random_binary_dataset(rng, p=5, n=50)
        trace = run(data, SamplerConfig(iterations=300, seed=12))
        its, running, counts = convergence_trace(trace)
        probs = edge_inclusion_probs(trace, skip_burnin=False)
        assert running[-1] == pytest.approx(np.triu(probs, 1).sum(), rel=1e-9)

    def test_rising_from_empty(self):
        rng = np.random.default_rng(9)
        data = random_binary_dataset(rng, p=5, n=80)
        trace = run(data, SamplerConfig(iterations=200, seed=13))
        its, running, counts = convergence_trace(trace)
        assert counts[0] == 0
        assert running[-1] > running[0]

    def test_bounds(self):
        rng = np.random.default_rng(10)
        data = random_binary_dataset(rng, p=4, n=30)
        trace = run(data, SamplerConfig(iterations=100, seed=14))
        _, running, _ = convergence_trace(trace)
        assert np.all(running >= 0.0)
        assert np.all(running <= 4 * 3 / 2)


class TestExports:
    def test_probs_csv_roundtrip(self, tmp_path):
        probs = np.zeros((3, 3))
        probs[0, 1] = probs[1, 0] = 0.25
        probs[1, 2] = probs[2, 1] = 1 / 3
        path = tmp_path / "probs.csv"
        write_edge_probs_csv(probs, path)
        np.testing.assert_array_equal(read_edge_probs_csv(path), probs)

    def test_matrix_csv_shape(self, tmp_path):
        probs = np.random.default_rng(0).random((4, 4))
        path = tmp_path / "matrix.csv"
        write_prob_matrix_csv(probs, path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 4
        assert len(lines[0].split(",")) == 4
