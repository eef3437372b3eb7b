import numpy as np
import pytest

from bdmpl.analysis import (
    betweenness,
    centrality_report,
    closeness,
    degree,
    pagerank,
    top_k,
    write_centrality_csv,
)
from bdmpl.graph import UndirectedGraph, complete_graph


def star(p):
    return UndirectedGraph(p, [(0, j) for j in range(1, p)])


def path3():
    return UndirectedGraph(3, [(0, 1), (1, 2)])


class TestDegree:
    def test_star(self):
        d = degree(star(5))
        assert d[0] == 4
        assert list(d[1:]) == [1, 1, 1, 1]

    def test_empty(self):
        assert list(degree(UndirectedGraph(4))) == [0, 0, 0, 0]


class TestCloseness:
    def test_complete_graph_symmetric(self):
        c = closeness(complete_graph(5))
        assert np.allclose(c, c[0])
        assert c[0] == pytest.approx(4.0)  # four neighbors at distance 1

    def test_path_middle_largest(self):
        c = closeness(path3())
        assert c[1] > c[0]
        assert c[0] == pytest.approx(1.0 + 0.5)
        assert c[1] == pytest.approx(2.0)

    def test_isolated_vertex_is_zero(self):
        g = UndirectedGraph(3, [(0, 1)])
        assert closeness(g)[2] == 0.0

    def test_disconnected_well_defined(self):
        g = UndirectedGraph(4, [(0, 1), (2, 3)])
        c = closeness(g)
        assert np.all(c == 1.0)


class TestBetweenness:
    def test_path_center(self):
        b = betweenness(path3())
        assert list(b) == [0.0, 1.0, 0.0]

    def test_complete_graph_all_zero(self):
        assert np.all(betweenness(complete_graph(5)) == 0.0)

    def test_star_center(self):
        # oracle: every one of the C(4,2) = 6 leaf pairs routes through the hub
        b = betweenness(star(5))
        assert b[0] == pytest.approx(6.0)
        assert np.all(b[1:] == 0.0)

    def test_low_degree_vertices_score_zero(self):
        g = UndirectedGraph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
        b = betweenness(g)
        assert b[0] == 0.0 and b[5] == 0.0


class TestPagerank:
    def test_regular_graph_uniform(self):
        # a 4-cycle is 2-regular: page rank is exactly uniform
        g = UndirectedGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        pr = pagerank(g)
        assert np.allclose(pr, 0.25, atol=1e-9)

    def test_empty_graph_uniform(self):
        pr = pagerank(UndirectedGraph(5))
        assert np.allclose(pr, 0.2, atol=1e-12)

    def test_star_center_largest(self):
        pr = pagerank(star(6))
        assert np.argmax(pr) == 0

    def test_sums_to_one_positive(self):
        g = UndirectedGraph(7, [(0, 1), (2, 3), (3, 4), (5, 6), (0, 6)])
        pr = pagerank(g)
        assert pr.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(pr > 0)

    def test_nonconvergence_warns(self):
        with pytest.warns(UserWarning, match="converge"):
            pagerank(star(4), max_iter=2)


class TestReportAndRanking:
    def test_top_k_star(self):
        report = centrality_report(star(5))
        for measure in ("degree", "closeness", "betweenness", "pagerank"):
            assert top_k(report, measure, 1) == [0]

    def test_top_k_full_ordering_with_stable_ties(self):
        report = centrality_report(UndirectedGraph(4, [(0, 1), (2, 3)]))
        assert top_k(report, "degree", 4) == [0, 1, 2, 3]

    def test_k_bounds(self):
        report = centrality_report(star(4))
        with pytest.raises(ValueError):
            top_k(report, "degree", 0)
        with pytest.raises(ValueError):
            top_k(report, "degree", 5)

    def test_unknown_measure(self):
        report = centrality_report(star(4))
        with pytest.raises(ValueError):
            top_k(report, "eigenvector", 1)

    def test_isomorphism_invariance(self):
        rng = np.random.default_rng(0)
        g = UndirectedGraph(7, [(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (5, 6),
                                (1, 6)])
        perm = rng.permutation(7)
        relabeled = UndirectedGraph(7, [(int(perm[i]), int(perm[j]))
                                        for i, j in g.edge_list()])
        for fn, tol in ((degree, 0), (closeness, 1e-12), (betweenness, 1e-9),
                        (pagerank, 1e-9)):
            a = fn(g)
            b = fn(relabeled)
            np.testing.assert_allclose(a, b[perm], atol=tol)

    def test_csv_export(self, tmp_path):
        report = centrality_report(star(4), labels=["hub", "a", "b", "c"])
        path = tmp_path / "cent.csv"
        write_centrality_csv(report, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "vertex,label,degree,closeness,betweenness,pagerank"
        assert len(lines) == 5
        assert lines[1].startswith("0,hub,3,")

    def test_label_count_checked(self):
        with pytest.raises(ValueError):
            centrality_report(star(4), labels=["x"])
