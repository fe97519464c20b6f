import math

import networkx as nx
import numpy as np
import pytest

from app.config import BUNDLE_CONFIG, LAB_CONFIG
from app.exceptions import InvalidArgumentError
from app.grid import epsilon_ball
from app.network import (
    Network,
    betweenness,
    build_network,
    clustering,
    degrees,
    edge_count_for_density,
    edge_lengths,
    forman_curvature,
    knn_graph,
    link_length_histogram,
    link_length_summary,
    load_network,
    mad_ball,
    measure_report,
    quantile_network,
    shortest_path_lengths,
    threshold_by_density,
    threshold_by_value,
    top_edges,
    zscore_network,
)
from app.similarity import SimilarityMatrix
from app.surrogates import EdgeBaseline
from tests.conftest import random_network


def _random_similarity(p: int, seed: int) -> SimilarityMatrix:
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.uniform(-1, 1, (p, p)), k=1)
    entries = upper + upper.T
    np.fill_diagonal(entries, 1.0)
    return SimilarityMatrix(entries=entries, estimator="pearson_empirical", n=100)


def _network_from_edges(p: int, edges) -> Network:
    adjacency = np.zeros((p, p))
    for i, j in edges:
        adjacency[i, j] = adjacency[j, i] = 1.0
    return Network(adjacency=adjacency)


def _floyd_warshall(adjacency: np.ndarray) -> np.ndarray:
    p = adjacency.shape[0]
    dist = np.where(adjacency > 0, 1.0, np.inf)
    np.fill_diagonal(dist, 0.0)
    for k in range(p):
        dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
    return dist


class TestNetworkType:
    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            Network(adjacency=np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(InvalidArgumentError):
            Network(adjacency=np.eye(2))
        with pytest.raises(InvalidArgumentError):
            Network(adjacency=np.array([[0.0, 0.5], [0.5, 0.0]]))
        with pytest.raises(InvalidArgumentError):
            Network(adjacency=np.array([[0.0, -0.5], [-0.5, 0.0]]), weighted=True)

    def test_edges_and_density(self):
        net = _network_from_edges(4, [(2, 3), (0, 1), (0, 3)])
        assert net.n_edges == 3
        assert net.density == pytest.approx(0.5)
        assert net.edge_set() == {(0, 1), (0, 3), (2, 3)}
        np.testing.assert_array_equal(net.edge_mask(), [True, False, True, False, False, True])

    def test_csv_roundtrip(self, tmp_path):
        adjacency = np.array([[0.0, 0.25, 0.0], [0.25, 0.0, 0.75], [0.0, 0.75, 0.0]])
        net = Network(adjacency=adjacency, weighted=True, metadata={"scheme": "density", "density": 0.5})
        loaded = load_network(net.to_csv(tmp_path / "net.csv"))
        np.testing.assert_array_equal(loaded.adjacency, adjacency)
        assert loaded.weighted
        assert loaded.metadata["scheme"] == "density"

    def test_networkx_roundtrip(self):
        net = random_network(15, 0.3, seed=0)
        back = Network.from_networkx(net.to_networkx())
        np.testing.assert_array_equal(back.adjacency, net.adjacency)


class TestConstruction:
    def test_edge_count_for_density(self):
        assert edge_count_for_density(72, 0.05) == 128
        assert edge_count_for_density(5, 0.1) == 1
        assert edge_count_for_density(10, 1.0) == 45
        with pytest.raises(InvalidArgumentError):
            edge_count_for_density(10, 0.0)

    def test_top_edges_breaks_ties_lexicographically(self):
        values = np.ones((5, 5))
        rows, cols = top_edges(values, 5)
        assert list(zip(rows.tolist(), cols.tolist())) == [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)]

    def test_density_keeps_largest_values(self):
        sim = _random_similarity(20, seed=1)
        net = threshold_by_density(sim, 0.1)
        assert net.n_edges == edge_count_for_density(20, 0.1)
        kept = sim.entries[net.edges()]
        iu = np.triu_indices(20, k=1)
        dropped = sim.entries[iu][~net.edge_mask()]
        assert kept.min() >= dropped.max()
        assert net.metadata["threshold"] == pytest.approx(kept.min())

    def test_density_excludes_flagged_nodes(self):
        sim = _random_similarity(10, seed=2)
        sim.flagged[3] = True
        net = threshold_by_density(sim, 1.0)
        assert degrees(net)[3] == 0
        assert net.n_edges == 36

    def test_weighted_density_stores_magnitudes(self):
        sim = _random_similarity(12, seed=3)
        net = threshold_by_density(sim, 0.2, weighted=True)
        i, j = net.edges()
        np.testing.assert_allclose(net.adjacency[i, j], np.abs(sim.entries[i, j]))

    def test_threshold_by_value(self):
        sim = _random_similarity(15, seed=4)
        net = threshold_by_value(sim, 0.5)
        iu = np.triu_indices(15, k=1)
        np.testing.assert_array_equal(net.edge_mask(), sim.entries[iu] >= 0.5)

    def test_knn_union(self):
        sim = _random_similarity(20, seed=5)
        net = knn_graph(sim, 3)
        assert np.all(degrees(net) >= 3)
        for i in range(20):
            row = sim.entries[i].copy()
            row[i] = -np.inf
            for j in np.argsort(-row)[:3]:
                assert net.adjacency[i, j] == 1.0
        with pytest.raises(InvalidArgumentError):
            knn_graph(sim, 20)

    def test_zscore_with_unit_baseline_equals_density(self):
        sim = _random_similarity(16, seed=6)
        baseline = EdgeBaseline(mean=np.zeros((16, 16)), std=np.ones((16, 16)), quantiles={}, method="shuffle", m=10)
        z = zscore_network(sim, baseline, 0.15)
        np.testing.assert_array_equal(z.adjacency, threshold_by_density(sim, 0.15).adjacency)

    def test_zscore_excludes_degenerate_edges(self):
        sim = _random_similarity(8, seed=7)
        std = np.ones((8, 8))
        std[0, 1] = std[1, 0] = 0.0
        baseline = EdgeBaseline(mean=np.zeros((8, 8)), std=std, quantiles={}, method="shuffle", m=10)
        net = zscore_network(sim, baseline, 1.0)
        assert net.adjacency[0, 1] == 0.0
        assert net.metadata["degenerate_edges"] == 1

    def test_quantile_network(self):
        sim = _random_similarity(10, seed=8)
        q = np.full((10, 10), 0.3)
        baseline = EdgeBaseline(mean=np.zeros((10, 10)), std=np.ones((10, 10)),
                                quantiles={0.95: q}, method="iaaft", m=50)
        net = quantile_network(sim, baseline, 0.95)
        iu = np.triu_indices(10, k=1)
        np.testing.assert_array_equal(net.edge_mask(), sim.entries[iu] > 0.3)
        assert net.metadata["baseline_method"] == "iaaft"

    def test_build_network_dispatch(self):
        sim = _random_similarity(10, seed=9)
        assert build_network(sim, "knn", k=2).metadata["scheme"] == "knn"
        with pytest.raises(InvalidArgumentError):
            build_network(sim, "density")
        with pytest.raises(InvalidArgumentError):
            build_network(sim, "spectral", density=0.1)


class TestMeasures:
    def test_degrees(self):
        net = _network_from_edges(4, [(0, 1), (0, 2), (0, 3)])
        np.testing.assert_array_equal(degrees(net), [3, 1, 1, 1])
        np.testing.assert_allclose(degrees(net, normalized=True), [1.0, 1 / 3, 1 / 3, 1 / 3])

    def test_clustering_matches_triangle_count(self):
        net = random_network(25, 0.3, seed=10)
        a = net.adjacency
        triangles = np.diag(a @ a @ a) / 2.0
        deg = a.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            expected = np.where(deg > 1, 2.0 * triangles / (deg * (deg - 1)), 0.0)
        np.testing.assert_allclose(clustering(net), expected, atol=1e-12)

    def test_betweenness_star_and_path(self):
        star = _network_from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        np.testing.assert_allclose(betweenness(star), [1.0, 0, 0, 0, 0])
        path = _network_from_edges(3, [(0, 1), (1, 2)])
        np.testing.assert_allclose(betweenness(path), [0.0, 1.0, 0.0])

    def test_betweenness_matches_networkx(self):
        net = random_network(30, 0.15, seed=11)
        expected = nx.betweenness_centrality(nx.from_numpy_array(net.adjacency), normalized=True)
        np.testing.assert_allclose(betweenness(net), [expected[i] for i in range(30)])

    def test_shortest_path_matches_floyd_warshall(self):
        net = random_network(20, 0.12, seed=12)
        dist = _floyd_warshall(net.adjacency)
        np.fill_diagonal(dist, np.nan)
        finite = np.isfinite(dist)
        means, unreachable = shortest_path_lengths(net)
        for i in range(20):
            if finite[i].any():
                assert means[i] == pytest.approx(dist[i][finite[i]].mean())
            else:
                assert np.isnan(means[i])
        np.testing.assert_array_equal(unreachable, 19 - finite.sum(axis=1))

    def test_shortest_path_isolated_node(self):
        net = _network_from_edges(3, [(0, 1)])
        means, unreachable = shortest_path_lengths(net)
        assert means[0] == 1.0
        assert np.isnan(means[2])
        np.testing.assert_array_equal(unreachable, [1, 1, 2])

    def test_forman_curvature(self):
        star = _network_from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        np.testing.assert_array_equal(forman_curvature(star), [-1.0] * 4)
        triangle = _network_from_edges(3, [(0, 1), (0, 2), (1, 2)])
        np.testing.assert_array_equal(forman_curvature(triangle), [3.0] * 3)

    def test_link_lengths(self, coarse_grid):
        net = random_network(coarse_grid.size, 0.1, seed=13, grid=coarse_grid)
        lengths = edge_lengths(net, coarse_grid)
        assert lengths.shape == (net.n_edges,)
        _, counts = link_length_histogram(net, coarse_grid, bins=18)
        assert counts.sum() == net.n_edges
        summary = link_length_summary(net, coarse_grid, teleconnection_length=math.pi / 2)
        assert summary["max_length"] == pytest.approx(lengths.max())
        assert summary["teleconnections"] == int((lengths > math.pi / 2).sum())

    def test_normalized_histogram_of_complete_graph(self, coarse_grid):
        complete = np.ones((72, 72)) - np.eye(72)
        net = Network(adjacency=complete, grid=coarse_grid)
        _, ratio = link_length_histogram(net, coarse_grid, bins=12, normalized_by_available=True)
        assert np.all((ratio == 1.0) | (ratio == 0.0))
        assert ratio.max() == 1.0

    def test_empty_network_summary(self, coarse_grid):
        net = Network(adjacency=np.zeros((72, 72)), grid=coarse_grid)
        assert link_length_summary(net, coarse_grid) == {"mean_length": 0.0, "max_length": 0.0, "teleconnections": 0}

    def test_mad_ball_uniform_degree(self, coarse_grid):
        complete = Network(adjacency=np.ones((72, 72)) - np.eye(72))
        mad, shuffled, ratio = mad_ball(complete, coarse_grid, math.radians(40.0), shuffles=10)
        assert mad == pytest.approx(71.0)
        assert ratio == pytest.approx(1.0)

    def test_mad_ball_empty_network(self, coarse_grid):
        empty = Network(adjacency=np.zeros((72, 72)))
        assert mad_ball(empty, coarse_grid, 0.5, shuffles=5) == (0.0, 0.0, 1.0)
        with pytest.raises(InvalidArgumentError):
            mad_ball(empty, coarse_grid, 0.0)

    def test_mad_ball_detects_local_hub_cluster(self, coarse_grid):
        net = random_network(72, 0.05, seed=14)
        adjacency = net.adjacency.copy()
        hub = sorted(epsilon_ball(coarse_grid, 30, math.radians(35.0)))
        for i in hub:
            adjacency[i, :] = adjacency[:, i] = 1.0
            adjacency[i, i] = 0.0
        clustered = Network(adjacency=adjacency)
        _, _, ratio = mad_ball(clustered, coarse_grid, math.radians(35.0), seed=1, shuffles=50)
        assert ratio > 1.0

    def test_mad_radius_defaults_to_its_own_config(self, coarse_grid):
        assert LAB_CONFIG["mad_eps"] == pytest.approx(math.radians(10.0))
        assert LAB_CONFIG["mad_eps"] != BUNDLE_CONFIG["eps"]
        net = random_network(72, 0.1, seed=17, grid=coarse_grid)
        assert mad_ball(net, coarse_grid, seed=3, shuffles=5) == mad_ball(
            net, coarse_grid, math.radians(10.0), seed=3, shuffles=5)
        report = measure_report(net, coarse_grid, measures=["mad"], seed=3, shuffles=5)
        assert report.scalars["mad_ratio"] == mad_ball(net, coarse_grid, seed=3, shuffles=5)[2]

    def test_measure_report(self, coarse_grid):
        net = random_network(72, 0.1, seed=15, grid=coarse_grid)
        report = measure_report(net, coarse_grid, shuffles=5)
        for column in ("degree", "clustering", "betweenness", "mean_shortest_path"):
            assert column in report.nodes
        assert {"length", "curvature"} <= set(report.edges.columns)
        assert report.scalars["n_edges"] == net.n_edges
        assert "link_length_normalized" in report.histograms
        with pytest.raises(InvalidArgumentError):
            measure_report(net, coarse_grid, measures=["pagerank"])

    def test_measure_report_files(self, tmp_path, coarse_grid):
        net = random_network(72, 0.1, seed=16, grid=coarse_grid)
        report = measure_report(net, coarse_grid, measures=["degree", "curvature"])
        report.to_json(tmp_path / "report.json")
        report.to_csv(tmp_path)
        assert (tmp_path / "nodes.csv").exists() and (tmp_path / "edges.csv").exists()
