import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compressed_pd.topology import (
    DisconnectedGraphError,
    Topology,
    complete_graph,
    is_connected,
    laplacian,
    path_graph,
    random_geometric_graph,
    read_edge_list,
    spectral_bounds,
    write_edge_list,
)


def test_laplacian_small_graphs():
    np.testing.assert_array_equal(path_graph(3).laplacian, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
    np.testing.assert_array_equal(complete_graph(3).laplacian, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])
    np.testing.assert_array_equal(laplacian(np.zeros((1, 1))), [[0]])


@pytest.mark.parametrize(
    "A",
    [
        np.array([[0, 1], [2, 0]]),
        np.array([[0, -1], [-1, 0]]),
        np.array([[1, 1], [1, 0]]),
        np.array([[0, np.nan], [np.nan, 0]]),
        np.zeros((2, 3)),
    ],
)
def test_bad_adjacency(A):
    with pytest.raises(ValueError):
        laplacian(A)


def test_spectral_bounds_closed_forms():
    assert spectral_bounds(complete_graph(4).laplacian) == pytest.approx((4, 4))
    assert spectral_bounds(path_graph(3).laplacian) == pytest.approx((1, 3))
    assert spectral_bounds(path_graph(2).laplacian) == pytest.approx((2, 2))
    # path graph eigenvalues are 2 - 2 cos(pi j / n)
    n = 7
    rho2, rho = spectral_bounds(path_graph(n).laplacian)
    assert rho2 == pytest.approx(2 - 2 * math.cos(math.pi / n))
    assert rho == pytest.approx(2 - 2 * math.cos(math.pi * (n - 1) / n))


def test_disconnected_spectrum_rejected():
    A = np.zeros((2, 2))
    with pytest.raises(DisconnectedGraphError):
        spectral_bounds(laplacian(A))
    with pytest.raises(DisconnectedGraphError):
        spectral_bounds(np.zeros((1, 1)))
    assert math.isnan(Topology(A).rho)


def test_connectivity():
    assert is_connected(path_graph(5))
    assert not is_connected(np.zeros((2, 2)))
    assert is_connected(complete_graph(20))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.floats(0.3, 1.4), st.integers(0, 2**32 - 1))
def test_rgg_properties(n, radius, seed):
    topo = random_geometric_graph(n, radius, np.random.default_rng(seed), max_retries=10_000)
    L = topo.laplacian
    np.testing.assert_allclose(L.sum(axis=1), 0, atol=1e-12)
    np.testing.assert_array_equal(L, L.T)
    assert topo.rho2 > 0
    assert is_connected(topo)
    # BFS and the spectrum agree on connectivity
    assert np.sum(np.linalg.eigvalsh(L) < 1e-9 * topo.rho) == 1


def test_rgg_edge_cases():
    topo = random_geometric_graph(2, math.sqrt(2), np.random.default_rng(0))
    assert topo.edges == [(0, 1, 1.0)]
    with pytest.raises(DisconnectedGraphError):
        random_geometric_graph(5, 1e-4, np.random.default_rng(0), max_retries=10)


def test_rgg_deterministic():
    a = random_geometric_graph(20, 0.5, np.random.default_rng(7))
    b = random_geometric_graph(20, 0.5, np.random.default_rng(7))
    np.testing.assert_array_equal(a.adjacency, b.adjacency)


def test_scaled_rescales_spectrum():
    topo = random_geometric_graph(10, 0.6, np.random.default_rng(1))
    s = topo.scaled(0.01 / topo.rho)
    assert s.rho == pytest.approx(0.01)
    assert s.rho2 == pytest.approx(topo.rho2 * 0.01 / topo.rho)


def test_edge_list_round_trip(tmp_path):
    topo = random_geometric_graph(12, 0.5, np.random.default_rng(3)).scaled(0.0123)
    path = tmp_path / "g.txt"
    write_edge_list(topo, path)
    back = read_edge_list(path)
    np.testing.assert_array_equal(back.adjacency, topo.adjacency)
