import numpy as np
import pytest

from swarmform.graphs import (
    MultiLeaderDigraph,
    build_graph,
    degree_bounds,
    format_edge_list,
    max_degree_bound,
    parse_edge_list,
    spanning_tree_decomposition,
)

P3 = [(0, 1), (1, 2)]
K4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _random_connected(rng, n, p=0.6):
    """Seeded moderately dense Erdos-Renyi graph, redrawn until connected."""
    while True:
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                 if rng.random() < p]
        if not edges:
            continue
        g = build_graph(n, edges)
        if g.connected:
            return g


def test_p3_spectrum():
    g = build_graph(3, P3)
    eigs = np.sort(np.linalg.eigvalsh(g.laplacian))
    assert np.allclose(eigs, [0.0, 1.0, 3.0], atol=1e-12)
    assert np.allclose(np.sort(g.d_plus), [1.0, 3.0], atol=1e-12)


def test_single_vertex():
    g = build_graph(1, [])
    assert g.incidence.shape == (1, 0)
    assert g.laplacian.shape == (1, 1) and g.laplacian[0, 0] == 0.0
    assert g.connected


def test_k4_spectra():
    g = build_graph(4, K4)
    assert np.allclose(np.sort(g.d_plus), [4.0, 4.0, 4.0], atol=1e-12)
    edge_eigs = np.sort(np.linalg.eigvalsh(g.edge_laplacian))
    assert np.allclose(edge_eigs, [0.0, 0.0, 0.0, 4.0, 4.0, 4.0], atol=1e-12)


def test_incidence_columns():
    g = build_graph(4, [(2, 0), (3, 1)])  # orientation normalized to tail=min
    for j in range(g.n_edges):
        col = g.incidence[:, j]
        assert np.sum(col == -1.0) == 1 and np.sum(col == 1.0) == 1
        tail, head = g.edges[j]
        assert tail < head
        assert col[tail] == -1.0 and col[head] == 1.0


def test_duplicate_and_invalid_edges():
    with pytest.raises(ValueError, match="duplicate"):
        build_graph(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError, match="self loop"):
        build_graph(3, [(1, 1)])
    with pytest.raises(ValueError, match="out of range"):
        build_graph(3, [(0, 3)])


def test_disconnected_flagged():
    g = build_graph(4, [(0, 1), (2, 3)])
    assert not g.connected
    with pytest.raises(ValueError, match="connected"):
        spanning_tree_decomposition(g)


def test_tree_decomposition_trivial():
    g = build_graph(4, [(0, 1), (1, 2), (1, 3)])
    dec = spanning_tree_decomposition(g)
    assert dec.t_tau_c.shape == (3, 0)
    assert np.allclose(dec.r, np.eye(3))


@pytest.mark.parametrize("edges", [[(0, 1), (1, 2), (0, 2)], K4])
def test_tree_decomposition_reconstructs(edges):
    n = max(max(e) for e in edges) + 1
    g = build_graph(n, edges)
    dec = spanning_tree_decomposition(g)
    e_c = g.incidence[:, list(dec.chord_cols)]
    assert np.max(np.abs(dec.e_tau @ dec.t_tau_c - e_c)) < 1e-12
    reordered = g.incidence[:, list(dec.tree_cols) + list(dec.chord_cols)]
    assert np.max(np.abs(dec.e_tau @ dec.r - reordered)) < 1e-12


def test_degree_bounds():
    assert degree_bounds(build_graph(3, P3)) == (1, 2)
    assert degree_bounds(build_graph(4, K4)) == (3, 3)
    star = build_graph(6, [(0, k) for k in range(1, 6)])
    assert degree_bounds(star) == (1, 5)


def test_eigenvalue_degree_window_random_graphs():
    """min D+ >= 2 delta / n and max D+ <= 2 Delta on dense random graphs.

    The window holds for moderately dense connected graphs; sparse stringy
    graphs can violate the lower side (see the companion counterexample).
    """
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 100:
        n = int(rng.integers(2, 13))
        g = _random_connected(rng, n)
        d_min, d_max = degree_bounds(g)
        eigs = np.sort(np.linalg.eigvalsh(g.laplacian))[1:]
        assert eigs[0] >= 2.0 * d_min / g.n - 1e-9
        assert eigs[-1] <= 2.0 * d_max + 1e-9
        assert np.allclose(np.sort(g.d_plus), eigs, atol=1e-9)
        checked += 1


def test_degree_window_fails_on_long_paths():
    """The lower degree bound is not universal: the 5-path violates it."""
    g = build_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    d_min, _ = degree_bounds(g)
    lam2 = np.sort(np.linalg.eigvalsh(g.laplacian))[1]
    assert lam2 < 2.0 * d_min / g.n  # 0.382 < 0.4


def test_vplus_projector_identity():
    rng = np.random.default_rng(11)
    for _ in range(20):
        g = _random_connected(rng, int(rng.integers(3, 10)))
        e_t = g.incidence.T
        residual = np.max(np.abs(g.v_plus @ (g.v_plus.T @ e_t) - e_t))
        assert residual < 1e-10


def test_edge_list_round_trip():
    text = format_edge_list(K4)
    assert parse_edge_list(text) == K4
    assert parse_edge_list("# comment\n0 1\n\n2 3\n") == [(0, 1), (2, 3)]
    with pytest.raises(ValueError, match="line 1"):
        parse_edge_list("0 1 2")


def test_multi_leader_digraph_validation():
    adj = np.zeros((4, 4), dtype=int)
    adj[0, 1] = adj[0, 2] = 1
    dg = MultiLeaderDigraph(
        n=4, leaders=(0,), groups={0: [0, 1, 2]},
        group_edges={0: [(0, 1), (0, 2), (1, 2)]}, adjacency=adj,
    )
    dg.validate(n_fl_max=2, n_lf_max=2)
    assert dg.undirected_edges == ((0, 1), (0, 2), (1, 2))
    assert dg.neighbor_sets()[0] == [1, 2]
    with pytest.raises(ValueError, match="follower cap"):
        dg.validate(n_fl_max=1, n_lf_max=2)
    shared = MultiLeaderDigraph(
        n=4, leaders=(0, 3), groups={0: [0, 1], 3: [3, 1]},
        group_edges={0: [(0, 1)], 3: [(0, 1)]}, adjacency=np.zeros((4, 4), int),
    )
    with pytest.raises(ValueError, match="two groups"):
        shared.validate(2, 2)


def test_max_degree_bound_formula():
    assert max_degree_bound(2, 2) == 6
    assert max_degree_bound(5, 5) == 30
