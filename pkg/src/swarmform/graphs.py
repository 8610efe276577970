"""Algebraic graph machinery for the swarm communication topology.

Incidence matrices, Laplacians and their spectra, spanning-tree
decomposition, and the multi-leader digraph bookkeeping used by the
grouping step. Graphs are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SwarmGraph:
    """Undirected communication graph with its spectral decompositions.

    Edges are oriented tail -> head with tail = smaller vertex index, so
    identical edge lists yield identical incidence matrices. d_plus holds
    the nonzero Laplacian eigenvalues in descending order with the matching
    singular-vector bases u_plus (vertex space) and v_plus (edge space).
    """

    n: int
    edges: tuple
    incidence: np.ndarray       # (n, p), columns with one -1 (tail), one +1 (head)
    laplacian: np.ndarray       # (n, n)
    edge_laplacian: np.ndarray  # (p, p)
    connected: bool
    u_plus: np.ndarray          # (n, r)
    sigma_plus: np.ndarray      # (r,)
    v_plus: np.ndarray          # (p, r)
    d_plus: np.ndarray          # (r,) nonzero eigenvalues, descending

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        return np.diag(self.laplacian).copy()


def build_graph(n: int, edges) -> SwarmGraph:
    """Build a SwarmGraph from a vertex count and an edge list.

    Edges may be given in either orientation; self loops and duplicate
    undirected edges are rejected. Disconnected graphs are allowed and
    flagged (the spanning-tree decomposition is then unavailable).
    """
    if n < 1:
        raise ValueError("graph needs at least one vertex")
    oriented = []
    seen = set()
    for a, b in edges:
        a, b = int(a), int(b)
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"edge ({a},{b}) out of range for n={n}")
        if a == b:
            raise ValueError(f"self loop at vertex {a}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise ValueError(f"duplicate edge {key}")
        seen.add(key)
        oriented.append(key)
    p = len(oriented)
    e_mat = np.zeros((n, p))
    for j, (tail, head) in enumerate(oriented):
        e_mat[tail, j] = -1.0
        e_mat[head, j] = 1.0
    lap = e_mat @ e_mat.T
    edge_lap = e_mat.T @ e_mat

    if p > 0:
        u, sv, vt = np.linalg.svd(e_mat, full_matrices=False)
        rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0])))
        u_plus = u[:, :rank]
        sigma_plus = sv[:rank]
        v_plus = vt[:rank].T
    else:
        rank = 0
        u_plus = np.zeros((n, 0))
        sigma_plus = np.zeros(0)
        v_plus = np.zeros((0, 0))

    return SwarmGraph(
        n=n,
        edges=tuple(oriented),
        incidence=e_mat,
        laplacian=lap,
        edge_laplacian=edge_lap,
        connected=(rank == n - 1),
        u_plus=u_plus,
        sigma_plus=sigma_plus,
        v_plus=v_plus,
        d_plus=sigma_plus**2,
    )


@dataclass(frozen=True)
class TreeDecomposition:
    """Spanning-tree split of the incidence matrix: E = E_tau [I, T_tau_c]."""

    e_tau: np.ndarray      # (n, n-1) tree-edge incidence
    t_tau_c: np.ndarray    # (n-1, p-n+1) chord coefficients
    r: np.ndarray          # (n-1, p) = [I, T_tau_c]
    tree_cols: tuple       # edge indices forming the tree, ascending
    chord_cols: tuple      # remaining edge indices, ascending


def spanning_tree_decomposition(g: SwarmGraph) -> TreeDecomposition:
    """Decompose a connected graph's incidence matrix over a spanning tree.

    The tree is grown breadth-first from vertex 0 with neighbors visited in
    ascending index order, so the decomposition is deterministic. Chord
    columns satisfy E_tau @ T_tau_c = E_c.
    """
    if not g.connected:
        raise ValueError("spanning-tree decomposition requires a connected graph")
    adj = [[] for _ in range(g.n)]
    for j, (a, b) in enumerate(g.edges):
        adj[a].append((b, j))
        adj[b].append((a, j))
    for lst in adj:
        lst.sort()
    visited = [False] * g.n
    visited[0] = True
    queue = [0]
    tree_cols: list[int] = []
    while queue:
        v = queue.pop(0)
        for w, j in adj[v]:
            if not visited[w]:
                visited[w] = True
                tree_cols.append(j)
                queue.append(w)
    tree_cols = sorted(tree_cols)
    chord_cols = sorted(set(range(g.n_edges)) - set(tree_cols))
    e_tau = g.incidence[:, tree_cols]
    e_c = g.incidence[:, chord_cols]
    gram = e_tau.T @ e_tau
    t_tau_c = np.linalg.solve(gram, e_tau.T @ e_c) if chord_cols else np.zeros((g.n - 1, 0))
    r = np.hstack([np.eye(g.n - 1), t_tau_c])
    return TreeDecomposition(e_tau, t_tau_c, r, tuple(tree_cols), tuple(chord_cols))


def degree_bounds(g: SwarmGraph):
    """(minimum, maximum) vertex degree, read off the Laplacian diagonal."""
    deg = g.degrees()
    return int(deg.min()), int(deg.max())


def max_degree_bound(n_lf_max: int, n_fl_max: int) -> int:
    """Degree cap implied by the follower/following limits."""
    return (n_lf_max + 1) * n_fl_max


@dataclass(frozen=True)
class MultiLeaderDigraph:
    """Leader/follower structure produced by the centralized grouping.

    adjacency[l, f] = 1 when f follows l, so row sums count a leader's
    followers and column sums count how many leaders a satellite follows.
    group_edges holds each group's undirected communication edges; no edge
    belongs to two groups.
    """

    n: int
    leaders: tuple
    groups: dict
    group_edges: dict
    adjacency: np.ndarray

    @property
    def undirected_edges(self) -> tuple:
        out = set()
        for edges in self.group_edges.values():
            out.update(edges)
        return tuple(sorted(out))

    def neighbor_sets(self) -> list:
        """Per-satellite neighbor lists under the grouped undirected edges."""
        neigh = [set() for _ in range(self.n)]
        for a, b in self.undirected_edges:
            neigh[a].add(b)
            neigh[b].add(a)
        return [sorted(s) for s in neigh]

    def validate(self, n_fl_max: int, n_lf_max: int) -> None:
        """Check the structural caps; raises ValueError on violation."""
        row = self.adjacency.sum(axis=1)
        col = self.adjacency.sum(axis=0)
        if row.max(initial=0) > n_fl_max:
            raise ValueError(f"follower cap exceeded: max row sum {row.max()}")
        if col.max(initial=0) > n_lf_max:
            raise ValueError(f"following cap exceeded: max column sum {col.max()}")
        seen = set()
        for edges in self.group_edges.values():
            for e in edges:
                if e in seen:
                    raise ValueError(f"edge {e} appears in two groups")
                seen.add(e)
        deg = np.zeros(self.n, dtype=int)
        for a, b in self.undirected_edges:
            deg[a] += 1
            deg[b] += 1
        cap = max_degree_bound(n_lf_max, n_fl_max)
        if deg.max(initial=0) > cap:
            raise ValueError(f"max degree {deg.max()} exceeds the structural cap {cap}")


def parse_edge_list(text: str) -> list:
    """Parse the fixture format: one '<tail> <head>' pair per line, 0-based."""
    edges = []
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {ln}: expected 'tail head', got {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return edges


def format_edge_list(edges) -> str:
    return "\n".join(f"{a} {b}" for a, b in edges) + "\n"
