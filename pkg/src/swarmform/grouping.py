"""Centralized multi-leader grouping on the normalized swarm frame.

Leaders are visited in descending Delaunay-degree order; each collects
followers among its triangulation neighbors within the controllable radius,
most-at-risk (smallest relaxed connectable time) first, subject to the
follower and following caps. Group-internal edges are the triangulation
edges between members, never shared between groups.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, QhullError

from swarmform.frames import J2Context, rot_shat_from_o
from swarmform.graphs import MultiLeaderDigraph
from swarmform.relorbit import connectable_time_relaxed_array

log = logging.getLogger(__name__)

DEFAULT_INTERVALS = (300.0, 600.0, 1200.0, 2400.0)
"""Regrouping intervals (s) over the four quarters of a run."""


@dataclass
class GroupingConfig:
    """Caps and scheduling for the grouping step.

    n_f_max caps followers per group, n_lf_max how many leaders one
    satellite may follow, n_fl_max the digraph's follower row sum.
    schedule optionally overrides the default quartile intervals with
    (start_time, interval) pairs. trim_hull_quantile, when set, drops
    triangulation hull edges longer than that quantile of all edge lengths.
    """

    r_s: float
    n_f_max: int = 5
    n_lf_max: int = 5
    n_fl_max: int = 5
    schedule: tuple | None = None
    trim_hull_quantile: float | None = None

    def validate(self, orbital_period: float | None = None) -> None:
        if self.r_s <= 0.0:
            raise ValueError("r_s must be positive")
        if self.n_f_max < 3:
            raise ValueError("n_f_max must be at least 3 (triangulation edge count)")
        if min(self.n_lf_max, self.n_fl_max) < 1:
            raise ValueError("follower/following caps must be at least 1")
        intervals = [iv for _, iv in self.schedule] if self.schedule else list(DEFAULT_INTERVALS)
        if any(iv <= 0.0 for iv in intervals):
            raise ValueError("grouping intervals must be positive")
        if orbital_period is not None:
            if abs(intervals[0] - orbital_period) < 0.02 * orbital_period:
                raise ValueError(
                    "initial grouping interval coincides with the orbital period; "
                    "the initial distorted formation would persist"
                )


def grouping_scheduler(t: float, t_end: float, schedule: tuple | None = None) -> float:
    """Regrouping interval in force at time t of a run ending at t_end."""
    if not 0.0 <= t <= t_end:
        raise ValueError(f"t={t} outside [0, {t_end}]")
    if schedule:
        current = schedule[0][1]
        for start, interval in sorted(schedule):
            if start <= t:
                current = interval
        return float(current)
    quarter = t / t_end
    if quarter < 0.25:
        return DEFAULT_INTERVALS[0]
    if quarter < 0.5:
        return DEFAULT_INTERVALS[1]
    if quarter < 0.75:
        return DEFAULT_INTERVALS[2]
    return DEFAULT_INTERVALS[3]


def _chain_adjacency(pts: np.ndarray) -> np.ndarray:
    """Path graph along the principal direction (degenerate fallback)."""
    n = len(pts)
    adj = np.zeros((n, n), dtype=bool)
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    proj = centered @ vt[0]
    order = sorted(range(n), key=lambda i: (proj[i], i))
    for a, b in zip(order[:-1], order[1:]):
        adj[a, b] = adj[b, a] = True
    return adj


def delaunay_yz(positions_shat: np.ndarray) -> np.ndarray:
    """Symmetric adjacency of the 2-D Delaunay triangulation in the y-z plane.

    Exact duplicate points receive a deterministic index-scaled perturbation
    before triangulating; fully collinear inputs fall back to a path graph,
    fewer than 3 points to a chain.
    """
    pts = np.asarray(positions_shat, dtype=float)[:, 1:3].copy()
    n = len(pts)
    adj = np.zeros((n, n), dtype=bool)
    if n <= 1:
        return adj
    if n == 2:
        adj[0, 1] = adj[1, 0] = True
        return adj
    scale = max(float(np.ptp(pts, axis=0).max()), 1.0)
    seen: dict = {}
    for i in range(n):
        key = (float(pts[i, 0]), float(pts[i, 1]))
        count = seen.get(key, 0)
        seen[key] = count + 1
        if count:
            pts[i] += 1e-9 * scale * count * np.array([1.0, float(count)])
    try:
        tri = Delaunay(pts)
    except QhullError:
        return _chain_adjacency(pts)
    for simplex in tri.simplices:
        for i in range(3):
            a, b = simplex[i], simplex[(i + 1) % 3]
            adj[a, b] = adj[b, a] = True
    return adj


def _trim_long_hull_edges(adj: np.ndarray, pts: np.ndarray, quantile: float) -> None:
    """Drop hull edges longer than the quantile of all triangulation edges."""
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return
    pairs = np.argwhere(np.triu(adj, 1))
    if pairs.size == 0:
        return
    lengths = np.linalg.norm(pts[pairs[:, 0]] - pts[pairs[:, 1]], axis=1)
    cutoff = float(np.quantile(lengths, quantile))
    hv = hull.vertices
    for a, b in zip(hv, np.roll(hv, -1)):
        if adj[a, b] and np.linalg.norm(pts[a] - pts[b]) > cutoff:
            adj[a, b] = adj[b, a] = False


def centralized_grouping(
    positions_o: np.ndarray,
    params: np.ndarray,
    cfg: GroupingConfig,
    plane,
    ctx: J2Context,
) -> MultiLeaderDigraph:
    """Build the multi-leader digraph for the current swarm configuration.

    positions_o are LVLH positions (N, 3); params (6, N) are the orbital
    parameters against a common reference (only differences are used).
    Deterministic: all orderings tie-break on the satellite index; infinite
    connectable times sort last. Satellites with no admissible neighbor
    remain singleton groups.
    """
    pos_o = np.asarray(positions_o, dtype=float)
    params = np.asarray(params, dtype=float)
    n = pos_o.shape[0]
    pos_shat = rot_shat_from_o(plane, ctx).apply(pos_o)
    adj = delaunay_yz(pos_shat)
    if cfg.trim_hull_quantile is not None and n >= 4:
        _trim_long_hull_edges(adj, pos_shat[:, 1:3], cfg.trim_hull_quantile)

    deg = adj.sum(axis=1)
    leader_order = sorted(range(n), key=lambda v: (-int(deg[v]), v))
    follower_cap = min(cfg.n_f_max, cfg.n_fl_max)
    follow_count = np.zeros(n, dtype=int)
    used_edges: set = set()
    a_mat = np.zeros((n, n), dtype=int)
    leaders: list = []
    groups: dict = {}
    group_edges: dict = {}
    c1, c4 = params[0], params[3]
    skipped_over_cap = 0

    for lead in leader_order:
        leaders.append(lead)
        members = [lead]
        tvals = connectable_time_relaxed_array(c1 - c1[lead], c4 - c4[lead], cfg.r_s, ctx)
        for f in sorted(range(n), key=lambda v: (tvals[v], v)):
            if f == lead or not adj[lead, f]:
                continue
            if np.linalg.norm(pos_o[lead] - pos_o[f]) > cfg.r_s:
                continue
            if follow_count[f] >= cfg.n_lf_max:
                skipped_over_cap += 1
                continue
            members.append(f)
            follow_count[f] += 1
            a_mat[lead, f] = 1
            if len(members) - 1 >= follower_cap:
                break
        edges = []
        for i1 in range(len(members)):
            for i2 in range(i1 + 1, len(members)):
                a, b = min(members[i1], members[i2]), max(members[i1], members[i2])
                if adj[a, b] and (a, b) not in used_edges:
                    used_edges.add((a, b))
                    edges.append((a, b))
        groups[lead] = members
        group_edges[lead] = sorted(edges)

    if skipped_over_cap:
        log.debug("grouping skipped %d over-cap follower candidates", skipped_over_cap)
    digraph = MultiLeaderDigraph(
        n=n,
        leaders=tuple(leaders),
        groups=groups,
        group_edges=group_edges,
        adjacency=a_mat,
    )
    digraph.validate(cfg.n_fl_max, cfg.n_lf_max)
    return digraph
