"""Scenario orchestration: seeded initialization, closed-loop runs, metrics.

A run advances one of three models (nonlinear truth, linearized, averaged
parameter space) under the selected controller, regroups the communication
graph on the scheduler's epochs, and appends per-tick records. Identical
configuration and seed reproduce the log bit for bit.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from swarmform import dynamics, grouping, stabilizer
from swarmform.frames import I_REF_DEFAULT, J2Context, R_REF_DEFAULT, build_context
from swarmform.graphs import MultiLeaderDigraph, SwarmGraph, build_graph
from swarmform.relorbit import connectable_time_relaxed_array
from swarmform.stabilizer import BarrierViolation, GainSet
from swarmform.targets import SwarmPlane, make_plane

log = logging.getLogger(__name__)

MODELS = ("truth_j2", "linearized", "averaged_params")
CONTROLLERS = ("main", "opp", "none")
INIT_KINDS = ("dense", "large_c1", "small_c1")


class SimulationBlowUp(RuntimeError):
    """Raised when any state magnitude exceeds the blow-up threshold."""


@dataclass
class ScenarioConfig:
    """Full description of one simulation scenario."""

    n_sats: int
    t_end: float
    model: str = "truth_j2"
    controller: str = "main"
    r_ref: float = R_REF_DEFAULT
    i_ref: float = I_REF_DEFAULT
    theta_p: float = math.radians(30.0)
    theta_zxy: float = 0.0
    r_avg: float = 0.5
    r_s: float = 1.0
    f_bar: float | None = 5.0e-7
    mass: float = 0.5
    sat_side: float = 0.1
    dt: float | None = None          # default: 1 s truth/linearized, 10 s averaged
    rng_seed: int = 0
    init: str = "dense"
    k_a: float = 1.5e-2
    k_b: float | None = None         # default: k_a
    k_z: float | None = None         # default: k_a
    gamma_a: float = 1.0
    r_xy_min: float | None = None    # default: sat_side * sqrt(3)
    gains: GainSet | None = None     # explicit gains override degree derivation
    gains_profile: str = "derived"   # 'derived' or 'comparison'
    grouping: grouping.GroupingConfig | None = None
    grouping_once: bool = False
    log_every: float | None = None   # default: every tick
    delta_i_warn: float = 1.0e-6
    # Closed-loop barrier clamp. A moderate value keeps out-of-window edges
    # under bounded repulsion/contraction without letting the clamped
    # branch monopolize the saturated force budget.
    s_clamp: float = 50.0

    def resolved_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        return 10.0 if self.model == "averaged_params" else 1.0

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.controller not in CONTROLLERS:
            raise ValueError(f"unknown controller {self.controller!r}")
        if self.init not in INIT_KINDS:
            raise ValueError(f"unknown init kind {self.init!r}")
        if self.gains_profile not in ("derived", "comparison"):
            raise ValueError(f"unknown gains profile {self.gains_profile!r}")
        min_sats = 1 if self.controller == "none" else 2
        if self.n_sats < min_sats:
            raise ValueError(f"n_sats={self.n_sats} below the minimum {min_sats}")
        for name in ("t_end", "r_avg", "r_s", "mass", "sat_side", "k_a"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.f_bar is not None and self.f_bar <= 0.0:
            raise ValueError("f_bar must be positive or None")
        if self.resolved_dt() <= 0.0:
            raise ValueError("dt must be positive")


@dataclass
class RunLog:
    """Per-tick records of one run plus grouping snapshots."""

    schema: int
    config: ScenarioConfig
    ref_idx: int
    times: np.ndarray            # (T,)
    states: np.ndarray           # (T, N, 6) relative LVLH states
    params_rel: np.ndarray       # (T, 6, N) parameters versus the reference satellite
    inputs: np.ndarray           # (T, N, 3) applied accelerations
    tconn: np.ndarray            # (T, N) relaxed connectable time versus the reference
    v_all: np.ndarray            # (T,) collective potential, NaN when not computable
    barrier_violations: np.ndarray  # (T,) clamped-edge count at each record
    groupings: list              # [(t, MultiLeaderDigraph)]
    plane_estimates: list        # [(t, theta_p, theta_zxy, rms)] per grouping epoch
    delta_i_max: float


def params_array_from_states(states: np.ndarray, ctx: J2Context) -> np.ndarray:
    """Vectorized parameter extraction; states (N, 6) -> params (6, N)."""
    states = np.atleast_2d(states)
    x, y, z, vx, vy, vz = (states[:, i] for i in range(6))
    xb, yb = ctx.c_plus * x, ctx.c_minus * y
    vxb, vyb = ctx.c_plus * vx, ctx.c_minus * vy
    w = ctx.omega_xy
    c1 = ctx.c_plus / ctx.c_minus**2 * (2.0 * xb + vyb / w)
    c3 = xb - 2.0 * ctx.c_plus * c1
    c4 = (yb - 2.0 * vxb / w) / ctx.c_minus
    c2 = (yb - ctx.c_minus * c4) / 2.0
    c5 = vz / ctx.omega_zref
    c6 = z
    return np.stack([c1, c2, c3, c4, c5, c6])


def states_array_from_params(params: np.ndarray, ctx: J2Context) -> np.ndarray:
    """Instantaneous states of given parameters; params (6, N) -> states (N, 6)."""
    c1, c2, c3, c4, c5, c6 = params
    w = ctx.omega_xy
    x = 2.0 * c1 + c3 / ctx.c_plus
    y = c4 + 2.0 * c2 / ctx.c_minus
    z = c6
    vx = w * c2 / ctx.c_plus
    vy = -ctx.epsilon_2 * c1 - 2.0 * w * c3 / ctx.c_minus
    vz = ctx.omega_zref * c5
    return np.stack([x, y, z, vx, vy, vz], axis=1)


def init_swarm(cfg: ScenarioConfig, ctx: J2Context):
    """Seeded initial parameters; returns (params (6, N), ref_idx).

    One reference satellite is chosen uniformly and pinned to the origin;
    the rest draw c1/c4 from the scenario box and c2/c3/c5/c6 from the
    +-r_s/10 box, rejection-sampled against the periodic-extent constraint
    4 r_xy^2 + r_z^2 <= r_s^2.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.rng_seed)
    n = cfg.n_sats
    ref = int(rng.integers(n))
    box_c1 = {"dense": 0.5 * cfg.r_s, "large_c1": 0.5 * cfg.r_s, "small_c1": 0.025 * cfg.r_s}
    box_c4 = {"dense": cfg.r_s, "large_c1": 2.5 * cfg.r_s, "small_c1": 2.5 * cfg.r_s}
    amp = cfg.r_s / 10.0
    params = np.zeros((6, n))
    for j in range(n):
        if j == ref:
            continue
        c1 = rng.uniform(-box_c1[cfg.init], box_c1[cfg.init])
        c4 = rng.uniform(-box_c4[cfg.init], box_c4[cfg.init])
        for attempt in range(1000):
            c2, c3, c5, c6 = rng.uniform(-amp, amp, size=4)
            if 4.0 * (c2**2 + c3**2) + c5**2 + c6**2 <= cfg.r_s**2:
                break
        else:
            raise RuntimeError("periodic-extent rejection sampling failed; check the boxes")
        params[:, j] = (c1, c2, c3, c4, c5, c6)
    return params, ref


def _positions_from(params: np.ndarray, states: np.ndarray | None, ctx: J2Context) -> np.ndarray:
    if states is not None:
        return states[:, :3]
    return states_array_from_params(params, ctx)[:, :3]


def scenario_gains(cfg: ScenarioConfig, edges, n: int, plane: SwarmPlane,
                   ctx: J2Context) -> GainSet:
    """Gains in force for a scenario under a given communication edge set.

    Mirrors the run loop's per-epoch derivation so offline analysis can
    reproduce logged quantities exactly.
    """
    r_xy_min = cfg.r_xy_min if cfg.r_xy_min is not None else cfg.sat_side * math.sqrt(3.0)
    if cfg.gains is not None:
        g = cfg.gains
        return dataclasses.replace(g, r_xyd=plane.r_xyd) if g.r_xyd <= 0.0 else g
    if cfg.gains_profile == "comparison":
        return dataclasses.replace(
            stabilizer.comparison_gains(cfg.k_a, ctx, k_z=cfg.k_z),
            r_xyd=plane.r_xyd, r_xy_min=r_xy_min,
        )
    deg = np.zeros(n, dtype=int)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    d_min = max(1, int(deg.min(initial=1)))
    d_max = max(d_min, int(deg.max(initial=1)))
    return stabilizer.derive_gains(
        d_min, d_max, n, cfg.k_a, ctx,
        gamma_a=cfg.gamma_a,
        k_b=cfg.k_a if cfg.k_b is None else cfg.k_b,
        k_z=cfg.k_z,
        r_xy_min=r_xy_min,
        r_xyd=plane.r_xyd,
    )


def _feedforward_z(params: np.ndarray, ref: int, plane: SwarmPlane, ctx: J2Context) -> np.ndarray:
    """Per-satellite cross-track feedforward, evaluated at the current phase."""
    rel = params - params[:, [ref]]
    r_xy = np.hypot(rel[1], rel[2])
    theta_z = np.arctan2(rel[5], rel[4])
    slope = math.sqrt(1.0 + 3.0 * math.sin(plane.theta_zxy) ** 2) / math.tan(plane.theta_p)
    r_zd = r_xy * slope
    wz, w = ctx.omega_zref, ctx.omega_xy
    return r_zd * (wz * wz - w * w) * np.sin(theta_z)


def _control_accels(params: np.ndarray, edge_tail, edge_head, gains: GainSet,
                    plane: SwarmPlane, ctx: J2Context, law: str, ref: int,
                    s_clamp: float = stabilizer.S_CLAMP_DEFAULT):
    """Accelerations (N, 3) from the edge controller plus z feedforward."""
    n = params.shape[1]
    u = np.zeros((n, 3))
    viol = 0
    if len(edge_tail):
        rel = params[:, edge_tail] - params[:, edge_head]
        u_edge, viol = stabilizer.edge_control(rel, gains, plane, ctx, law, s_clamp=s_clamp)
        np.add.at(u, edge_tail, u_edge.T)
        np.add.at(u, edge_head, -u_edge.T)
    u[:, 2] += _feedforward_z(params, ref, plane, ctx)
    return u, viol


def run(cfg: ScenarioConfig) -> RunLog:
    """Execute one scenario; deterministic for a given config and seed."""
    cfg.validate()
    ctx = build_context(cfg.r_ref, cfg.i_ref)
    plane = make_plane(cfg.theta_p, cfg.theta_zxy, cfg.r_avg, ctx)
    gcfg = cfg.grouping or grouping.GroupingConfig(r_s=cfg.r_s)
    gcfg.validate(orbital_period=ctx.period_xy)
    dt = cfg.resolved_dt()
    n_steps = int(round(cfg.t_end / dt))
    if abs(n_steps * dt - cfg.t_end) > 1e-9 * max(1.0, cfg.t_end):
        raise ValueError("t_end must be an integer multiple of dt")
    log_every = cfg.log_every if cfg.log_every is not None else dt
    stride = max(1, int(round(log_every / dt)))

    params, ref = init_swarm(cfg, ctx)
    states = None
    if cfg.model in ("truth_j2", "linearized"):
        states = states_array_from_params(params, ctx)

    rel0 = params - params[:, [ref]]
    vz_rel0 = ctx.omega_zref * rel0[4]
    delta_i = np.abs(vz_rel0) / (ctx.omega_zref * ctx.r_ref)
    delta_i_max = float(delta_i.max(initial=0.0))
    if delta_i_max > cfg.delta_i_warn:
        log.warning("differential-inclination proxy %.3e exceeds %.3e",
                    delta_i_max, cfg.delta_i_warn)

    times, recs_state, recs_params, recs_u, recs_tconn = [], [], [], [], []
    recs_vall, recs_viol = [], []
    groupings: list = []
    plane_estimates: list = []

    digraph = None
    graph: SwarmGraph | None = None
    gains = cfg.gains
    edge_tail = np.zeros(0, dtype=int)
    edge_head = np.zeros(0, dtype=int)
    next_group_step = 0
    blow_limit = 1.0e6 * cfg.r_s

    for step in range(n_steps + 1):
        t = step * dt
        if step == next_group_step and (not cfg.grouping_once or not groupings):
            pos = _positions_from(params, states, ctx)
            digraph = grouping.centralized_grouping(pos, params, gcfg, plane, ctx)
            groupings.append((t, digraph))
            if cfg.n_sats >= 3:
                try:
                    fit = metrics_plane_fit(pos - pos.mean(axis=0), ctx)
                    plane_estimates.append((t, fit.theta_p, fit.theta_zxy, fit.rms_offplane))
                except ValueError:
                    plane_estimates.append((t, math.nan, math.nan, math.nan))
            edges = digraph.undirected_edges
            edge_tail = np.array([a for a, _ in edges], dtype=int)
            edge_head = np.array([b for _, b in edges], dtype=int)
            graph = build_graph(cfg.n_sats, edges)
            if cfg.gains is None or gains is None:
                gains = scenario_gains(cfg, edges, cfg.n_sats, plane, ctx)
            interval = grouping.grouping_scheduler(t, cfg.t_end, gcfg.schedule)
            next_group_step = step + max(1, int(round(interval / dt)))

        if cfg.controller == "none":
            u_acc = np.zeros((cfg.n_sats, 3))
            viol = 0
        else:
            u_cmd, viol = _control_accels(params, edge_tail, edge_head, gains,
                                          plane, ctx, cfg.controller, ref,
                                          s_clamp=cfg.s_clamp)
            if cfg.f_bar is not None:
                u_acc = stabilizer.saturate(cfg.mass * u_cmd, cfg.f_bar, cfg.mass)
            else:
                u_acc = u_cmd

        if step % stride == 0 or step == n_steps:
            rel = params - params[:, [ref]]
            times.append(t)
            recs_state.append(states.copy() if states is not None
                              else states_array_from_params(params, ctx))
            recs_params.append(rel)
            recs_u.append(u_acc.copy())
            recs_tconn.append(connectable_time_relaxed_array(rel[0], rel[3], cfg.r_s, ctx))
            if cfg.controller != "none" and graph is not None:
                # evaluated on reference-relative parameters (translation
                # invariant) so offline recomputation from the logs is exact
                try:
                    v_all, _ = stabilizer.lyapunov_value(rel, graph, gains, ctx)
                except BarrierViolation:
                    v_all = math.nan
            else:
                v_all = math.nan
            recs_vall.append(v_all)
            recs_viol.append(viol)

        if step == n_steps:
            break

        if cfg.model == "averaged_params":
            zeros = np.zeros((3, cfg.n_sats))
            rhs = lambda tt, pp: dynamics.param_rhs(pp, u_acc.T, zeros, ctx)
            params = dynamics.rk4_step(rhs, t, params, dt)
            check = params
        elif cfg.model == "truth_j2":
            rhs = lambda tt, yy: dynamics.relative_truth_rhs(tt, yy, u_acc, ctx)
            states = dynamics.rk4_step(rhs, t, states, dt)
            params = params_array_from_states(states, ctx)
            check = states
        else:
            rhs = lambda tt, yy: dynamics.linearized_rhs(yy, u_acc, 0.0, ctx)
            states = dynamics.rk4_step(rhs, t, states, dt)
            params = params_array_from_states(states, ctx)
            check = states
        if not np.all(np.isfinite(check)) or np.max(np.abs(check)) > blow_limit:
            raise SimulationBlowUp(f"state magnitude exceeded {blow_limit:g} at t={t + dt:g} s")

    return RunLog(
        schema=1,
        config=cfg,
        ref_idx=ref,
        times=np.array(times),
        states=np.stack(recs_state),
        params_rel=np.stack(recs_params),
        inputs=np.stack(recs_u),
        tconn=np.stack(recs_tconn),
        v_all=np.array(recs_vall),
        barrier_violations=np.array(recs_viol, dtype=int),
        groupings=groupings,
        plane_estimates=plane_estimates,
        delta_i_max=delta_i_max,
    )


@dataclass(frozen=True)
class PlaneFit:
    """Best-fit swarm-plane angles with an off-plane residual."""

    theta_p: float
    theta_zxy: float
    rms_offplane: float
    confident: bool


def metrics_plane_fit(positions: np.ndarray, ctx: J2Context) -> PlaneFit:
    """Fit the swarm-plane angles to a cloud of LVLH positions.

    positions (M, 3) should accumulate satellite offsets from the formation
    center over roughly one orbit. The fitted plane normal is matched
    against the plane parameterization in closed form.
    """
    pts = np.asarray(positions, dtype=float)
    if pts.shape[0] < 3:
        raise ValueError("plane fit needs at least 3 points")
    centered = pts - pts.mean(axis=0)
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    if sv[1] <= 1e-12 * max(1.0, sv[0]):
        raise ValueError("degenerate (collinear) configuration")
    normal = vt[2]
    if normal[2] < 0.0:
        normal = -normal
    if normal[2] == 0.0:
        raise ValueError("plane contains the cross-track axis; angles undefined")
    q1 = -normal[0] / normal[2] / ctx.c_plus
    q2 = -normal[1] / normal[2] / ctx.c_minus
    theta_zxy = math.atan2(q2, q1)
    theta_p = math.atan2(1.0, math.hypot(q1, q2))
    rms = float(sv[2] / math.sqrt(pts.shape[0]))
    scale = float(np.median(np.linalg.norm(centered, axis=1)))
    confident = scale > 0.0 and rms < 0.1 * scale
    return PlaneFit(theta_p, theta_zxy, rms, confident)


@dataclass(frozen=True)
class ParamLoopResult:
    """Trajectory of a fixed-graph parameter-space closed loop."""

    times: np.ndarray
    params: np.ndarray   # (T, 6, N)
    inputs: np.ndarray   # (T, 3, N)
    v_all: np.ndarray    # (T,)


def run_param_closed_loop(
    params0: np.ndarray,
    edges,
    gains: GainSet,
    plane: SwarmPlane,
    ctx: J2Context,
    law: str,
    t_end: float,
    dt: float = 10.0,
    ref: int = 0,
    feedforward: bool = True,
    record_every: float | None = None,
) -> ParamLoopResult:
    """Integrate the averaged parameter dynamics under a fixed graph.

    A lightweight loop for property studies: no grouping, no saturation,
    inputs held over each step. Records the collective potential alongside
    the trajectory (NaN where the barrier is violated).
    """
    params = np.array(params0, dtype=float)
    n = params.shape[1]
    graph = build_graph(n, edges)
    edge_tail = np.array([a for a, _ in graph.edges], dtype=int)
    edge_head = np.array([b for _, b in graph.edges], dtype=int)
    n_steps = int(round(t_end / dt))
    stride = max(1, int(round((record_every or dt) / dt)))
    times, recs, recs_u, recs_v = [], [], [], []
    for step in range(n_steps + 1):
        t = step * dt
        u = np.zeros((n, 3))
        if len(edge_tail):
            rel = params[:, edge_tail] - params[:, edge_head]
            u_edge, _ = stabilizer.edge_control(rel, gains, plane, ctx, law)
            np.add.at(u, edge_tail, u_edge.T)
            np.add.at(u, edge_head, -u_edge.T)
        if feedforward:
            u[:, 2] += _feedforward_z(params, ref, plane, ctx)
        if step % stride == 0 or step == n_steps:
            try:
                v_all, _ = stabilizer.lyapunov_value(params, graph, gains, ctx)
            except BarrierViolation:
                v_all = math.nan
            times.append(t)
            recs.append(params.copy())
            recs_u.append(u.T.copy())
            recs_v.append(v_all)
        if step == n_steps:
            break
        zeros = np.zeros((3, n))
        rhs = lambda tt, pp: dynamics.param_rhs(pp, u.T, zeros, ctx)
        params = dynamics.rk4_step(rhs, t, params, dt)
        if not np.all(np.isfinite(params)) or np.max(np.abs(params)) > 1.0e9:
            raise SimulationBlowUp(f"parameter magnitude blew up at t={t + dt:g} s")
    return ParamLoopResult(np.array(times), np.stack(recs), np.stack(recs_u), np.array(recs_v))
