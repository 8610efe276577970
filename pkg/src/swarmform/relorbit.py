"""Averaged J2 relative-orbit parameters and escape-time estimators.

The relative motion of a deputy about a chief splits into a drifting center
(c1 sets the x offset and the along-track drift rate, c4 the along-track
offset) plus in-plane and cross-track periodic parts (c2, c3, c5, c6).
All functions are pure; distances in m, times in s, angles in rad.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from swarmform.frames import J2Context

INF = math.inf
"""Sentinel for never-escaping configurations; serializes as the string 'inf'."""


@dataclass(frozen=True)
class RelState:
    """Relative position (m) and velocity (m/s) in the LVLH frame."""

    x: float
    y: float
    z: float
    vx: float
    vy: float
    vz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.vx, self.vy, self.vz])

    @staticmethod
    def from_array(a) -> "RelState":
        x, y, z, vx, vy, vz = (float(v) for v in a)
        return RelState(x, y, z, vx, vy, vz)

    def xbar(self, ctx: J2Context) -> float:
        """J2-scaled radial coordinate c+ * x (derived view, never stored)."""
        return ctx.c_plus * self.x

    def ybar(self, ctx: J2Context) -> float:
        """J2-scaled along-track coordinate c- * y (derived view)."""
        return ctx.c_minus * self.y


@dataclass(frozen=True)
class OrbitalParams:
    """Averaged J2 relative orbital parameters and their polar forms."""

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float
    r_xy: float = field(default=0.0)
    theta_xy: float = field(default=0.0)
    r_z: float = field(default=0.0)
    theta_z: float = field(default=0.0)
    l_z: float = field(default=0.0)  # cross-track amplitude rate; 0 for identical inclinations

    @staticmethod
    def from_c(c1, c2, c3, c4, c5, c6, l_z=0.0) -> "OrbitalParams":
        """Build from the six indices, filling the derived polar fields."""
        return OrbitalParams(
            c1=c1, c2=c2, c3=c3, c4=c4, c5=c5, c6=c6,
            r_xy=math.hypot(c2, c3),
            theta_xy=math.atan2(c3, c2),
            r_z=math.hypot(c5, c6),
            theta_z=math.atan2(c6, c5),
            l_z=l_z,
        )

    def as_c_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3, self.c4, self.c5, self.c6])


def params_from_state(s: RelState, ctx: J2Context) -> OrbitalParams:
    """Orbital indices evaluated from an instantaneous relative state.

    Uses the identical-inclination approximation: the cross-track frequency
    is taken as omega_zref and the amplitude rate l_z as zero.
    """
    xb = ctx.c_plus * s.x
    yb = ctx.c_minus * s.y
    vxb = ctx.c_plus * s.vx
    vyb = ctx.c_minus * s.vy
    w = ctx.omega_xy
    c1 = ctx.c_plus / ctx.c_minus**2 * (2.0 * xb + vyb / w)
    c3 = xb - 2.0 * ctx.c_plus * c1
    c4 = (yb - 2.0 * vxb / w) / ctx.c_minus
    c2 = (yb - ctx.c_minus * c4) / 2.0
    c5 = s.vz / ctx.omega_zref
    c6 = s.z
    return OrbitalParams.from_c(c1, c2, c3, c4, c5, c6)


def state_from_params(p: OrbitalParams, t: float, ctx: J2Context) -> RelState:
    """Closed-form future state at time t for the unforced relative motion."""
    w = ctx.omega_xy
    wz = ctx.omega_zref
    a = w * t + p.theta_xy
    az = wz * t + p.theta_z
    xo, yo = orbit_center(p, t, ctx)
    x = xo + p.r_xy * math.sin(a) / ctx.c_plus
    y = yo + 2.0 * p.r_xy * math.cos(a) / ctx.c_minus
    z = (p.r_z + p.l_z * t) * math.sin(az)
    vx = p.r_xy * w * math.cos(a) / ctx.c_plus
    vy = -ctx.epsilon_2 * p.c1 - 2.0 * p.r_xy * w * math.sin(a) / ctx.c_minus
    vz = p.l_z * math.sin(az) + (p.r_z + p.l_z * t) * wz * math.cos(az)
    return RelState(x, y, z, vx, vy, vz)


def orbit_center(p: OrbitalParams, t: float, ctx: J2Context):
    """Center of the relative orbit at time t: (2 c1, c4 - epsilon_2 c1 t)."""
    return 2.0 * p.c1, p.c4 - ctx.epsilon_2 * p.c1 * t


def positions_closed_form(p: OrbitalParams, ts: np.ndarray, ctx: J2Context) -> np.ndarray:
    """Vectorized closed-form positions, shape (len(ts), 3)."""
    ts = np.asarray(ts, dtype=float)
    a = ctx.omega_xy * ts + p.theta_xy
    az = ctx.omega_zref * ts + p.theta_z
    x = 2.0 * p.c1 + p.r_xy * np.sin(a) / ctx.c_plus
    y = p.c4 - ctx.epsilon_2 * p.c1 * ts + 2.0 * p.r_xy * np.cos(a) / ctx.c_minus
    z = (p.r_z + p.l_z * ts) * np.sin(az)
    return np.stack([x, y, z], axis=-1)


@dataclass(frozen=True)
class EscapeTimes:
    """Escape/connectable time estimates; INF marks never-escaping cases."""

    t_out_min: float
    t_out_max: float
    t_conn: float
    t_conn_relaxed: float


def connectable_time_relaxed(c1: float, c4: float, r_s: float, ctx: J2Context) -> float:
    """Closed-form time until the relative-orbit center leaves radius r_s.

    Returns INF for c1 == 0 (the center never moves), and 0 when the center
    track already lies outside the band |x_o| <= r_s or exits only in the
    past.
    """
    if r_s <= 0.0:
        raise ValueError(f"r_s={r_s} must be positive")
    if c1 == 0.0:
        return INF
    disc = r_s**2 - (2.0 * c1) ** 2
    if disc < 0.0:
        return 0.0
    root = math.sqrt(disc)
    denom = ctx.epsilon_2 * c1
    return max((c4 + root) / denom, (c4 - root) / denom, 0.0)


def connectable_time_relaxed_array(dc1, dc4, r_s: float, ctx: J2Context) -> np.ndarray:
    """Vectorized relaxed connectable time over parameter-difference arrays."""
    if r_s <= 0.0:
        raise ValueError(f"r_s={r_s} must be positive")
    dc1 = np.asarray(dc1, dtype=float)
    dc4 = np.asarray(dc4, dtype=float)
    out = np.full(dc1.shape, INF)
    nz = dc1 != 0.0
    disc = r_s**2 - (2.0 * dc1) ** 2
    out[nz & (disc < 0.0)] = 0.0
    ok = nz & (disc >= 0.0)
    root = np.sqrt(np.where(disc >= 0.0, disc, 0.0))
    denom = ctx.epsilon_2 * np.where(nz, dc1, 1.0)
    t_hi = np.maximum((dc4 + root) / denom, (dc4 - root) / denom)
    out[ok] = np.maximum(t_hi, 0.0)[ok]
    return out


def connectable_time_shifted(
    c1: float, c4: float, r_s: float, t0_offset: float, ctx: J2Context
) -> float:
    """Connectable time composed through an intermediate elapsed time.

    ``t0_offset`` is the time already spent drifting (the exit time through
    an intermediate radius); the shifted along-track offset must oppose c1,
    which holds whenever t0_offset comes from an intermediate-radius exit.
    Equals ``connectable_time_relaxed`` for t0_offset = 0 in that regime.
    """
    if c1 == 0.0:
        return INF
    disc = r_s**2 - (2.0 * c1) ** 2
    if disc < 0.0:
        raise ValueError("intermediate radius violates r_s^2 >= (2 c1)^2")
    dc4 = c4 - ctx.epsilon_2 * c1 * t0_offset
    if c1 * dc4 > 0.0:
        raise ValueError(
            "shifted offset does not oppose the drift; t0_offset must come "
            "from an intermediate-radius exit time"
        )
    # Clamped at zero like the direct form: a center already past the exit
    # band yields a negative remaining time.
    return max(t0_offset + (-abs(dc4) + math.sqrt(disc)) / (ctx.epsilon_2 * abs(c1)), 0.0)


def _refine_crossing(f, lo: float, hi: float, tol: float) -> float:
    """Bisect a bracketed sign change of f to within tol."""
    flo = f(lo)
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0.0) == (flo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def escape_times_numeric(
    p: OrbitalParams,
    r_s: float,
    horizon: float,
    ctx: J2Context,
    grid_dt: float = 1.0,
    tol: float = 1e-6,
) -> EscapeTimes:
    """Dense-scan estimates of the first/last escape and connectable time.

    Scans |r(t)| - r_s on a grid and refines every sign change by bisection.
    With no crossing in [0, horizon]: starting inside yields (INF, INF,
    horizon); starting outside yields all zeros.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    ts = np.arange(0.0, horizon + grid_dt, grid_dt)
    ts[-1] = min(ts[-1], horizon)
    d = np.linalg.norm(positions_closed_form(p, ts, ctx), axis=-1) - r_s

    def f(t):
        x, y, z = positions_closed_form(p, np.array([t]), ctx)[0]
        return math.sqrt(x * x + y * y + z * z) - r_s

    sign_change = np.nonzero(np.sign(d[:-1]) != np.sign(d[1:]))[0]
    crossings = [_refine_crossing(f, ts[i], ts[i + 1], tol) for i in sign_change]

    relaxed = connectable_time_relaxed(p.c1, p.c4, r_s, ctx)
    if not crossings:
        if d[0] <= 0.0:
            return EscapeTimes(INF, INF, horizon, relaxed)
        return EscapeTimes(0.0, 0.0, 0.0, relaxed)

    t_out_min = crossings[0]
    t_out_max = crossings[-1]
    bounds = [0.0] + crossings
    t_conn = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if f(0.5 * (lo + hi)) <= 0.0:
            t_conn += hi - lo
    return EscapeTimes(t_out_min, t_out_max, t_conn, relaxed)


def _ellipse_axes(p: OrbitalParams, ctx: J2Context):
    """Principal axes of the periodic relative orbit.

    Returns (l_max, l_min, y_dir, x_dir, normal): semi-axis lengths and the
    ellipse-aligned orthonormal basis with the minor axis along x_dir.
    """
    delta = p.theta_z - p.theta_xy
    span = np.array(
        [
            [p.r_xy / ctx.c_plus, 0.0],
            [0.0, 2.0 * p.r_xy / ctx.c_minus],
            [p.r_z * math.cos(delta), p.r_z * math.sin(delta)],
        ]
    )
    w, sv, _ = np.linalg.svd(span, full_matrices=True)
    l_max, l_min = sv[0], sv[1]
    y_dir, x_dir = w[:, 0], w[:, 1]
    normal = np.cross(x_dir, y_dir)
    return l_max, l_min, y_dir, x_dir, normal


def _ellipse_max_dist2(xo: float, yo: float, l_min: float, l_max: float) -> float:
    """Max squared in-plane distance from the origin to an axis-aligned ellipse.

    The ellipse has center (xo, yo), semi-axis l_min along x and l_max along
    y. Stationary points of the distance satisfy a quartic in tan(chi/2).
    """
    if l_max <= 0.0:
        return xo * xo + yo * yo
    k = l_min**2 - l_max**2
    coeffs = np.array(
        [
            xo * l_min,
            -2.0 * yo * l_max + 2.0 * k,
            0.0,
            -2.0 * yo * l_max - 2.0 * k,
            -xo * l_min,
        ]
    )
    candidates = [math.pi]
    scale = np.max(np.abs(coeffs))
    if scale > 0.0:
        trimmed = np.trim_zeros(coeffs, "b")
        if trimmed.size > 1:
            roots = np.polynomial.polynomial.polyroots(trimmed)
            for r in roots:
                if abs(r.imag) < 1e-9 * (1.0 + abs(r.real)):
                    candidates.append(2.0 * math.atan(r.real))
    # Coarse grid guards degenerate root configurations.
    candidates.extend(np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False))
    chi = np.asarray(candidates)
    d2 = (xo + l_min * np.sin(chi)) ** 2 + (yo + l_max * np.cos(chi)) ** 2
    return float(np.max(d2))


def escape_time_lower_bound(
    p: OrbitalParams,
    r_s: float,
    ctx: J2Context,
    grid_dt: float = 1.0,
    tol: float = 1e-6,
) -> float:
    """Lower bound on the first escape time via ellipse-circle tangency.

    Finds the earliest time at which the farthest point of the (frozen-phase)
    relative-orbit ellipse reaches the sphere of radius r_s around the chief:
    before that instant no phase of the orbit can be outside. The per-time
    tangency condition is solved by polynomial root-finding; the time itself
    is located by bracketing and bisection.
    """
    l_max, l_min, y_dir, x_dir, normal = _ellipse_axes(p, ctx)

    def g(t: float) -> float:
        xo2, yo2 = orbit_center(p, t, ctx)
        ro = np.array([xo2, yo2, 0.0])
        zo = float(normal @ ro)
        d2 = _ellipse_max_dist2(float(x_dir @ ro), float(y_dir @ ro), l_min, l_max)
        return d2 + zo * zo - r_s**2

    if g(0.0) >= 0.0:
        return 0.0
    drift = ctx.epsilon_2 * abs(p.c1)
    if drift == 0.0:
        return INF
    horizon = 1.1 * (abs(p.c4) + 2.0 * abs(p.c1) + l_max + r_s + 1.0) / drift + 10.0
    ts = np.arange(0.0, horizon + grid_dt, grid_dt)
    prev = 0.0
    for t in ts[1:]:
        if g(float(t)) >= 0.0:
            return _refine_crossing(g, prev, float(t), tol)
        prev = float(t)
    return INF
