"""Target geometry of the coplanar equidistant swarm.

The swarm plane is parameterized by two user angles: theta_p tilts the
plane against the orbital plane, theta_zxy rotates it about the radial
axis. Hierarchical targets turn a pair's in-plane amplitude and phase into
the cross-track amplitude/phase that places the relative orbit on the
plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from swarmform.frames import J2Context
from swarmform.relorbit import RelState


@dataclass(frozen=True)
class SwarmPlane:
    """User-defined swarm plane and its derived target quantities."""

    theta_p: float      # plane tilt angle (rad), in (0, pi/2)
    theta_zxy: float    # in-plane rotation angle (rad)
    r_avg: float        # user-defined average distance (m)
    r_xyd: float        # target in-plane relative-orbit amplitude (m)
    delta_theta: float  # target phase offset theta_z - theta_xy (rad)


def shape_factor(theta_p: float, theta_zxy: float, ctx: J2Context) -> float:
    """Ratio between the average distance and the in-plane amplitude.

    The square of the desired trajectory norm, averaged over one period,
    equals (shape_factor * r_xyd)^2.
    """
    if not 0.0 < theta_p < math.pi / 2.0:
        raise ValueError(f"theta_p={theta_p} rad outside (0, pi/2)")
    s = ctx.s_j2
    return math.sqrt(
        0.5
        * (
            (1.0 + 3.0 * math.sin(theta_zxy) ** 2) / math.tan(theta_p) ** 2
            + (3.0 * s + 5.0) / (1.0 - s * s)
        )
    )


def make_plane(theta_p: float, theta_zxy: float, r_avg: float, ctx: J2Context) -> SwarmPlane:
    """Build a SwarmPlane, deriving the amplitude target and phase offset."""
    if r_avg <= 0.0:
        raise ValueError("r_avg must be positive")
    s_factor = shape_factor(theta_p, theta_zxy, ctx)
    # atan2 form stays finite through theta_zxy = pi/2.
    delta_theta = math.atan2(2.0 * math.sin(theta_zxy), math.cos(theta_zxy))
    return SwarmPlane(
        theta_p=theta_p,
        theta_zxy=theta_zxy,
        r_avg=r_avg,
        r_xyd=r_avg / s_factor,
        delta_theta=delta_theta,
    )


def target_z(r_xy: float, theta_xy: float, plane: SwarmPlane, ctx: J2Context):
    """Hierarchical cross-track target for a pair's in-plane amplitude/phase.

    Returns (theta_zd, r_zd, c5d, c6d). The phase-difference cosine is
    evaluated at the target offset, making r_zd time invariant; the
    combination cos(theta_zxy)/cos(delta_theta) is computed in closed form
    as sqrt(1 + 3 sin^2(theta_zxy)), finite for all angles.
    """
    theta_zd = theta_xy + plane.delta_theta
    r_zd = (
        r_xy / math.tan(plane.theta_p) * math.sqrt(1.0 + 3.0 * math.sin(plane.theta_zxy) ** 2)
    )
    return theta_zd, r_zd, r_zd * math.cos(theta_zd), r_zd * math.sin(theta_zd)


def feedforward_uz(t: float, r_zd: float, theta_z: float, ctx: J2Context) -> float:
    """Cross-track forcing that retunes the z frequency toward omega_xy.

    Cancels the natural restoring acceleration of the free cross-track
    motion and injects the one belonging to an oscillation at omega_xy;
    identically zero when the two frequencies coincide. Evaluated each tick
    at t = 0 with the currently estimated phase.
    """
    wz = ctx.omega_zref
    w = ctx.omega_xy
    return r_zd * wz * wz * math.sin(wz * t + theta_z) - r_zd * w * w * math.sin(w * t + theta_z)


def desired_position(t, plane: SwarmPlane, theta_xy0: float, ctx: J2Context) -> np.ndarray:
    """Desired stable trajectory at time t (scalar or array), LVLH frame."""
    t = np.asarray(t, dtype=float)
    alpha = ctx.omega_xy * t + theta_xy0
    _, r_zd, _, _ = target_z(plane.r_xyd, theta_xy0, plane, ctx)
    x = plane.r_xyd * np.sin(alpha) / ctx.c_plus
    y = 2.0 * plane.r_xyd * np.cos(alpha) / ctx.c_minus
    z = r_zd * np.sin(alpha + plane.delta_theta)
    return np.stack([x, y, z], axis=-1)


def desired_state(t: float, plane: SwarmPlane, theta_xy0: float, ctx: J2Context) -> RelState:
    """Desired trajectory state (position and analytic velocity) at time t."""
    w = ctx.omega_xy
    alpha = w * t + theta_xy0
    _, r_zd, _, _ = target_z(plane.r_xyd, theta_xy0, plane, ctx)
    return RelState(
        x=plane.r_xyd * math.sin(alpha) / ctx.c_plus,
        y=2.0 * plane.r_xyd * math.cos(alpha) / ctx.c_minus,
        z=r_zd * math.sin(alpha + plane.delta_theta),
        vx=plane.r_xyd * w * math.cos(alpha) / ctx.c_plus,
        vy=-2.0 * plane.r_xyd * w * math.sin(alpha) / ctx.c_minus,
        vz=r_zd * w * math.cos(alpha + plane.delta_theta),
    )


def delta_inclination_estimate(vz_rel: float, ctx: J2Context) -> float:
    """Differential-inclination proxy for a pair's initial cross-track rate.

    Values well below ~1e-6 rad justify the identical-inclination
    approximation used throughout the parameter extraction.
    """
    return vz_rel / (ctx.omega_zref * ctx.r_ref)
