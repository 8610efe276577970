"""Orbit-level constants and coordinate-frame transformations.

All quantities are strict SI (m, s, rad). The J2 strength coefficient is
ingested once, converted from its customary km^5/s^2 value. Frames:

    O      rotating LVLH frame of the reference orbit (x radial, z along
           orbital angular momentum, y completing the triad)
    O_J2   J2-scaled companion of O (x, y stretched by c+, c-)
    S      intermediate swarm frame (plane angles applied)
    S_HAT  normalized swarm frame; desired trajectories have constant norm
    S_BAR  S_HAT with the orbital rotation unwound (time dependent)
    E      ellipse-aligned frame used by the escape-time lower bound
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

MU_EARTH = 3.986e14
"""Earth gravitational parameter (m^3/s^2)."""

K_J2 = 2.633e10 * 1.0e15
"""J2 strength coefficient (m^5/s^2), converted from 2.633e10 km^5/s^2."""

R_EARTH = 6.378137e6
"""Earth equatorial radius (m), used only for input validation."""

R_REF_DEFAULT = R_EARTH + 500e3
"""Reference radius of the case-study orbit (m): 500 km altitude, ~94.6 min period."""

I_REF_DEFAULT = math.radians(51.7)
"""Reference inclination of the case-study orbit (rad)."""


@dataclass(frozen=True)
class J2Context:
    """Derived orbit-level constants for a reference orbit (r_ref, i_ref).

    Immutable after construction; safe to share across workers.
    """

    mu_g: float        # gravitational parameter (m^3/s^2)
    k_j2: float        # J2 coefficient (m^5/s^2)
    r_ref: float       # reference radius (m)
    i_ref: float       # reference inclination (rad)
    s_j2: float        # dimensionless J2 strength at this orbit
    c_plus: float      # sqrt(1 + s_j2)
    c_minus: float     # sqrt(1 - s_j2)
    omega_0: float     # two-body mean motion sqrt(mu/r^3) (rad/s)
    omega_xy: float    # in-plane frequency c_- * omega_0 (rad/s)
    omega_zref: float  # cross-track reference frequency (rad/s)
    epsilon_2: float   # along-track drift coefficient (rad/s)
    k_0: float         # input lever arm 2 c+ / (omega_xy c-) (s)
    k_1: float         # dimensionless coupling c- eps2 / (4 c+ omega_xy)
    c_1c: float        # offset constant of the artificial reference orbit

    @property
    def period_xy(self) -> float:
        """In-plane relative-orbit period (s)."""
        return 2.0 * math.pi / self.omega_xy


def build_context(
    r_ref: float,
    i_ref: float,
    mu_g: float = MU_EARTH,
    k_j2: float = K_J2,
) -> J2Context:
    """Build the J2Context for a circular reference orbit.

    Args:
        r_ref: reference orbit radius (m), must exceed the Earth radius.
        i_ref: reference inclination (rad) in [0, pi].
        mu_g, k_j2: gravitational and J2 parameters; k_j2=0 recovers the
            Clohessy-Wiltshire limit (c+ = c- = 1, epsilon_2 = 3 omega_xy).

    Raises:
        ValueError: on out-of-range inputs or |s_j2| >= 1.
    """
    if r_ref <= R_EARTH and k_j2 != 0.0:
        raise ValueError(f"r_ref={r_ref} m must exceed the Earth radius")
    if not 0.0 <= i_ref <= math.pi:
        raise ValueError(f"i_ref={i_ref} rad outside [0, pi]")

    s_j2 = k_j2 * (1.0 + 3.0 * math.cos(2.0 * i_ref)) / (4.0 * mu_g * r_ref**2)
    if abs(s_j2) >= 1.0:
        raise ValueError(f"s_j2={s_j2} outside (-1, 1); not a valid LEO configuration")

    c_plus = math.sqrt(1.0 + s_j2)
    c_minus = math.sqrt(1.0 - s_j2)
    omega_0 = math.sqrt(mu_g / r_ref**3)
    omega_xy = c_minus * omega_0
    # (4 c+^2 - c-^2) = 3 + 5 s_j2 holds exactly.
    epsilon_2 = (3.0 + 5.0 * s_j2) / (c_plus * c_minus) * omega_xy
    k_0 = 2.0 * c_plus / (omega_xy * c_minus)
    k_1 = c_minus * epsilon_2 / (4.0 * c_plus * omega_xy)
    omega_zref = omega_0 * (c_plus + k_j2 * math.cos(i_ref) ** 2 / (mu_g * r_ref**2))
    c_1c = (c_plus / c_minus**2) * (
        c_minus * k_j2 * math.sin(i_ref) ** 2 / (2.0 * omega_zref * r_ref**4)
    )
    return J2Context(
        mu_g=mu_g,
        k_j2=k_j2,
        r_ref=r_ref,
        i_ref=i_ref,
        s_j2=s_j2,
        c_plus=c_plus,
        c_minus=c_minus,
        omega_0=omega_0,
        omega_xy=omega_xy,
        omega_zref=omega_zref,
        epsilon_2=epsilon_2,
        k_0=k_0,
        k_1=k_1,
        c_1c=c_1c,
    )


def default_context() -> J2Context:
    """Context for the case-study orbit (500 km altitude, i = 51.7 deg)."""
    return build_context(R_REF_DEFAULT, I_REF_DEFAULT)


class Frame(enum.Enum):
    """Labels of the frames a FrameRotation may connect."""

    O = "O"
    O_J2 = "O_J2"
    S = "S"
    S_HAT = "S_HAT"
    S_BAR = "S_BAR"
    E = "E"


@dataclass(frozen=True)
class FrameRotation:
    """A 3x3 transform between two labelled frames.

    Factors are orthonormal rotations except the stated diagonal scalings;
    composing rotations with mismatched labels raises immediately.
    """

    matrix: np.ndarray
    from_frame: Frame
    to_frame: Frame

    def __matmul__(self, other: "FrameRotation") -> "FrameRotation":
        if not isinstance(other, FrameRotation):
            return NotImplemented
        if other.to_frame is not self.from_frame:
            raise ValueError(
                f"cannot compose {self.from_frame.value}<-{self.to_frame.value} "
                f"after {other.to_frame.value}<-{other.from_frame.value}"
            )
        return FrameRotation(self.matrix @ other.matrix, other.from_frame, self.to_frame)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Transform one vector or an (N, 3) stack of vectors."""
        v = np.asarray(vec, dtype=float)
        return v @ self.matrix.T


def _rot_x(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


def _rot_y(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def _rot_z(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_oj2_from_o(ctx: J2Context) -> FrameRotation:
    """Diagonal scaling diag(c+, c-, 1) compensating the J2 stretch."""
    return FrameRotation(np.diag([ctx.c_plus, ctx.c_minus, 1.0]), Frame.O, Frame.O_J2)


def rot_s_from_oj2(plane) -> FrameRotation:
    """Plane-angle rotation from the J2-scaled frame into the swarm frame."""
    m = _rot_y(plane.theta_p) @ _rot_z(plane.theta_zxy)
    return FrameRotation(m, Frame.O_J2, Frame.S)


def rot_shat_from_s(plane) -> FrameRotation:
    """Ellipse normalization: diag(1,1,2) . Rx(theta_zxy) . diag(1,1,sin theta_p)."""
    m = np.diag([1.0, 1.0, 2.0]) @ _rot_x(plane.theta_zxy) @ np.diag([1.0, 1.0, math.sin(plane.theta_p)])
    return FrameRotation(m, Frame.S, Frame.S_HAT)


def rot_shat_from_o(plane, ctx: J2Context) -> FrameRotation:
    """Composite transform into the normalized swarm frame.

    In this frame the desired trajectory has constant norm 2*r_xyd, which
    makes nearest-neighbor relations time invariant.

    Raises:
        ValueError: for theta_p at or beyond the singular values {0, pi/2}.
    """
    if not 0.0 < plane.theta_p < math.pi / 2.0:
        raise ValueError(f"theta_p={plane.theta_p} rad outside the open interval (0, pi/2)")
    return rot_shat_from_s(plane) @ rot_s_from_oj2(plane) @ rot_oj2_from_o(ctx)


def rot_sbar_from_shat(t: float, ctx: J2Context) -> FrameRotation:
    """x-axis rotation by omega_xy * t unwinding the orbital angular velocity."""
    return FrameRotation(_rot_x(ctx.omega_xy * t), Frame.S_HAT, Frame.S_BAR)


def nadir_direction_shat(plane, ctx: J2Context) -> np.ndarray:
    """Nadir direction expressed in the normalized swarm frame."""
    return rot_shat_from_o(plane, ctx).apply(np.array([-1.0, 0.0, 0.0]))
