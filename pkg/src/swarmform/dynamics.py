"""Right-hand sides and integrators for the orbital models.

Three model levels share the rotating LVLH companion frame of the reference
orbit (rotation rate c+ * omega_0 about z, time-based argument angle
theta(t) = omega_zref * t):

* truth: per-satellite differential J2 gravity, fully nonlinear in the
  relative coordinates;
* linearized: the averaged linear relative dynamics;
* parameter space: the averaged orbital-parameter system, rows C1..C6.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from swarmform.frames import J2Context

# Row layout of parameter-space arrays, shape (6, N).
IC1, IC2, IC3, IC4, IC5, IC6 = range(6)


def j2_accel(p_vec, inc: float, theta: float, ctx: J2Context) -> np.ndarray:
    """Gravitational acceleration (two-body + J2) at position(s) p_vec.

    p_vec is a 3-vector or (N, 3) stack of positions from the Earth center,
    expressed in LVLH axes; the J2 direction structure is evaluated at the
    supplied inclination and argument angle. On the reference point
    [r, 0, 0] the two-body part reduces to -mu/r^2 along the first axis.
    """
    p = np.asarray(p_vec, dtype=float)
    r = np.linalg.norm(p, axis=-1, keepdims=True)
    if np.any(r == 0.0):
        raise ValueError("position must have nonzero norm")
    si, ci = math.sin(inc), math.cos(inc)
    st = math.sin(theta)
    bracket = np.array(
        [
            1.0 - 3.0 * si * si * st * st,
            si * si * math.sin(2.0 * theta),
            math.sin(2.0 * inc) * st,
        ]
    )
    return -ctx.mu_g * p / r**3 - ctx.k_j2 / r**4 * bracket


def relative_truth_rhs(t: float, y: np.ndarray, u: np.ndarray, ctx: J2Context) -> np.ndarray:
    """Nonlinear truth dynamics of relative states in the companion frame.

    y has shape (N, 6) = (position, velocity) of each satellite relative to
    the reference orbit; u is the commanded acceleration, shape (N, 3).
    Gravity enters differentially (satellite minus reference point), so a
    satellite at the origin stays exactly at the origin; the common
    zero-mean J2 residual cancels pairwise and is therefore dropped.
    """
    y = np.atleast_2d(y)
    pos = y[:, :3]
    vel = y[:, 3:]
    theta = ctx.omega_zref * t
    p0 = np.array([ctx.r_ref, 0.0, 0.0])
    dg = j2_accel(p0 + pos, ctx.i_ref, theta, ctx) - j2_accel(p0, ctx.i_ref, theta, ctx)
    wc = ctx.c_plus * ctx.omega_0
    acc = dg + u
    acc[:, 0] += 2.0 * wc * vel[:, 1] + wc * wc * pos[:, 0]
    acc[:, 1] += -2.0 * wc * vel[:, 0] + wc * wc * pos[:, 1]
    return np.concatenate([vel, acc], axis=1)


def linearized_rhs(
    s,
    u,
    d,
    ctx: J2Context,
    t: float = 0.0,
    l_z: float = 0.0,
    theta_z: float = 0.0,
) -> np.ndarray:
    """Averaged linear relative dynamics.

    s is a RelState, 6-array, or (N, 6) stack; u and d are accelerations
    (3,) or (N, 3). The cross-track compensation forcing
    2 l_z omega_z cos(omega_z t + theta_z) is exposed, zero by default.
    """
    arr = s.as_array() if hasattr(s, "as_array") else np.asarray(s, dtype=float)
    squeeze = arr.ndim == 1
    y = np.atleast_2d(arr)
    uu = np.atleast_2d(np.asarray(u, dtype=float) + np.asarray(d, dtype=float))
    w0 = ctx.omega_0
    wz = ctx.omega_zref
    cp = ctx.c_plus
    three5s = 3.0 + 5.0 * ctx.s_j2
    acc = np.empty_like(y[:, :3])
    acc[:, 0] = 2.0 * cp * w0 * y[:, 4] + three5s * w0 * w0 * y[:, 0] + uu[:, 0]
    acc[:, 1] = -2.0 * cp * w0 * y[:, 3] + uu[:, 1]
    acc[:, 2] = (
        -wz * wz * y[:, 2]
        + 2.0 * l_z * wz * math.cos(wz * t + theta_z)
        + uu[:, 2]
    )
    out = np.concatenate([y[:, 3:], acc], axis=1)
    return out[0] if squeeze else out


def param_rhs(pv: np.ndarray, u: np.ndarray, d: np.ndarray, ctx: J2Context) -> np.ndarray:
    """Averaged parameter-space dynamics for N satellites.

    pv has shape (6, N) with rows C1..C6; u and d have shape (3, N) with
    per-axis input and disturbance vectors. Linear in (pv, u, d).
    """
    pv = np.asarray(pv, dtype=float)
    ux, uy, uz = (np.asarray(u[i], dtype=float) + np.asarray(d[i], dtype=float) for i in range(3))
    if pv.shape[0] != 6:
        raise ValueError(f"parameter array must have 6 rows, got {pv.shape}")
    if pv.shape[1:] != np.shape(ux):
        raise ValueError("input vectors must match the satellite count")
    w = ctx.omega_xy
    wz = ctx.omega_zref
    k0 = ctx.k_0
    out = np.empty_like(pv)
    out[IC1] = 0.5 * k0 * uy
    out[IC4] = -ctx.epsilon_2 * pv[IC1] - k0 * ux
    out[IC2] = -w * pv[IC3] + 0.5 * ctx.c_minus * k0 * ux
    out[IC3] = w * pv[IC2] - ctx.c_plus * k0 * uy
    out[IC5] = -wz * pv[IC6] + uz / wz
    out[IC6] = wz * pv[IC5]
    return out


def rk4_step(rhs: Callable, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step of rhs(t, y)."""
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagate(rhs: Callable, y0, t0: float, t1: float, dt: float):
    """Fixed-step RK4 trajectory of rhs(t, y) from t0 to t1.

    The final step is shortened to land exactly on t1. Returns (ts, ys)
    with ys stacked along the first axis.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    y = np.array(y0, dtype=float)
    ts = [t0]
    ys = [y.copy()]
    t = t0
    while t < t1 - 1e-12 * max(1.0, abs(t1)):
        step = min(dt, t1 - t)
        y = rk4_step(rhs, t, y, step)
        t += step
        ts.append(t)
        ys.append(y.copy())
    return np.array(ts), np.stack(ys)
