"""Distance-based orbital stabilizer and its gain machinery.

The controller acts on pairwise differences of the averaged orbital
parameters over the communication graph. A drift block damps the relative
center motion (c1, c4), a barrier-shaped distance block steers each
neighbor pair's in-plane amplitude toward the target r_xyd, and a
cross-track block tracks the hierarchical plane target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from swarmform.frames import J2Context
from swarmform.graphs import SwarmGraph

R_XY_MIN_DEFAULT = 0.1 * math.sqrt(3.0)
"""Default minimum-separation barrier (m): twice the half-diagonal of a 0.1 m cube."""

S_CLAMP_DEFAULT = 1.0e6
"""Magnitude the amplitude error is clamped to outside the barrier interval."""


class BarrierViolation(ValueError):
    """Raised when a pair distance leaves the open barrier interval."""


@dataclass(frozen=True)
class GainSet:
    """Controller gains and barrier parameters.

    k_a, k_b, k_z carry 1/s; the remaining entries are dimensionless.
    lambda_0, psi, f_0, g_0 satisfy the stabilizing-gain relations when
    produced by derive_gains; comparison presets may set them freely.
    """

    k_a: float
    k_b: float
    k_z: float
    gamma_a: float
    gamma_b: float
    lambda_0: float
    psi: float
    f_0: float
    g_0: float
    sigma_eps: float = 0.1
    r_xy_min: float = R_XY_MIN_DEFAULT
    r_xyd: float = 0.0

    @property
    def r_xy_max(self) -> float:
        """Upper barrier 2 r_xyd - r_xy_min."""
        return 2.0 * self.r_xyd - self.r_xy_min


def amplitude_error(r: float, gains: GainSet) -> float:
    """Barrier-shaped amplitude error, zero at r_xyd.

    Diverges to -inf at the minimum-separation barrier and to +inf at the
    mirrored upper barrier; raises BarrierViolation outside the open
    interval (never returns NaN).
    """
    lo, hi = gains.r_xy_min, gains.r_xy_max
    if not lo < hi:
        raise ValueError(f"invalid barrier interval ({lo}, {hi}); check r_xyd")
    if not lo < r < hi:
        raise BarrierViolation(f"pair amplitude {r} outside the open interval ({lo}, {hi})")
    return (r - gains.r_xyd) / (r - lo) + (r - gains.r_xyd) / (hi - r)


def amplitude_error_clamped(r, gains: GainSet, clamp: float = S_CLAMP_DEFAULT):
    """Vectorized amplitude error with magnitude clamping.

    Inside the barrier interval the true value is computed and its
    magnitude capped at clamp; outside, the repulsive (below) or
    contracting (above) orientation continues at +-clamp. The clamped
    branch acts through the pair's c2 difference, so a vanishing periodic
    amplitude disables it regardless of the clamp size. Returns
    (values, violated_mask).
    """
    r = np.asarray(r, dtype=float)
    lo, hi = gains.r_xy_min, gains.r_xy_max
    inside = (r > lo) & (r < hi)
    safe = np.where(inside, r, gains.r_xyd)
    s = (safe - gains.r_xyd) / (safe - lo) + (safe - gains.r_xyd) / (hi - safe)
    s = np.clip(s, -clamp, clamp)
    s = np.where(inside, s, np.where(r <= lo, -clamp, clamp))
    return s, ~inside


def rbar_xy(p, varrho: float, varsigma: float, tau: float, psi: float) -> float:
    """Drift-aware distance function of a pair's relative parameters."""
    c1, c2, c3, c4 = p.c1, p.c2, p.c3, p.c4
    return math.sqrt(
        (varrho * c1 + c3) ** 2 + tau * (varsigma * (c4 - psi * c1) + c2) ** 2
    )


def psi_cross_coupling(lambda_0: float, gamma_b: float, k_1: float) -> float:
    """Smaller-magnitude root of the stabilizing-gain quadratic.

    The root u of u^2 + lambda_0 u + gamma_b^2 = 0 with smaller |u| is
    rescaled by 2 (1 - k_1) / k_1. Requires lambda_0 >= 2 gamma_b >= 0.
    """
    if not lambda_0 >= 2.0 * gamma_b >= 0.0:
        raise ValueError(f"need lambda_0 >= 2 gamma_b >= 0, got ({lambda_0}, {gamma_b})")
    if k_1 == 1.0:
        raise ValueError("k_1 = 1 makes the cross-coupling singular")
    disc = math.sqrt(lambda_0**2 - 4.0 * gamma_b**2)
    u_small = -2.0 * gamma_b**2 / (lambda_0 + disc) if lambda_0 + disc > 0.0 else 0.0
    return 2.0 * (1.0 - k_1) / k_1 * u_small


def derive_gains(
    delta_min: int,
    delta_max: int,
    n: int,
    k_a: float,
    ctx: J2Context,
    gamma_a: float = 1.0,
    k_b: float = 0.0,
    k_z: float | None = None,
    sigma_eps: float = 0.1,
    r_xy_min: float = R_XY_MIN_DEFAULT,
    r_xyd: float = 0.0,
) -> GainSet:
    """Degree-based gain selection satisfying the eigenvalue sandwich.

    lambda_0 and gamma_b are chosen from the graph degree bounds so that the
    sandwich condition holds whenever the nonzero Laplacian spectrum lies in
    [2 delta / n, 2 Delta]; psi, f_0, g_0 follow from the gain relations.
    """
    if k_a <= 0.0:
        raise ValueError("k_a must be positive")
    if not 1 <= delta_min <= delta_max:
        raise ValueError(f"invalid degree bounds ({delta_min}, {delta_max})")
    lam0 = ctx.epsilon_2 / (2.0 * k_a) * (n / (2.0 * delta_min) + 1.0 / (2.0 * delta_max))
    gam_b = ctx.epsilon_2 / (4.0 * k_a) * (n / (2.0 * delta_min) - 1.0 / (2.0 * delta_max))
    assert lam0 >= 2.0 * gam_b >= 0.0
    psi = psi_cross_coupling(lam0, gam_b, ctx.k_1)
    f_0 = 0.5 * psi - lam0
    g_0 = -ctx.k_1 * f_0 - lam0
    return GainSet(
        k_a=k_a,
        k_b=k_b,
        k_z=k_a if k_z is None else k_z,
        gamma_a=gamma_a,
        gamma_b=gam_b,
        lambda_0=lam0,
        psi=psi,
        f_0=f_0,
        g_0=g_0,
        sigma_eps=sigma_eps,
        r_xy_min=r_xy_min,
        r_xyd=r_xyd,
    )


def comparison_gains(k_a: float, ctx: J2Context, k_z: float | None = None) -> GainSet:
    """Drift-only preset making the main and opposing input orders comparable."""
    return GainSet(
        k_a=k_a,
        k_b=0.0,
        k_z=k_a if k_z is None else k_z,
        gamma_a=1.0,
        gamma_b=1.0,
        lambda_0=ctx.epsilon_2 / (2.0 * k_a),
        psi=0.0,
        f_0=-ctx.epsilon_2 / (2.0 * k_a),
        g_0=0.0,
    )


@dataclass(frozen=True)
class GainConditionReport:
    """Outcome of the eigenvalue sandwich check."""

    passed: bool
    lower: float
    upper: float
    eigenvalues: np.ndarray
    lower_violations: np.ndarray
    upper_violations: np.ndarray


def check_gain_condition(g: SwarmGraph, gains: GainSet, ctx: J2Context) -> GainConditionReport:
    """Verify the nonzero Laplacian spectrum against the gain sandwich.

    gamma_b = lambda_0 / 2 degenerates the upper bound to +inf, which counts
    as a pass on that side.
    """
    if not g.connected:
        raise ValueError("gain condition is defined for connected graphs")
    ratio = ctx.epsilon_2 / gains.k_a
    lower = ratio / (gains.lambda_0 + 2.0 * gains.gamma_b)
    gap = gains.lambda_0 - 2.0 * gains.gamma_b
    upper = ratio / gap if gap > 0.0 else math.inf
    eigs = np.sort(g.d_plus)
    tol = 1e-12 * max(1.0, float(eigs[-1]))
    low_bad = eigs[eigs < lower - tol]
    up_bad = eigs[eigs > upper + tol]
    return GainConditionReport(
        passed=(low_bad.size == 0 and up_bad.size == 0),
        lower=lower,
        upper=upper,
        eigenvalues=eigs,
        lower_violations=low_bad,
        upper_violations=up_bad,
    )


def _plane_slope(plane) -> float:
    """Cross-track target amplitude per unit in-plane amplitude."""
    return math.sqrt(1.0 + 3.0 * math.sin(plane.theta_zxy) ** 2) / math.tan(plane.theta_p)


def edge_control(rel: np.ndarray, gains: GainSet, plane, ctx: J2Context, law: str,
                 s_clamp: float = S_CLAMP_DEFAULT):
    """Per-edge controller contributions for relative parameters rel (6, E).

    Column e holds the tail-minus-head parameter differences c1..c6 of edge
    e. Returns (u, n_violations) where u has shape (3, E): the contribution
    added to the tail satellite (the head receives the negative). law is
    'main' or 'opp'.
    """
    rel = np.atleast_2d(np.asarray(rel, dtype=float))
    if rel.shape[0] != 6:
        raise ValueError("rel must have 6 rows (c1..c6 differences)")
    c1, c2, c3, c4, c5 = rel[0], rel[1], rel[2], rel[3], rel[4]
    k0 = ctx.k_0
    k1 = ctx.k_1
    lead = gains.k_a / (2.0 * k0)
    u = np.zeros((3, rel.shape[1]))

    if law == "main":
        shift = gains.psi - 2.0 * gains.f_0 / (gains.gamma_a * gains.gamma_b**2)
        u[0] = lead * gains.gamma_a * gains.gamma_b**2 * (c4 - shift * c1)
        u[1] = -2.0 * lead * c1
    elif law == "opp":
        u[0] = lead * gains.gamma_a * c4
        u[1] = -2.0 * lead * c1 + gains.gamma_a * ctx.epsilon_2 / (2.0 * k0) * c4
    else:
        raise ValueError(f"unknown control law {law!r}")

    n_violations = 0
    if gains.k_b != 0.0:
        rbar = np.hypot(2.0 * ctx.c_plus * c1 + c3, c2)
        s_val, violated = amplitude_error_clamped(rbar, gains, s_clamp)
        n_violations = int(np.count_nonzero(violated))
        coef = ctx.c_minus * gains.k_b / (2.0 * k0 * k1**2) * s_val
        if law == "main":
            u[0] += coef * (-gains.gamma_b**2 * c2)
            u[1] += coef * (k1 * gains.g_0 * c2)
        else:
            u[0] += coef * (-(k1**2) * c2)
            u[1] += coef * (-k1 * ctx.epsilon_2 / gains.k_a * c2)

    # Cross-track block: drive the pair onto the plane target.
    r_xy_e = np.hypot(c2, c3)
    theta_zd = np.arctan2(c3, c2) + plane.delta_theta
    c5d = r_xy_e * _plane_slope(plane) * np.cos(theta_zd)
    u[2] = -gains.k_z * ctx.omega_zref * (c5 - c5d)
    return u, n_violations


@dataclass(frozen=True)
class ControlResult:
    """Controller output for one satellite."""

    u: np.ndarray
    barrier_violations: int


def _control_single(j, rel_params, gains, plane, ctx, law) -> ControlResult:
    if not rel_params:
        return ControlResult(np.zeros(3), 0)
    neighbors = sorted(rel_params)
    rel = np.stack([rel_params[k].as_c_array() for k in neighbors], axis=1)
    u, viol = edge_control(rel, gains, plane, ctx, law)
    return ControlResult(u.sum(axis=1), viol)


def control_main(j, rel_params, gains: GainSet, plane, ctx: J2Context) -> ControlResult:
    """Main stabilizer input for satellite j.

    rel_params maps each neighbor k to the relative parameters of j minus k.
    Barrier violations are clamped and flagged rather than raised, since a
    truth-model step can transiently overshoot the barrier.
    """
    return _control_single(j, rel_params, gains, plane, ctx, "main")


def control_opp(j, rel_params, gains: GainSet, plane, ctx: J2Context) -> ControlResult:
    """Opposing-strategy input for satellite j (comparison baseline)."""
    return _control_single(j, rel_params, gains, plane, ctx, "opp")


def edge_weights(rbars, gains: GainSet, s_clamp: float = S_CLAMP_DEFAULT) -> np.ndarray:
    """Per-edge weights k_b * s(rbar_e) of the weighted Laplacian."""
    s_val, _ = amplitude_error_clamped(rbars, gains, s_clamp)
    return gains.k_b * s_val


def weighted_laplacian(n: int, edges, weights) -> np.ndarray:
    """Assemble the symmetric weighted Laplacian from per-edge weights."""
    lap = np.zeros((n, n))
    for (a, b), w in zip(edges, np.asarray(weights, dtype=float)):
        lap[a, a] += w
        lap[b, b] += w
        lap[a, b] -= w
        lap[b, a] -= w
    return lap


@dataclass(frozen=True)
class EdgeWeightState:
    """Amplitude errors per edge and the assembled weighted Laplacian."""

    s_values: np.ndarray
    laplacian: np.ndarray


def edge_weight_state(params: np.ndarray, g: SwarmGraph, gains: GainSet,
                      ctx: J2Context) -> EdgeWeightState:
    """Evaluate s(rbar) on every edge and assemble the weighted Laplacian."""
    rel = -(params @ g.incidence)  # (6, p): tail minus head per column
    rbar = np.hypot(2.0 * ctx.c_plus * rel[0] + rel[2], rel[1])
    s_val, _ = amplitude_error_clamped(rbar, gains)
    return EdgeWeightState(s_val, weighted_laplacian(g.n, g.edges, gains.k_b * s_val))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _barrier_integral(r_upper: float, gains: GainSet) -> float:
    """Integral of s(rho) * rho from r_xyd to r_upper (Gauss-Legendre)."""
    a, b = gains.r_xyd, r_upper
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    rho = mid + half * _GL_NODES
    lo, hi = gains.r_xy_min, gains.r_xy_max
    s_val = (rho - gains.r_xyd) / (rho - lo) + (rho - gains.r_xyd) / (hi - rho)
    return float(half * np.sum(_GL_WEIGHTS * s_val * rho))


def lyapunov_value(params: np.ndarray, g: SwarmGraph, gains: GainSet, ctx: J2Context):
    """Collective potential (total, pairwise part) of a configuration.

    params has shape (6, N) with rows c1..c6 per satellite. The drift block
    is quadratic in the edge differences of 2 c1 and c4 - psi c1; the
    pairwise part integrates the amplitude error over each edge (counted in
    both directions). Raises BarrierViolation when any edge amplitude is
    outside the barrier interval.
    """
    params = np.asarray(params, dtype=float)
    e_mat = g.incidence
    x1 = e_mat.T @ (2.0 * params[0])
    x4 = e_mat.T @ (params[3] - gains.psi * params[0])
    v_drift = 0.5 * gains.k_a * (x1 @ x1 + gains.gamma_a * (x4 @ x4))
    v_delta = 0.0
    if gains.k_b != 0.0 and g.n_edges:
        rel = -(params @ e_mat)
        rbar = np.hypot(2.0 * ctx.c_plus * rel[0] + rel[2], rel[1])
        lo, hi = gains.r_xy_min, gains.r_xy_max
        if np.any(rbar <= lo) or np.any(rbar >= hi):
            raise BarrierViolation("an edge amplitude lies outside the barrier interval")
        v_delta = 2.0 * gains.k_b * sum(_barrier_integral(float(r), gains) for r in rbar)
    return v_drift + v_delta, v_delta


def saturate(f, f_bar: float, mass: float) -> np.ndarray:
    """Cap the force norm at f_bar and convert to acceleration.

    f is one force vector (N) or an (N_sat, 3) stack; direction is
    preserved.
    """
    if f_bar <= 0.0:
        raise ValueError("f_bar must be positive")
    f = np.asarray(f, dtype=float)
    norm = np.linalg.norm(f, axis=-1, keepdims=True)
    scale = np.where(norm > f_bar, f_bar / np.where(norm == 0.0, 1.0, norm), 1.0)
    return f * scale / mass
