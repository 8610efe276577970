import math

import numpy as np
import pytest

from swarmform import dynamics
from swarmform.frames import R_REF_DEFAULT, build_context, rot_shat_from_o
from swarmform.relorbit import params_from_state
from swarmform.targets import (
    delta_inclination_estimate,
    desired_position,
    desired_state,
    feedforward_uz,
    make_plane,
    shape_factor,
    target_z,
)


def test_shape_factor_case_study_values(ctx):
    s1 = shape_factor(math.radians(30.0), 0.0, ctx)
    s2 = shape_factor(math.radians(40.0), math.radians(50.0), ctx)
    assert abs((s1 - 2.0) - 4.00e-5) < 1e-3
    assert abs((s2 - 2.0) - 1.12e-1) < 1e-3


def test_shape_factor_exact_two():
    # With J2 off and no in-plane rotation, tan^2(theta_p) = 1/3 gives S = 2.
    c = build_context(R_REF_DEFAULT, 0.3, k_j2=0.0)
    theta_p = math.atan(1.0 / math.sqrt(3.0))
    assert shape_factor(theta_p, 0.0, c) == pytest.approx(2.0, rel=1e-15)


def test_shape_factor_singular_angles(ctx):
    with pytest.raises(ValueError):
        shape_factor(0.0, 0.0, ctx)
    with pytest.raises(ValueError):
        shape_factor(math.pi / 2.0, 0.0, ctx)


def test_make_plane(ctx):
    plane = make_plane(math.radians(30.0), 0.0, 0.5, ctx)
    assert plane.r_xyd == pytest.approx(0.5 / shape_factor(math.radians(30.0), 0.0, ctx))
    assert plane.delta_theta == 0.0
    with pytest.raises(ValueError):
        make_plane(math.radians(30.0), 0.0, -1.0, ctx)


def test_delta_theta_limit(ctx):
    # tan diverges at 90 deg but the target offset tends to 90 deg continuously.
    plane = make_plane(math.radians(30.0), math.radians(90.0), 0.5, ctx)
    assert plane.delta_theta == pytest.approx(math.pi / 2.0)
    near = make_plane(math.radians(30.0), math.radians(89.999), 0.5, ctx)
    assert abs(near.delta_theta - plane.delta_theta) < 1e-4


def test_target_z_zero_rotation(ctx, plane30):
    theta_zd, r_zd, c5d, c6d = target_z(0.25, 0.4, plane30, ctx)
    assert theta_zd == pytest.approx(0.4)
    assert r_zd == pytest.approx(0.25 / math.tan(math.radians(30.0)), rel=1e-15)
    assert c5d == pytest.approx(r_zd * math.cos(0.4))
    assert c6d == pytest.approx(r_zd * math.sin(0.4))


def test_target_z_45deg(ctx):
    plane = make_plane(math.radians(45.0), 0.0, 0.5, ctx)
    _, r_zd, _, _ = target_z(0.25, 0.0, plane, ctx)
    assert r_zd == pytest.approx(0.25, rel=1e-15)


def test_desired_plane_normal_constant(ctx, plane4050):
    ts = np.linspace(0.0, ctx.period_xy, 257)
    pd = desired_position(ts, plane4050, 1.1, ctx)
    _, sv, vt = np.linalg.svd(pd - pd.mean(axis=0))
    normal = vt[2]
    # every sample lies in the fixed plane through the origin
    assert np.max(np.abs(pd @ normal)) < 1e-9 * plane4050.r_xyd
    assert sv[2] < 1e-9 * sv[0]


def test_feedforward_vanishes_in_cw_limit(ctx_cw):
    # J2 off makes the natural and target frequencies coincide.
    assert ctx_cw.omega_zref == ctx_cw.omega_xy
    for t in (0.0, 100.0, 3000.0):
        assert feedforward_uz(t, 0.4, 0.7, ctx_cw) == 0.0


def test_feedforward_zero_phase(ctx):
    assert feedforward_uz(0.0, 0.4, 0.0, ctx) == 0.0


def test_feedforward_locks_frequency(ctx):
    """Closed-loop cross-track motion driven by the forcing peaks at omega_xy."""
    r_zd, theta_z = 0.4, 0.3
    rhs = lambda t, y: np.array([
        y[1],
        -ctx.omega_zref**2 * y[0] + feedforward_uz(t, r_zd, theta_z, ctx),
    ])
    y0 = np.array([r_zd * math.sin(theta_z), r_zd * ctx.omega_zref * math.cos(theta_z)])
    t_end = 10.0 * ctx.period_xy
    ts, ys = dynamics.rk4_propagate(rhs, y0, 0.0, t_end, 5.0)
    z = ys[:, 0] - np.mean(ys[:, 0])
    freqs = np.fft.rfftfreq(len(z), d=5.0) * 2.0 * math.pi
    spec = np.abs(np.fft.rfft(z * np.hanning(len(z))))
    peak = freqs[np.argmax(spec)]
    df = freqs[1] - freqs[0]
    assert abs(peak - ctx.omega_xy) <= df


def test_desired_position_average_norm(ctx, plane4050):
    ts = np.linspace(0.0, ctx.period_xy, 200001)
    pd = desired_position(ts, plane4050, 0.9, ctx)
    avg = np.trapezoid(np.sum(pd * pd, axis=1), ts) / ctx.period_xy
    assert abs(avg - plane4050.r_avg**2) < 1e-6 * plane4050.r_avg**2


def test_desired_position_shat_norm(ctx, plane30):
    rot = rot_shat_from_o(plane30, ctx)
    ts = np.linspace(0.0, 2.0 * ctx.period_xy, 100)
    norms = np.linalg.norm(rot.apply(desired_position(ts, plane30, 0.2, ctx)), axis=1)
    assert np.max(np.abs(norms - 2.0 * plane30.r_xyd)) < 1e-9 * plane30.r_xyd


def test_desired_position_periodic(ctx, plane30):
    t = 321.0
    a = desired_position(t, plane30, 0.5, ctx)
    b = desired_position(t + ctx.period_xy, plane30, 0.5, ctx)
    assert np.max(np.abs(a - b)) < 1e-12


def test_desired_trajectory_is_drift_free(ctx, plane4050):
    """The desired trajectory carries no center drift or offset."""
    for t in (0.0, 1000.0, 4321.0):
        p = params_from_state(desired_state(t, plane4050, 0.8, ctx), ctx)
        assert abs(p.c1) < 1e-9 * plane4050.r_xyd
        assert abs(p.c4) < 1e-9 * plane4050.r_xyd


def test_delta_inclination_metric(ctx):
    assert delta_inclination_estimate(0.0, ctx) == 0.0
    val = delta_inclination_estimate(1.0e-4, ctx)
    assert val == pytest.approx(1.0e-4 / (ctx.omega_zref * ctx.r_ref))
