import math

import numpy as np
import pytest

from swarmform.frames import (
    Frame,
    FrameRotation,
    R_REF_DEFAULT,
    build_context,
    default_context,
    rot_oj2_from_o,
    rot_s_from_oj2,
    rot_sbar_from_shat,
    rot_shat_from_o,
    rot_shat_from_s,
)
from swarmform.targets import desired_position, make_plane


def test_cw_limit_constants(ctx_cw):
    assert ctx_cw.c_plus == 1.0
    assert ctx_cw.c_minus == 1.0
    assert ctx_cw.epsilon_2 == pytest.approx(3.0 * ctx_cw.omega_xy, rel=0, abs=0)
    assert ctx_cw.omega_xy == ctx_cw.omega_0


def test_epsilon2_identity(ctx):
    # (4 c+^2 - c-^2) == 3 + 5 s holds exactly, so this product identity is tight.
    lhs = ctx.epsilon_2 * ctx.c_plus * ctx.c_minus
    rhs = (3.0 + 5.0 * ctx.s_j2) * ctx.omega_xy
    assert abs(lhs - rhs) <= 1e-14 * abs(rhs)


def test_k1_cross_identity(ctx):
    assert abs(ctx.k_1 * 4.0 * ctx.c_plus * ctx.omega_xy - ctx.c_minus * ctx.epsilon_2) \
        <= 1e-14 * ctx.c_minus * ctx.epsilon_2


def test_critical_inclination_zeroes_s():
    i_crit = 0.5 * math.acos(-1.0 / 3.0)
    c = build_context(R_REF_DEFAULT, i_crit)
    assert abs(c.s_j2) < 1e-16


def test_context_is_pure_function():
    a = default_context()
    b = default_context()
    assert a == b


def test_s_out_of_range_rejected():
    with pytest.raises(ValueError, match="s_j2"):
        build_context(7.0e6, 0.0, k_j2=1.0e30)
    with pytest.raises(ValueError, match="r_ref"):
        build_context(1.0e6, 0.3)
    with pytest.raises(ValueError, match="i_ref"):
        build_context(7.0e6, -0.1)


def test_theta_p_boundary(ctx):
    ok = make_plane(math.pi / 2.0 - 1e-9, 0.0, 0.5, ctx)
    rot_shat_from_o(ok, ctx)
    bad = type(ok)(theta_p=math.pi / 2.0, theta_zxy=0.0, r_avg=0.5,
                   r_xyd=ok.r_xyd, delta_theta=0.0)
    with pytest.raises(ValueError):
        rot_shat_from_o(bad, ctx)


def test_shat_norm_constant(ctx, plane4050):
    rot = rot_shat_from_o(plane4050, ctx)
    ts = np.linspace(0.0, ctx.period_xy, 100)
    pd = desired_position(ts, plane4050, 0.37, ctx)
    norms = np.linalg.norm(rot.apply(pd), axis=1)
    target = 2.0 * plane4050.r_xyd
    assert np.max(np.abs(norms - target)) <= 1e-9 * target


def test_cw_zero_angle_factors():
    c = build_context(R_REF_DEFAULT, 0.5 * math.acos(-1.0 / 3.0))  # s_j2 == 0
    plane = make_plane(math.radians(40.0), 0.0, 0.5, c)
    assert np.allclose(rot_oj2_from_o(c).matrix, np.eye(3))
    m = rot_s_from_oj2(plane).matrix
    tp = plane.theta_p
    expected = np.array([
        [math.cos(tp), 0.0, -math.sin(tp)],
        [0.0, 1.0, 0.0],
        [math.sin(tp), 0.0, math.cos(tp)],
    ])
    assert np.allclose(m, expected, atol=1e-15)


def test_sbar_rotation(ctx):
    assert np.allclose(rot_sbar_from_shat(0.0, ctx).matrix, np.eye(3))
    period = 2.0 * math.pi / ctx.omega_xy
    assert np.allclose(rot_sbar_from_shat(period, ctx).matrix, np.eye(3), atol=1e-12)
    half = rot_sbar_from_shat(period / 2.0, ctx).matrix
    assert np.allclose(half @ half, np.eye(3), atol=1e-12)


def test_factor_orthogonality(ctx, plane4050):
    for rot in (rot_s_from_oj2(plane4050), rot_sbar_from_shat(123.0, ctx)):
        m = rot.matrix
        assert np.max(np.abs(m @ m.T - np.eye(3))) < 1e-12
    # Scaling factors are diagonal by construction.
    assert np.count_nonzero(rot_oj2_from_o(ctx).matrix - np.diag(np.diag(rot_oj2_from_o(ctx).matrix))) == 0
    shat_s = rot_shat_from_s(plane4050).matrix
    # product of diag(1,1,2) Rx diag(1,1,sin) has orthogonal columns up to scaling
    gram = shat_s.T @ shat_s
    assert abs(gram[0, 1]) < 1e-15 and abs(gram[0, 2]) < 1e-15


def test_frame_label_mismatch_raises(ctx, plane30):
    a = rot_oj2_from_o(ctx)          # O -> O_J2
    b = rot_shat_from_s(plane30)     # S -> S_HAT
    with pytest.raises(ValueError, match="compose"):
        b @ a
    composed = rot_s_from_oj2(plane30) @ a
    assert composed.from_frame is Frame.O
    assert composed.to_frame is Frame.S


def test_nadir_direction(ctx, plane30):
    from swarmform.frames import nadir_direction_shat

    nadir = nadir_direction_shat(plane30, ctx)
    assert nadir.shape == (3,)
    # no in-plane rotation: the nadir stays in the x-z plane of the swarm frame
    assert nadir[1] == pytest.approx(0.0, abs=1e-15)
    assert nadir[0] == pytest.approx(-ctx.c_plus * math.cos(plane30.theta_p), rel=1e-12)


def test_apply_shapes(ctx):
    rot = rot_oj2_from_o(ctx)
    one = rot.apply(np.array([1.0, 2.0, 3.0]))
    many = rot.apply(np.array([[1.0, 2.0, 3.0]] * 4))
    assert one.shape == (3,)
    assert many.shape == (4, 3)
    assert np.allclose(many[0], one)
