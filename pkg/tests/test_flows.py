import math

import numpy as np
import pytest

from reactmix.errors import DivergenceError, ValidationError
from reactmix.flows import (
    FLOW_CATALOG,
    AlternatingShear,
    CustomFlow,
    ShearProfile,
    ZeroFlow,
    build_flow,
    bump,
    make_shear,
    smooth_step,
)
from reactmix.grid import Grid2D


@pytest.mark.parametrize("j", [1, 2, 3, 4])
def test_shear_vanishing_order(j):
    flow = make_shear(j)
    assert flow.profile.power == j + 1
    assert flow.profile.verify_vanishing_order() == j


def test_plain_sine_shear_has_order_one():
    prof = ShearProfile(1)
    assert prof.vanishing_order == 1
    assert round(prof.estimate_order(0.25)) == 1


def test_shear_is_divergence_free_and_sparse():
    g = Grid2D(32, 32)
    for d in "xy":
        flow = make_shear(2, amplitude=0.7, direction=d)
        assert flow.check_divergence() < 1e-12
        ux, uy = flow.sample(0.0, g)
        assert (uy is None) == (d == "x") and (ux is None) == (d == "y")
        modes = flow.sparse_modes(0.0, g)
        assert modes.bandwidth == 3
    assert make_shear(1).is_x_shear and not make_shear(1, direction="y").is_x_shear


def test_shear_speed_and_gradient():
    flow = make_shear(1, amplitude=2.0, power=1)
    assert flow.max_speed(0.0) == 2.0
    assert math.isclose(flow.max_gradient(), 4 * np.pi, rel_tol=1e-3)


def test_bad_shear_parameters():
    with pytest.raises(ValidationError):
        make_shear(0)
    with pytest.raises(ValidationError):
        ShearProfile(0)


def test_smooth_step_limits():
    r = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    np.testing.assert_allclose(smooth_step(r), [0, 0, 0.5, 1, 1])


def test_bump_shape():
    s = np.linspace(-0.5, 1.5, 2001)
    b = bump(s)
    assert np.all(b[(s <= 0) | (s >= 1)] == 0)
    assert np.all(b[(s >= 1 / 3) & (s <= 2 / 3)] == 1)
    assert np.all((b >= 0) & (b <= 1))
    np.testing.assert_allclose(b, bump(1 - s), atol=1e-15)


def test_alternating_blocks():
    flow = AlternatingShear(2.0, 1e-4)
    assert math.isclose(flow.T, 200.0)
    g = Grid2D(16, 16)
    ux, uy = flow.sample(0.5 * flow.T, g)
    assert uy is None and np.allclose(ux[0], np.sin(2 * np.pi * g.y))
    ux, uy = flow.sample(1.5 * flow.T, g)
    assert ux is None and np.allclose(uy[:, 0], np.sin(2 * np.pi * g.x))
    assert flow.sample(0.0, g) == (None, None)
    assert flow.amplitude(-1.0) == (0.0, 0)
    assert flow.block(2.5 * flow.T) == 2


def test_alternating_single_active_block():
    flow = AlternatingShear(1.0, 1e-2)
    ts = np.random.default_rng(0).uniform(0, 6 * flow.T, 300)
    for t in ts:
        assert sum(flow.phi(ell, t) != 0 for ell in range(8)) <= 1


def test_alternating_validation():
    with pytest.raises(ValidationError):
        AlternatingShear(0.0, 1e-3)
    with pytest.raises(ValidationError):
        AlternatingShear(1.0, 0.0)


def _rotational(g, a):
    x, y = g.mesh()
    arg = 2 * np.pi * (x + a * y)
    return 2 * np.pi * a * np.cos(arg), -2 * np.pi * np.cos(arg)


def test_custom_flow_interpolates_and_round_trips(tmp_path):
    g = Grid2D(16, 16)
    u1, v1 = _rotational(g, 1)
    u2, v2 = _rotational(g, 2)
    flow = CustomFlow(g, [0.0, 2.0], [u1, u2], [v1, v2])
    ux, _ = flow.sample(1.0, g)
    np.testing.assert_allclose(ux, 0.5 * (u1 + u2))
    np.testing.assert_allclose(flow.sample(-5.0, g)[0], u1)
    np.testing.assert_allclose(flow.sample(9.0, g)[0], u2)
    path = tmp_path / "flow.csv"
    flow.to_csv(path)
    back = CustomFlow.from_csv(path)
    np.testing.assert_array_equal(back.ux, flow.ux)
    np.testing.assert_array_equal(back.times, flow.times)


def test_custom_flow_rejects_compressible_frames():
    g = Grid2D(16, 16)
    x, _ = g.mesh()
    with pytest.raises(DivergenceError):
        CustomFlow(g, [0.0], [np.sin(2 * np.pi * x)], [np.zeros(g.shape)])


def test_custom_flow_rejects_bad_times():
    g = Grid2D(16, 16)
    z = np.zeros((2,) + g.shape)
    with pytest.raises(ValidationError):
        CustomFlow(g, [1.0, 0.0], z, z)


def test_build_flow_catalog():
    names = [f.name for f in FLOW_CATALOG]
    assert {"none", "static-shear-x", "static-shear-y", "alternating-shear", "custom"} <= set(names)
    assert isinstance(build_flow("none"), ZeroFlow)
    assert build_flow("static-shear-y", j=2).profile.power == 3
    assert isinstance(build_flow("alternating-shear", nu=1e-3, K=4), AlternatingShear)
    with pytest.raises(ValidationError):
        build_flow("vortex")
    with pytest.raises(ValidationError):
        build_flow("alternating-shear")
