import math

import numpy as np
import pytest

from reactmix import diagnostics as dg
from reactmix.errors import ValidationError
from reactmix.grid import Field2D, Grid2D


@pytest.fixture
def grid():
    return Grid2D(16, 32)


def test_norms(grid):
    v = np.full(grid.shape, -2.0)
    assert dg.l1(v) == 2.0 and dg.l2(v) == 2.0 and dg.linf(v) == 2.0
    assert dg.mass(Field2D(grid, v)) == -2.0


def test_decomposition(grid):
    x, y = grid.mesh()
    f = Field2D(grid, 3 + np.sin(2 * np.pi * y) + np.cos(2 * np.pi * x) * np.sin(4 * np.pi * y))
    avg = dg.x_average(f)
    np.testing.assert_allclose(avg.values, 3 + np.sin(2 * np.pi * grid.y), atol=1e-14)
    rem = dg.remainder(f)
    np.testing.assert_allclose(rem.values, np.cos(2 * np.pi * x) * np.sin(4 * np.pi * y), atol=1e-14)
    assert abs(dg.mean_zero_part(f).values.mean()) < 1e-15


def test_overlap(grid):
    _, y = grid.mesh()
    a = Field2D(grid, 1 + 0.5 * np.sin(2 * np.pi * y))
    b = Field2D(grid, 1 - 0.5 * np.sin(2 * np.pi * y))
    # min(1 + s, 1 - s) = 1 - |s|; the grid mean of |sin| on n points is (2/n) cot(pi/n)
    n = grid.n_y
    assert math.isclose(dg.overlap_mass(a, b), 1 - (1 / n) / math.tan(math.pi / n), rel_tol=1e-12)
    assert dg.overlap_mass(a, b) == dg.overlap_mass(b, a)
    assert math.isclose(dg.overlap_mass(a), 1.0)
    with pytest.raises(ValidationError):
        dg.overlap_mass()


def test_record_fluctuations_match_physical_norms(grid):
    v = np.random.default_rng(0).normal(size=(2,) + grid.shape) + 2
    rec = dg.record(0.5, v, Q=0.1)
    sim = [dg.l2(x - x.mean()) for x in v]
    neq = [dg.l2(x - x.mean(axis=0)) for x in v]
    assert math.isclose(rec.fluct_sim, math.hypot(*sim), rel_tol=1e-12)
    assert math.isclose(rec.fluct_neq, math.hypot(*neq), rel_tol=1e-12)
    assert math.isclose(rec.M_all, sum(rec.masses))
    assert math.isclose(rec.sum_l2, sum(rec.l2))


def test_fluctuations_below_rounding_of_mean_are_kept(grid):
    x, _ = grid.mesh()
    spec = np.fft.rfft2(np.array([5 + 1e-30 * np.cos(2 * np.pi * x)]), axes=(1, 2))
    spec[0, 1, 0] = spec[0, -1, 0] = 0.5 * 1e-30 * grid.n_y * grid.n_x
    sim, neq = dg.fluctuation_norms(spec, grid.n_y)
    assert math.isclose(sim[0], 1e-30 / math.sqrt(2), rel_tol=1e-12)
    assert math.isclose(neq[0], sim[0])


def test_fit_recovers_exact_rate():
    t = np.linspace(0, 2, 30)
    fit = dg.fit_decay_rate(np.c_[t, 5 * np.exp(-3 * t)])
    assert math.isclose(fit.rate, 3.0, rel_tol=1e-12)
    assert math.isclose(fit.intercept, math.log(5), rel_tol=1e-12)
    assert fit.r2 > 1 - 1e-12 and fit.samples == 30


def test_fit_window_and_errors():
    t = np.linspace(0, 10, 101)
    y = np.where(t < 5, np.exp(-t), np.exp(-5) * np.exp(-2 * (t - 5)))
    assert math.isclose(dg.fit_decay_rate(np.c_[t, y], (5, 10)).rate, 2.0, rel_tol=1e-10)
    with pytest.raises(ValidationError):
        dg.fit_decay_rate(np.c_[t[:5], y[:5]])
    with pytest.raises(ValidationError):
        dg.fit_decay_rate(np.c_[t, -y])


def test_half_life():
    t = np.linspace(0, 4, 401)
    assert math.isclose(dg.half_life(np.c_[t, np.exp(-t)]), math.log(2), rel_tol=1e-4)
    assert dg.half_life(np.c_[t, np.ones_like(t)]) is None
    with pytest.raises(ValidationError):
        dg.half_life(np.c_[t, t], 1.5)


def test_characteristic_times():
    t0, t1 = dg.characteristic_times((2.0, 0.5), 1.0, 0.5, c_cal=1.0)
    assert math.isclose(t0, math.log((0.5 * 2 + 1) * 2 / 0.5))
    assert math.isclose(t1, 4.0)
    # a huge overlap would give a negative mixing time; it is clipped
    assert dg.characteristic_times((0.1, 10.0), 1.0, 0.5)[0] == 0.0
    with pytest.raises(ValidationError):
        dg.characteristic_times((1.0, 1.0), -1.0, 0.5)


def test_assumption_flags():
    rec = dg.record(0.0, np.stack([np.full((16, 16), 1.0), np.full((16, 16), 0.25)]))
    flags = dg.assumption_flags(rec, B=2, B1=2, B2=4)
    assert flags == {"B": True, "B1": False, "B2": False}
    assert dg.assumption_flags(rec) == {}


def test_csv_round_trip(tmp_path, grid):
    v = np.random.default_rng(1).uniform(size=(2,) + grid.shape)
    recs = [dg.record(t, v * math.exp(-t), flags={"B": True}) for t in (0.0, 0.1, 0.2)]
    path = tmp_path / "d.csv"
    dg.write_csv(path, recs, "abc")
    cols = dg.read_csv(path)
    assert list(cols)[:3] == ["t", "mass_1", "mass_2"]
    np.testing.assert_array_equal(cols["t"], [0.0, 0.1, 0.2])
    np.testing.assert_array_equal(cols["fluct_sim"], [r.fluct_sim for r in recs])
    assert cols["flags"] == ["B=1"] * 3
    with pytest.raises(ValidationError):
        dg.write_csv(path, [], "abc")
