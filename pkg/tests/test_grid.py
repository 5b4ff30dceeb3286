import numpy as np
import pytest

from reactmix.errors import ValidationError
from reactmix.grid import Field1D, Field2D, Grid2D, field_from_function, to_physical, to_spectral


def brute_dft(grid, values):
    """O(N^4) coefficients of ``sum c_k exp(2 pi i k.x)`` sampled at the grid points."""
    x, y = grid.mesh()
    kx = np.fft.fftfreq(grid.n_x, 1 / grid.n_x)
    ky = np.fft.fftfreq(grid.n_y, 1 / grid.n_y)
    out = np.zeros(grid.shape, dtype=complex)
    for a, k in enumerate(kx):
        for b, l in enumerate(ky):
            out[a, b] = np.mean(values * np.exp(-2j * np.pi * (k * x + l * y)))
    return out


def test_grid_points_start_at_minus_half():
    g = Grid2D(16, 32)
    assert g.x[0] == -0.5 and g.y[0] == -0.5
    assert np.isclose(g.x[1] - g.x[0], 1 / 16)
    assert g.shape == (16, 32)
    assert g.spectral_shape == (16, 17)


@pytest.mark.parametrize("n", [8, 24, 0, -16])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValidationError):
        Grid2D(n, 16)


def test_cos_maps_to_one_half():
    g = Grid2D(16, 16)
    f = field_from_function(g, lambda x, y: np.cos(2 * np.pi * x))
    c = to_spectral(f).values
    assert np.isclose(c[1, 0], 0.5) and np.isclose(c[-1, 0], 0.5)
    c[1, 0] = c[-1, 0] = 0
    assert np.max(np.abs(c)) < 1e-14


def test_spectral_matches_brute_force_dft():
    g = Grid2D(16, 16)
    v = np.random.default_rng(3).normal(size=g.shape)
    ours = to_spectral(Field2D(g, v)).values
    assert np.max(np.abs(ours - brute_dft(g, v))) < 1e-13


def test_round_trip():
    g = Grid2D(32, 64)
    v = np.random.default_rng(0).normal(size=g.shape)
    back = to_physical(to_spectral(Field2D(g, v)))
    assert back.representation == "physical"
    np.testing.assert_allclose(back.values, v, atol=1e-13)


def test_mean_is_zero_mode():
    g = Grid2D(16, 16)
    v = np.random.default_rng(1).normal(size=g.shape) + 2.5
    assert np.isclose(to_spectral(Field2D(g, v)).values[0, 0].real, v.mean())


def test_non_finite_rejected():
    g = Grid2D(16, 16)
    v = np.zeros(g.shape)
    v[3, 4] = np.nan
    with pytest.raises(ValidationError):
        to_spectral(Field2D(g, v))


def test_field_shape_checked():
    g = Grid2D(16, 16)
    with pytest.raises(ValidationError):
        Field2D(g, np.zeros((16, 8)))
    with pytest.raises(ValidationError):
        Field1D(g, np.zeros(8))
    with pytest.raises(ValidationError):
        Field2D(g, np.zeros(g.shape), "wavelet")


def test_dealias_mask_keeps_two_thirds():
    g = Grid2D(64, 64)
    m = g.dealias_mask
    kx = np.abs(g.kx)[:, None] * np.ones(g.spectral_shape)
    assert np.all(m[kx > 64 // 3] == 0)
    assert m[0, 0] and m[21, 21]


def test_laplacian_symbol():
    g = Grid2D(16, 16)
    assert np.isclose(g.laplacian[1, 2], -4 * np.pi**2 * 5)
