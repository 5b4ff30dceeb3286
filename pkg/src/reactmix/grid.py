"""Periodic grids on the unit torus and the fields that live on them.

Point ``(i, j)`` sits at ``(x, y) = (-1/2 + i/n_x, -1/2 + j/n_y)``.  Arrays are
indexed ``[i, j]`` so axis 0 is x and axis 1 is y.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import fft as sfft

from .errors import ValidationError


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on ``[-1/2, 1/2)^2``.

    Parameters
    ----------
    n_x, n_y : int
        Points per direction; powers of two, at least 16.
    """

    n_x: int
    n_y: int
    length: float = 1.0

    def __post_init__(self):
        for name in ("n_x", "n_y"):
            n = getattr(self, name)
            if not isinstance(n, (int, np.integer)) or not _is_pow2(int(n)) or n < 16:
                raise ValidationError(f"{name} must be a power of two >= 16, got {n!r}")
        if self.length != 1.0:
            raise ValidationError("only the unit torus (length=1) is supported")

    @classmethod
    def square(cls, n):
        return cls(int(n), int(n))

    @property
    def shape(self):
        return (self.n_x, self.n_y)

    @property
    def spectral_shape(self):
        return (self.n_x, self.n_y // 2 + 1)

    @property
    def dx(self):
        return self.length / self.n_x

    @property
    def dy(self):
        return self.length / self.n_y

    @property
    def size(self):
        return self.n_x * self.n_y

    @cached_property
    def x(self):
        return -0.5 + np.arange(self.n_x) / self.n_x

    @cached_property
    def y(self):
        return -0.5 + np.arange(self.n_y) / self.n_y

    def mesh(self):
        """Coordinate arrays ``(X, Y)`` with shape ``(n_x, n_y)``."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def kx(self):
        """Signed integer wavenumbers along x (full axis)."""
        return sfft.fftfreq(self.n_x, 1.0 / self.n_x)

    @cached_property
    def ky(self):
        """Non-negative wavenumbers along y (half axis of the real transform)."""
        return sfft.rfftfreq(self.n_y, 1.0 / self.n_y)

    @cached_property
    def laplacian(self):
        """Symbol of the Laplacian on the half spectrum."""
        k2 = self.kx[:, None] ** 2 + self.ky[None, :] ** 2
        return -4.0 * np.pi**2 * k2

    @cached_property
    def dealias_mask(self):
        """Two-thirds rule: keep ``|k| <= n/3`` in each direction."""
        keep_x = np.abs(self.kx) <= self.n_x // 3
        keep_y = self.ky <= self.n_y // 3
        return np.ascontiguousarray(keep_x[:, None] & keep_y[None, :])

    @cached_property
    def nyquist_free(self):
        """Mask zeroing the Nyquist row and column, used for derivatives."""
        keep_x = np.abs(self.kx) < self.n_x // 2
        keep_y = self.ky < self.n_y // 2
        return np.ascontiguousarray(keep_x[:, None] & keep_y[None, :])

    @cached_property
    def half_weights(self):
        """Multiplicity of each half-spectrum entry in the full spectrum."""
        w = np.full(self.spectral_shape, 2.0)
        w[:, 0] = 1.0
        w[:, -1] = 1.0
        return w

    def forward(self, values):
        """Raw real-to-complex transform over the last two axes."""
        return sfft.rfft2(values, axes=(-2, -1))

    def inverse(self, coeffs):
        return sfft.irfft2(coeffs, s=self.shape, axes=(-2, -1))


@dataclass
class Field2D:
    """Scalar field on a :class:`Grid2D`.

    ``representation`` is ``"physical"`` (real grid values) or ``"spectral"``
    (normalized complex Fourier coefficients in FFT order, shape ``(n_x, n_y)``,
    with ``values[0, 0]`` equal to the mean).
    """

    grid: Grid2D
    values: np.ndarray
    representation: str = "physical"

    def __post_init__(self):
        if self.representation not in ("physical", "spectral"):
            raise ValidationError(f"unknown representation {self.representation!r}")
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise ValidationError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")
        if self.representation == "physical" and np.iscomplexobj(self.values):
            raise ValidationError("physical field must be real")

    def copy(self):
        return Field2D(self.grid, self.values.copy(), self.representation)


@dataclass
class Field1D:
    """Real field on the periodic y-circle of a grid."""

    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_y,):
            raise ValidationError(f"1D field needs {self.grid.n_y} values, got {self.values.shape}")


def _phase(grid):
    # (-1)^(kx+ky) moves the transform origin from the first grid point to 0
    sx = np.where(np.abs(sfft.fftfreq(grid.n_x, 1.0 / grid.n_x)).astype(int) % 2 == 0, 1.0, -1.0)
    sy = np.where(np.abs(sfft.fftfreq(grid.n_y, 1.0 / grid.n_y)).astype(int) % 2 == 0, 1.0, -1.0)
    return sx[:, None] * sy[None, :]


def to_spectral(f: Field2D) -> Field2D:
    """Normalized Fourier coefficients of a physical field.

    ``values[kx, ky]`` multiplies ``exp(2 pi i (kx x + ky y))`` in FFT index
    order, so ``cos(2 pi x)`` maps to ``1/2`` at ``(+-1, 0)``.
    """
    if f.representation != "physical":
        raise ValidationError("to_spectral needs a physical field")
    if not np.all(np.isfinite(f.values)):
        raise ValidationError("field contains NaN or infinite values")
    c = sfft.fft2(f.values) / f.grid.size * _phase(f.grid)
    return Field2D(f.grid, c, "spectral")


def to_physical(f: Field2D) -> Field2D:
    """Inverse of :func:`to_spectral`; the imaginary round-off is dropped."""
    if f.representation != "spectral":
        raise ValidationError("to_physical needs a spectral field")
    if not np.all(np.isfinite(f.values)):
        raise ValidationError("field contains NaN or infinite values")
    v = sfft.ifft2(f.values * _phase(f.grid) * f.grid.size)
    return Field2D(f.grid, np.ascontiguousarray(v.real), "physical")


def field_from_function(grid, fn):
    """Sample ``fn(X, Y)`` on the grid."""
    x, y = grid.mesh()
    return Field2D(grid, np.asarray(fn(x, y), dtype=float) * np.ones(grid.shape))
