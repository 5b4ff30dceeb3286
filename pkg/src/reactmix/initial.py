"""Initial-data presets."""

from __future__ import annotations

import csv

import numpy as np

from .errors import ValidationError
from .grid import Grid2D

TRUNCATE = 1e-14


def periodic_gaussian(grid: Grid2D, center, sigma, images=2):
    """Gaussian bump summed over periodic images, values below 1e-14 of the peak set to zero."""
    if not sigma > 0:
        raise ValidationError("sigma must be positive")
    x, y = grid.mesh()
    cx, cy = center
    out = np.zeros(grid.shape)
    for a in range(-images, images + 1):
        for b in range(-images, images + 1):
            out += np.exp(-((x - cx - a) ** 2 + (y - cy - b) ** 2) / (2 * sigma**2))
    out[out < TRUNCATE * out.max()] = 0.0
    return out


def gaussians(grid, centers, sigma=0.08, masses=1.0):
    """One normalized periodic Gaussian per center, each with the given mass (grid mean)."""
    centers = [tuple(c) for c in centers]
    masses = np.broadcast_to(np.asarray(masses, dtype=float), (len(centers),))
    fields = []
    for c, m in zip(centers, masses):
        g = periodic_gaussian(grid, c, sigma)
        fields.append(g * (m / g.mean()))
    return np.array(fields)


def separated_blobs(grid, sigma=0.08, mass=1.0):
    """Two blobs of equal mass centred at ``(-1/4, 0)`` and ``(1/4, 0)``."""
    return gaussians(grid, [(-0.25, 0.0), (0.25, 0.0)], sigma, mass)


def offset_gaussians(grid, sigma=0.12, mass=1.0, centers=None):
    """Two overlapping blobs offset in both x and y (default centres ``(-0.15, -0.1)``, ``(0.15, 0.1)``)."""
    centers = centers or [(-0.15, -0.1), (0.15, 0.1)]
    return gaussians(grid, centers, sigma, mass)


def single_mode(grid, mode=(1, 0), amplitude=1.0, mean=0.0, phase="sin", species=1):
    """``mean + amplitude * sin(2 pi (kx x + ky y))`` (or cos)."""
    x, y = grid.mesh()
    arg = 2 * np.pi * (mode[0] * x + mode[1] * y)
    wave = np.sin(arg) if phase == "sin" else np.cos(arg)
    f = mean + amplitude * wave
    return np.array([f] * species)


def uniform(grid, values):
    return np.array([np.full(grid.shape, float(v)) for v in values])


def random_smooth(grid, seed=0, kmax=4, species=1, amplitude=1.0):
    """Mean-zero random trigonometric polynomial with modes ``|k| <= kmax``."""
    rng = np.random.default_rng(seed)
    x, y = grid.mesh()
    out = []
    for _ in range(species):
        f = np.zeros(grid.shape)
        for kx in range(-kmax, kmax + 1):
            for ky in range(0, kmax + 1):
                if (kx, ky) == (0, 0) or (ky == 0 and kx < 0):
                    continue
                a, b = rng.normal(size=2)
                arg = 2 * np.pi * (kx * x + ky * y)
                f += a * np.cos(arg) + b * np.sin(arg)
        out.append(amplitude * f / np.sqrt(np.mean(f**2)))
    return np.array(out)


def from_csv(path, grid=None):
    """Read densities from CSV columns ``i,j,n1,...,nk``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["i", "j"] or len(header) < 3:
            raise ValidationError(f"{path}: expected header i,j,n1,...")
        rows = np.array([[float(v) for v in r] for r in reader if r])
    if rows.size == 0:
        raise ValidationError(f"{path}: no data rows")
    nx, ny = int(rows[:, 0].max()) + 1, int(rows[:, 1].max()) + 1
    g = grid or Grid2D(nx, ny)
    if (nx, ny) != g.shape:
        raise ValidationError(f"{path} holds a {nx}x{ny} grid, expected {g.shape}")
    k = rows.shape[1] - 2
    out = np.full((k, nx, ny), np.nan)
    i, j = rows[:, 0].astype(int), rows[:, 1].astype(int)
    for a in range(k):
        out[a, i, j] = rows[:, 2 + a]
    if np.isnan(out).any():
        raise ValidationError(f"{path} does not cover every grid point")
    return out


def to_csv(path, values):
    v = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j"] + [f"n{a + 1}" for a in range(v.shape[0])])
        for i in range(v.shape[1]):
            for j in range(v.shape[2]):
                w.writerow([i, j] + [repr(float(v[a, i, j])) for a in range(v.shape[0])])


PRESETS = ("single-mode", "separated-blobs", "offset-gaussians", "uniform", "random-smooth", "csv")


def build_initial(grid, spec):
    """Initial densities from an :class:`~reactmix.config.InitialSpec`."""
    p = spec.preset
    if p == "single-mode":
        return single_mode(grid, tuple(spec.mode), spec.amplitude, spec.mean, spec.phase, spec.species)
    if p == "separated-blobs":
        return separated_blobs(grid, spec.sigma, spec.mass)
    if p == "offset-gaussians":
        return offset_gaussians(grid, spec.sigma, spec.mass, spec.centers)
    if p == "uniform":
        vals = spec.values if spec.values is not None else [spec.mass] * spec.species
        return uniform(grid, vals)
    if p == "random-smooth":
        return spec.mean + random_smooth(grid, spec.seed, spec.kmax, spec.species, spec.amplitude)
    if p == "csv":
        if not spec.path:
            raise ValidationError("csv preset needs a path")
        return from_csv(spec.path, grid)
    raise ValidationError(f"unknown initial preset {p!r}; choose from {PRESETS}")
