"""Divergence-free velocity fields: static shears, alternating shears, tabulated flows.

Every flow exposes ``sample(t, grid) -> (ux, uy)`` where a component that is
identically zero is returned as ``None``.  Flows that are trigonometric
polynomials also report their few nonzero Fourier modes so the stepper can
advect in spectral space without transforms.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import DivergenceError, ValidationError
from .grid import Grid2D

DIV_TOL = 1e-10
_CHECK_GRID = Grid2D(64, 64)


def _spectral_divergence(grid, ux, uy):
    div = np.zeros(grid.spectral_shape, dtype=complex)
    if ux is not None:
        div += 2j * np.pi * grid.kx[:, None] * grid.forward(ux) * grid.nyquist_free
    if uy is not None:
        div += 2j * np.pi * grid.ky[None, :] * grid.forward(uy) * grid.nyquist_free
    return float(np.max(np.abs(grid.inverse(div)))) if (ux is not None or uy is not None) else 0.0


def _modes_of(grid, values, tol=1e-13):
    """Nonzero normalized Fourier modes of a real field, in raw FFT phase."""
    c = sfft.fft2(values) / grid.size
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return []
    ix, iy = np.nonzero(np.abs(c) > tol * scale)
    kx = np.where(ix < grid.n_x // 2, ix, ix - grid.n_x)
    ky = np.where(iy < grid.n_y // 2, iy, iy - grid.n_y)
    return [(int(a), int(b), complex(c[i, j])) for a, b, i, j in zip(kx, ky, ix, iy)]


@dataclass(frozen=True)
class SparseModes:
    """Flow written as ``sum_m u_m exp(2 pi i m . xi)`` with few modes."""

    mx: np.ndarray
    my: np.ndarray
    uxh: np.ndarray
    uyh: np.ndarray

    @property
    def bandwidth(self):
        if len(self.mx) == 0:
            return 0
        return int(max(np.max(np.abs(self.mx)), np.max(np.abs(self.my))))

    def scaled(self, factor):
        return SparseModes(self.mx, self.my, self.uxh * factor, self.uyh * factor)


def _sparse_from_components(grid, ux, uy):
    table = {}
    for comp, values in ((0, ux), (1, uy)):
        if values is None:
            continue
        for a, b, c in _modes_of(grid, values):
            entry = table.setdefault((a, b), [0j, 0j])
            entry[comp] = c
    keys = sorted(table)
    return SparseModes(
        np.array([k[0] for k in keys], dtype=np.int64),
        np.array([k[1] for k in keys], dtype=np.int64),
        np.array([table[k][0] for k in keys], dtype=complex),
        np.array([table[k][1] for k in keys], dtype=complex),
    )


class FlowField:
    """Base class; subclasses fill in :meth:`sample` and :meth:`max_speed`."""

    kind = "abstract"
    time_dependent = False

    def sample(self, t, grid):
        raise NotImplementedError

    def max_speed(self, t):
        raise NotImplementedError

    def max_gradient(self):
        """Upper bound on ``|grad u|`` over space and time."""
        raise NotImplementedError

    def sparse_modes(self, t, grid):
        """Nonzero Fourier modes at time ``t``, or ``None`` for dense flows."""
        return None

    @property
    def is_x_shear(self):
        return False

    def check_divergence(self, grid=None, times=None):
        """Largest ``|div u|`` over the check times; raises past tolerance."""
        grid = grid or _CHECK_GRID
        if times is None:
            times = [0.0]
        worst = 0.0
        for t in times:
            ux, uy = self.sample(float(t), grid)
            worst = max(worst, _spectral_divergence(grid, ux, uy))
        if worst > DIV_TOL:
            raise DivergenceError(f"{self.kind} flow has divergence {worst:.3e} > {DIV_TOL:g}")
        return worst

    def describe(self):
        return {"kind": self.kind}


class ZeroFlow(FlowField):
    """``u = 0``."""

    kind = "none"

    def sample(self, t, grid):
        return None, None

    def max_speed(self, t):
        return 0.0

    def max_gradient(self):
        return 0.0

    def sparse_modes(self, t, grid):
        return SparseModes(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, complex), np.zeros(0, complex))

    @property
    def is_x_shear(self):
        return True


@dataclass(frozen=True)
class ShearProfile:
    """Profile ``amplitude * sin(2 pi s)**power``.

    With ``power = j + 1`` the derivative vanishes to order ``j`` at ``s = 0``,
    and to order one at the remaining critical points.
    """

    power: int
    amplitude: float = 1.0

    def __post_init__(self):
        if self.power < 1:
            raise ValidationError(f"profile power must be >= 1, got {self.power}")

    def __call__(self, s):
        return self.amplitude * np.sin(2.0 * np.pi * np.asarray(s, dtype=float)) ** self.power

    @property
    def vanishing_order(self):
        return max(self.power - 1, 1)

    def critical_points(self):
        pts = [-0.25, 0.25]
        if self.power > 1:
            pts += [-0.5, 0.0]
        return sorted(pts)

    def estimate_order(self, s0, h=1e-3):
        """Order of vanishing of the derivative at ``s0`` from forward differences.

        ``p(s0 + h) - p(s0)`` scales like ``h**(order + 1)``, so the ratio at
        ``2h`` and ``h`` gives the order.
        """
        p0 = float(self(s0))
        d1 = abs(float(self(s0 + h)) - p0)
        d2 = abs(float(self(s0 + 2 * h)) - p0)
        if d1 == 0.0 or d2 == 0.0:
            return math.inf
        return math.log2(d2 / d1) - 1.0

    def verify_vanishing_order(self):
        """Check the finite-difference order matches :attr:`vanishing_order`."""
        orders = [self.estimate_order(s0) for s0 in self.critical_points()]
        measured = max(round(o) for o in orders)
        if measured != self.vanishing_order:
            raise ValidationError(
                f"profile sin^{self.power}: measured vanishing order {measured}, expected {self.vanishing_order}"
            )
        return measured

    def max_slope(self):
        s = np.linspace(-0.5, 0.5, 4097)
        return float(np.max(np.abs(np.gradient(self(s), s))))


class ShearFlow(FlowField):
    """Static shear ``(p(y), 0)`` or ``(0, p(x))``."""

    time_dependent = False

    def __init__(self, profile: ShearProfile, direction="x"):
        if direction not in ("x", "y"):
            raise ValidationError(f"shear direction must be 'x' or 'y', got {direction!r}")
        self.profile = profile
        self.direction = direction
        self.kind = f"static-shear-{direction}"
        self._modes = {}
        self.check_divergence()

    def sample(self, t, grid):
        if self.direction == "x":
            u = np.broadcast_to(self.profile(grid.y)[None, :], grid.shape).copy()
            return u, None
        u = np.broadcast_to(self.profile(grid.x)[:, None], grid.shape).copy()
        return None, u

    def max_speed(self, t):
        return abs(self.profile.amplitude)

    def max_gradient(self):
        return self.profile.max_slope()

    def sparse_modes(self, t, grid):
        key = grid.shape
        if key not in self._modes:
            ux, uy = self.sample(0.0, grid)
            self._modes[key] = _sparse_from_components(grid, ux, uy)
        return self._modes[key]

    @property
    def is_x_shear(self):
        return self.direction == "x"

    def describe(self):
        return {"kind": self.kind, "power": self.profile.power, "amplitude": self.profile.amplitude}


def make_shear(j, amplitude=1.0, direction="x", power=None):
    """Shear with derivative vanishing to order ``j``: profile ``sin(2 pi s)**(j+1)``.

    Passing ``power`` overrides the exponent directly (``power=1`` is the
    plain sine shear, whose vanishing order is one).
    """
    if power is None:
        if j < 1:
            raise ValidationError(f"vanishing order must be >= 1, got {j}")
        power = j + 1
    profile = ShearProfile(int(power), float(amplitude))
    profile.verify_vanishing_order()
    return ShearFlow(profile, direction)


def _g(r):
    with np.errstate(over="ignore", divide="ignore"):
        return np.where(r > 0, np.exp(-1.0 / np.where(r > 0, r, 1.0)), 0.0)


def smooth_step(r):
    """``g(r) / (g(r) + g(1 - r))`` with ``g(r) = exp(-1/r)``; 0 below 0, 1 above 1."""
    r = np.clip(np.asarray(r, dtype=float), 0.0, 1.0)
    a, b = _g(r), _g(1.0 - r)
    return a / (a + b)


def bump(s):
    """Plateau profile on ``[0, 1]``: ramps up on the first third, down on the last."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    up = (s >= 0) & (s < 1 / 3)
    mid = (s >= 1 / 3) & (s <= 2 / 3)
    down = (s > 2 / 3) & (s <= 1)
    out[up] = smooth_step(3 * s[up])
    out[mid] = 1.0
    out[down] = smooth_step(3 * (1 - s[down]))
    return out


def _bump_scalar(s):
    if s <= 0.0 or s >= 1.0:
        return 0.0
    if 1 / 3 <= s <= 2 / 3:
        return 1.0
    r = 3 * s if s < 1 / 3 else 3 * (1 - s)
    a = math.exp(-1.0 / r) if r > 0 else 0.0
    b = math.exp(-1.0 / (1.0 - r)) if r < 1 else 0.0
    return a / (a + b)


class AlternatingShear(FlowField):
    """Shears along x and y in alternating blocks of length ``T = K / sqrt(nu)``.

    Block ``l`` covers ``[l T, (l+1) T]`` with amplitude ``bump(t/T - l)``;
    even blocks use ``(sin 2 pi y, 0)`` and odd blocks ``(0, sin 2 pi x)``.
    """

    kind = "alternating-shear"
    time_dependent = True
    # the bump reaches 1 on the middle third of every block
    peak_speed = 1.0

    def __init__(self, K, nu, seed=0):
        if not K > 0:
            raise ValidationError(f"K must be positive, got {K}")
        if not 0 < nu <= 1:
            raise ValidationError(f"nu must lie in (0, 1], got {nu}")
        self.K = float(K)
        self.nu = float(nu)
        self.T = self.K / math.sqrt(self.nu)
        self._base = {}
        rng = np.random.default_rng(seed)
        times = rng.uniform(0.0, 4 * self.T, size=8)
        self.check_divergence(times=np.concatenate([[0.0, 0.5 * self.T, 1.5 * self.T], times]))

    def block(self, t):
        """Index of the block containing ``t`` (``-1`` before the start)."""
        return -1 if t < 0 else int(math.floor(t / self.T))

    def phi(self, ell, t):
        return _bump_scalar(t / self.T - ell)

    def amplitude(self, t):
        ell = self.block(t)
        if ell < 0:
            return 0.0, 0
        return self.phi(ell, t), ell

    def sample(self, t, grid):
        a, ell = self.amplitude(t)
        if a == 0.0:
            return None, None
        if ell % 2 == 0:
            u = np.broadcast_to(np.sin(2 * np.pi * grid.y)[None, :], grid.shape) * a
            return np.ascontiguousarray(u), None
        u = np.broadcast_to(np.sin(2 * np.pi * grid.x)[:, None], grid.shape) * a
        return None, np.ascontiguousarray(u)

    def max_speed(self, t):
        return abs(self.amplitude(t)[0])

    def max_gradient(self):
        return 2 * np.pi

    def sparse_modes(self, t, grid):
        a, ell = self.amplitude(t)
        key = (grid.shape, ell % 2)
        if key not in self._base:
            if ell % 2 == 0:
                u = np.broadcast_to(np.sin(2 * np.pi * grid.y)[None, :], grid.shape)
                self._base[key] = _sparse_from_components(grid, u, None)
            else:
                u = np.broadcast_to(np.sin(2 * np.pi * grid.x)[:, None], grid.shape)
                self._base[key] = _sparse_from_components(grid, None, u)
        return self._base[key].scaled(a)

    def describe(self):
        return {"kind": self.kind, "K": self.K, "nu": self.nu, "T": self.T}


class CustomFlow(FlowField):
    """Tabulated flow, linear in time between frames and held outside them."""

    kind = "custom"
    time_dependent = True

    def __init__(self, grid, times, ux, uy):
        self.grid = grid
        self.times = np.asarray(times, dtype=float)
        self.ux = np.asarray(ux, dtype=float)
        self.uy = np.asarray(uy, dtype=float)
        if self.times.ndim != 1 or len(self.times) < 1:
            raise ValidationError("custom flow needs at least one frame")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("custom flow frame times must be strictly increasing")
        want = (len(self.times),) + grid.shape
        if self.ux.shape != want or self.uy.shape != want:
            raise ValidationError(f"custom flow frames must have shape {want}")
        self._speeds = np.max(np.hypot(self.ux, self.uy), axis=(1, 2))
        for k in range(len(self.times)):
            worst = _spectral_divergence(grid, self.ux[k], self.uy[k])
            if worst > DIV_TOL:
                raise DivergenceError(f"custom flow frame {k} has divergence {worst:.3e} > {DIV_TOL:g}")

    def _weights(self, t):
        ts = self.times
        if t <= ts[0]:
            return 0, 0, 0.0
        if t >= ts[-1]:
            k = len(ts) - 1
            return k, k, 0.0
        k = int(np.searchsorted(ts, t, side="right")) - 1
        w = (t - ts[k]) / (ts[k + 1] - ts[k])
        return k, k + 1, w

    def sample(self, t, grid):
        if grid.shape != self.grid.shape:
            raise ValidationError(f"custom flow is tabulated on {self.grid.shape}, not {grid.shape}")
        a, b, w = self._weights(t)
        ux = (1 - w) * self.ux[a] + w * self.ux[b]
        uy = (1 - w) * self.uy[a] + w * self.uy[b]
        return ux, uy

    def max_speed(self, t):
        a, b, w = self._weights(t)
        return float(max(self._speeds[a], self._speeds[b]))

    def max_gradient(self):
        g = self.grid
        worst = 0.0
        for k in range(len(self.times)):
            for comp in (self.ux[k], self.uy[k]):
                c = g.forward(comp) * g.nyquist_free
                for sym in (g.kx[:, None], g.ky[None, :]):
                    d = g.inverse(2j * np.pi * sym * c)
                    worst = max(worst, float(np.max(np.abs(d))))
        return worst

    @classmethod
    def from_csv(cls, path):
        """Read rows ``t,i,j,ux,uy``; grid size is inferred from the largest index."""
        rows = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"t", "i", "j", "ux", "uy"} - set(reader.fieldnames or [])
            if missing:
                raise ValidationError(f"custom flow CSV missing columns {sorted(missing)}")
            for r in reader:
                rows.append((float(r["t"]), int(r["i"]), int(r["j"]), float(r["ux"]), float(r["uy"])))
        if not rows:
            raise ValidationError("custom flow CSV has no rows")
        arr = np.array(rows)
        nx = int(arr[:, 1].max()) + 1
        ny = int(arr[:, 2].max()) + 1
        grid = Grid2D(nx, ny)
        times = np.unique(arr[:, 0])
        ux = np.full((len(times), nx, ny), np.nan)
        uy = np.full((len(times), nx, ny), np.nan)
        k = np.searchsorted(times, arr[:, 0])
        i = arr[:, 1].astype(int)
        j = arr[:, 2].astype(int)
        ux[k, i, j] = arr[:, 3]
        uy[k, i, j] = arr[:, 4]
        if np.isnan(ux).any() or np.isnan(uy).any():
            raise ValidationError("custom flow CSV does not cover every grid point of every frame")
        return cls(grid, times, ux, uy)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "i", "j", "ux", "uy"])
            for k, t in enumerate(self.times):
                for i in range(self.grid.n_x):
                    for j in range(self.grid.n_y):
                        w.writerow([repr(float(t)), i, j, repr(float(self.ux[k, i, j])), repr(float(self.uy[k, i, j]))])

    def describe(self):
        return {"kind": self.kind, "frames": len(self.times), "grid": list(self.grid.shape)}


@dataclass(frozen=True)
class FlowInfo:
    name: str
    summary: str
    params: dict = field(default_factory=dict)


FLOW_CATALOG = (
    FlowInfo("none", "no flow, pure reaction-diffusion"),
    FlowInfo("static-shear-x", "u = (A sin(2 pi y)^(j+1), 0)", {"j": "vanishing order >= 1", "amplitude": "A"}),
    FlowInfo("static-shear-y", "u = (0, A sin(2 pi x)^(j+1))", {"j": "vanishing order >= 1", "amplitude": "A"}),
    FlowInfo(
        "alternating-shear",
        "x and y sine shears switched on in alternating blocks of length K/sqrt(nu)",
        {"K": "block length factor"},
    ),
    FlowInfo("custom", "tabulated frames from CSV with columns t,i,j,ux,uy", {"path": "CSV file"}),
)


def build_flow(kind, nu=None, j=1, amplitude=1.0, K=2.0, power=None, path=None, seed=0):
    """Construct a flow from its catalog name."""
    if kind == "none":
        return ZeroFlow()
    if kind in ("static-shear-x", "static-shear-y"):
        return make_shear(j, amplitude, direction=kind[-1], power=power)
    if kind == "alternating-shear":
        if nu is None:
            raise ValidationError("alternating-shear needs nu to set the block length")
        return AlternatingShear(K, nu, seed=seed)
    if kind == "custom":
        if not path:
            raise ValidationError("custom flow needs a CSV path")
        return CustomFlow.from_csv(path)
    raise ValidationError(f"unknown flow kind {kind!r}; choose from {[f.name for f in FLOW_CATALOG]}")
