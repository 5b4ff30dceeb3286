"""Integrating-factor RK4 time stepping for advection-diffusion(-reaction) systems.

The state is a stack of raw real-to-complex spectra, one per field.  Diffusion
is integrated exactly through the integrating factor; advection (in divergence
form, so the mean is untouched) and any reaction terms form the explicit part.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import CFLViolation, NonFiniteError, ValidationError
from .grid import Field2D, Grid2D

SCHEMES = ("if-rk4",)
ADVECTION_MODES = ("auto", "pseudo", "sparse")
# coefficients below this are set to zero after each step; left alone, decayed
# high modes drift into subnormal floats and slow every kernel by 10-100x
FLUSH_BELOW = 1e-290


@dataclass(frozen=True)
class StepperConfig:
    """Time step and discretization switches.

    Parameters
    ----------
    dt : float
        Nominal step; the last step of a run is shortened to land on ``t_end``.
    dealias : bool
        Apply the two-thirds mask to the explicit terms.
    scheme : str
        Only ``"if-rk4"`` is implemented.
    cfl : float
        Advective bound ``dt <= cfl * dx / max|u|``.
    reaction_cfl : float
        Reactive bound ``dt <= reaction_cfl / (eps * max|n|)``.
    advection : str
        ``"sparse"`` convolves with the flow's few Fourier modes, ``"pseudo"``
        multiplies on the grid, ``"auto"`` uses sparse when it is exact.
    """

    dt: float
    dealias: bool = True
    scheme: str = "if-rk4"
    cfl: float = 0.5
    reaction_cfl: float = 0.1
    advection: str = "auto"

    def __post_init__(self):
        if not (isinstance(self.dt, (int, float)) and math.isfinite(self.dt) and self.dt > 0):
            raise ValidationError(f"dt must be a positive finite number, got {self.dt!r}")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}; available: {SCHEMES}")
        if self.advection not in ADVECTION_MODES:
            raise ValidationError(f"unknown advection mode {self.advection!r}; available: {ADVECTION_MODES}")
        if not self.cfl > 0 or not self.reaction_cfl > 0:
            raise ValidationError("CFL constants must be positive")

    def advective_bound(self, dx, speed):
        return math.inf if speed <= 0 else self.cfl * dx / speed

    def reactive_bound(self, eps_max, density_max):
        rate = eps_max * density_max
        return math.inf if rate <= 0 else self.reaction_cfl / rate

    def check(self, h, dx, speed, eps_max=0.0, density_max=0.0):
        """Raise :class:`CFLViolation` if ``h`` breaks either bound."""
        b = self.advective_bound(dx, speed)
        if h > b * (1 + 1e-12):
            raise CFLViolation(h, b, "advective")
        b = self.reactive_bound(eps_max, density_max)
        if h > b * (1 + 1e-12):
            raise CFLViolation(h, b, "reactive")

    def with_dt(self, dt):
        return StepperConfig(dt, self.dealias, self.scheme, self.cfl, self.reaction_cfl, self.advection)


def stable_dt(grid, flow, cfl=0.5, eps_max=0.0, density_max=0.0, reaction_cfl=0.1, safety=0.9, t_end=None):
    """Largest step satisfying both bounds, times ``safety``; ``inf`` when neither applies."""
    speed = _peak_speed(flow, t_end)
    bounds = [math.inf]
    if speed > 0:
        bounds.append(cfl * grid.dx / speed)
    if eps_max * density_max > 0:
        bounds.append(reaction_cfl / (eps_max * density_max))
    return safety * min(bounds)


def _peak_speed(flow, t_end=None):
    if not flow.time_dependent:
        return flow.max_speed(0.0)
    if getattr(flow, "peak_speed", None) is not None:
        return float(flow.peak_speed)
    if hasattr(flow, "_speeds"):
        return float(np.max(flow._speeds))
    return max(flow.max_speed(t) for t in np.linspace(0.0, t_end or 1.0, 257))


class Layout:
    """Which half-spectrum entries the solver stores.

    With dealiasing only the band ``|kx| <= n_x/3``, ``0 <= ky <= n_y/3`` is
    kept: every explicit term is masked to it and modes outside only decay,
    so storing them buys nothing.  Without dealiasing the full half-spectrum
    is stored and derivatives drop the Nyquist row and column.
    """

    def __init__(self, grid: Grid2D, dealias: bool):
        self.grid = grid
        self.dealias = dealias
        if dealias:
            bx, by = grid.n_x // 3, grid.n_y // 3
            self.rows = np.concatenate([np.arange(bx + 1), np.arange(grid.n_x - bx, grid.n_x)])
            self.ncols = by + 1
            self.deriv = np.ones((len(self.rows), self.ncols), dtype=bool)
        else:
            self.rows = np.arange(grid.n_x)
            self.ncols = grid.n_y // 2 + 1
            self.deriv = grid.nyquist_free
        self.shape = (len(self.rows), self.ncols)
        self.kx = np.ascontiguousarray(grid.kx[self.rows])
        self.ky = np.ascontiguousarray(grid.ky[: self.ncols])
        self.laplacian = -4.0 * np.pi**2 * (self.kx[:, None] ** 2 + self.ky[None, :] ** 2)
        self.dx_symbol = 2j * np.pi * self.kx[:, None] * self.deriv
        self.dy_symbol = 2j * np.pi * self.ky[None, :] * self.deriv

    def extract(self, full):
        if not self.dealias:
            return np.ascontiguousarray(full)
        return np.ascontiguousarray(full[..., self.rows, : self.ncols])

    def embed(self, state):
        if not self.dealias:
            return state
        full = np.zeros(state.shape[:-2] + self.grid.spectral_shape, dtype=complex)
        full[..., self.rows, : self.ncols] = state
        return full

    def to_physical(self, state):
        return self.grid.inverse(self.embed(state))

    def from_physical(self, values):
        return self.extract(self.grid.forward(values))


class Advection:
    """Explicit advection term ``-div(u f)`` on the stored spectra."""

    def __init__(self, layout: Layout, flow, cfg: StepperConfig):
        self.layout = layout
        self.grid = layout.grid
        self.flow = flow
        self.k = _backend.kernels
        modes0 = flow.sparse_modes(0.0, self.grid)
        alias_free = modes0 is not None and layout.dealias and modes0.bandwidth <= self.grid.n_x // 6
        if cfg.advection == "sparse" and not alias_free:
            raise ValidationError("sparse advection needs a trigonometric-polynomial flow and dealiasing")
        self.sparse = cfg.advection == "sparse" or (cfg.advection == "auto" and alias_free)

    def __call__(self, F, t, out, phys=None):
        """Write ``-div(u f)`` for every field of ``F`` into ``out``.

        ``phys`` may hold the physical fields already computed by the caller.
        Returns ``False`` when the flow vanishes at ``t`` (``out`` is zeroed).
        """
        if self.sparse:
            modes = self.flow.sparse_modes(t, self.grid)
            if len(modes.mx) == 0 or not (np.any(modes.uxh) or np.any(modes.uyh)):
                out[...] = 0.0
                return False
            self.k.sparse_advect(F, modes.mx, modes.my, modes.uxh, modes.uyh, self.layout.kx, self.layout.ky, out)
            return True
        ux, uy = self.flow.sample(t, self.grid)
        if ux is None and uy is None:
            out[...] = 0.0
            return False
        lay = self.layout
        if phys is None:
            phys = lay.to_physical(F)
        acc = np.zeros_like(out)
        if ux is not None:
            acc -= lay.dx_symbol * lay.from_physical(ux * phys)
        if uy is not None:
            acc -= lay.dy_symbol * lay.from_physical(uy * phys)
        out[...] = acc
        return True


class SpectralSolver:
    """Shared machinery: state, integrating factors, IF-RK4 step, run loop.

    Subclasses override :meth:`explicit` to add terms beyond advection and
    may add a real-valued ledger integrated with the same RK4 weights.
    """

    ledger_size = 0

    def __init__(self, grid: Grid2D, fields, nus, flow, cfg: StepperConfig, t0=0.0):
        self.grid = grid
        self.flow = flow
        self.cfg = cfg
        nus = np.atleast_1d(np.asarray(nus, dtype=float))
        vals = np.asarray(fields, dtype=float)
        if vals.ndim == 2:
            vals = vals[None]
        if vals.shape[1:] != grid.shape:
            raise ValidationError(f"field shape {vals.shape[1:]} does not match grid {grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("initial data contains NaN or infinite values")
        if len(nus) == 1 and vals.shape[0] > 1:
            nus = np.repeat(nus, vals.shape[0])
        if len(nus) != vals.shape[0]:
            raise ValidationError(f"{vals.shape[0]} fields but {len(nus)} diffusivities")
        for nu in nus:
            if not (0 < nu <= 1):
                raise ValidationError(f"nu must lie in (0, 1], got {nu}")
        self.nus = nus
        self.nfields = vals.shape[0]
        self.layout = Layout(grid, cfg.dealias)
        self.state = self.layout.from_physical(vals)
        self.t = float(t0)
        self.steps = 0
        self._base_t = float(t0)
        self._nreg = 0
        self.ledger = np.zeros(self.ledger_size)
        self.advection = Advection(self.layout, flow, cfg)
        self.k = _backend.kernels
        self._lin = np.ascontiguousarray(self.nus[:, None, None] * self.layout.laplacian[None])
        self._factors = {}
        shape = self.state.shape
        self._work = [np.empty(shape, dtype=complex) for _ in range(6)]
        self.cfg.check(cfg.dt, grid.dx, self._max_speed(self.t, cfg.dt))
        self.twins = []

    # -- explicit part -------------------------------------------------
    def explicit(self, F, t, out):
        """Fill ``out`` with the explicit tendency; return ledger rates."""
        self.advection(F, t, out)
        return self.ledger[:0]

    def pre_step_check(self, h):
        """Hook for state-dependent step checks; runs before any stage."""

    # -- integrating factors -------------------------------------------
    def factors(self, h):
        f = self._factors.get(h)
        if f is None:
            e = np.ascontiguousarray(np.exp(self._lin * h))
            e2 = np.ascontiguousarray(np.exp(self._lin * (0.5 * h)))
            f = (e, e2, e.reshape(-1), e2.reshape(-1))
            if len(self._factors) > 8:
                self._factors.clear()
            self._factors[h] = f
        return f

    def _max_speed(self, t, h):
        fl = self.flow
        if not fl.time_dependent:
            return fl.max_speed(t)
        return max(fl.max_speed(t), fl.max_speed(t + 0.5 * h), fl.max_speed(t + h))

    def step(self, h=None):
        """Advance one IF-RK4 step of length ``h`` (default ``cfg.dt``)."""
        h = self.cfg.dt if h is None else float(h)
        if not h > 0:
            raise ValidationError(f"step must be positive, got {h}")
        t = self.t
        self.cfg.check(h, self.grid.dx, self._max_speed(t, h))
        self.pre_step_check(h)
        _, _, e, e2 = self.factors(h)
        u = self.state
        n1, n2, n3, n4, tmp, new = self._work
        fl = lambda a: a.reshape(-1)
        r1 = np.array(self.explicit(u, t, n1))
        self.k.ifrk4_stage_a(fl(u), e2, fl(n1), h, fl(tmp))
        r2 = np.array(self.explicit(tmp, t + 0.5 * h, n2))
        self.k.ifrk4_stage_b(fl(u), e2, fl(n2), h, fl(tmp))
        r3 = np.array(self.explicit(tmp, t + 0.5 * h, n3))
        self.k.ifrk4_stage_c(fl(u), e, e2, fl(n3), h, fl(tmp))
        r4 = np.array(self.explicit(tmp, t + h, n4))
        self.k.ifrk4_final(fl(u), e, e2, fl(n1), fl(n2), fl(n3), fl(n4), h, fl(new))
        parts = new.view(float)
        parts[np.abs(parts) < FLUSH_BELOW] = 0.0
        if not math.isfinite(float(np.sum(new).real)):
            raise NonFiniteError(self.t)
        self.state, self._work[5] = new, u
        if self.ledger_size:
            self.ledger = self.ledger + (h / 6.0) * (r1 + 2.0 * (r2 + r3) + r4)
        self.steps += 1
        if h == self.cfg.dt:
            # count regular steps from a base so t does not drift
            self._nreg += 1
            self.t = self._base_t + self._nreg * h
        else:
            self.t = t + h
            self._base_t, self._nreg = self.t, 0
        for twin in self.twins:
            twin.step(h, t)

    def run(self, t_end, every=1, callback=None, wall_time_cap=None):
        """Step to ``t_end``, calling ``callback(self)`` every ``every`` steps and at the end.

        Returns ``True`` if ``t_end`` was reached, ``False`` if the wall-time cap hit first.
        """
        dt = self.cfg.dt
        started = time.perf_counter()
        if callback is not None and self.steps == 0:
            callback(self)
        count = 0
        while True:
            remaining = t_end - self.t
            if remaining <= 1e-12 * max(1.0, abs(t_end)):
                break
            h = dt if remaining >= dt * (1 + 1e-9) else remaining
            self.step(h)
            if h != dt:
                self.t = self._base_t = float(t_end)
            count += 1
            last = t_end - self.t <= 1e-12 * max(1.0, abs(t_end))
            sampled = count % every == 0 or last
            if callback is not None and sampled:
                callback(self)
            if not last and wall_time_cap is not None and time.perf_counter() - started > wall_time_cap:
                if callback is not None and not sampled:
                    callback(self)
                return False
        return True

    # -- accessors -------------------------------------------------------
    def physical(self):
        """Physical values, shape ``(nfields, n_x, n_y)``."""
        return self.layout.to_physical(self.state)

    def full_spectrum(self):
        """Raw half-spectra on the full grid, shape ``(nfields, n_x, n_y//2+1)``."""
        return self.layout.embed(self.state)

    def fields(self):
        return [Field2D(self.grid, v) for v in self.physical()]

    def means(self):
        return self.state[:, 0, 0].real / self.grid.size


class PassiveScalar(SpectralSolver):
    """One or more passive scalars advected by the same flow."""


def run_until(f0: Field2D, flow, nu, t_end, cfg: StepperConfig, every=1):
    """Integrate a passive scalar from ``t = 0`` to ``t_end``.

    Returns
    -------
    list of (float, Field2D)
        Samples every ``every`` steps, including both endpoints.
    """
    if f0.representation != "physical":
        raise ValidationError("initial field must be physical")
    sim = PassiveScalar(f0.grid, f0.values, [nu], flow, cfg)
    out = []
    sim.run(t_end, every=every, callback=lambda s: out.append((s.t, s.fields()[0])))
    return out


def step_advect_diffuse(f: Field2D, flow, nu, t, cfg: StepperConfig) -> Field2D:
    """One IF-RK4 step of ``f_t + u.grad f = nu lap f`` from time ``t``."""
    if f.representation != "physical":
        raise ValidationError("field must be physical")
    sim = PassiveScalar(f.grid, f.values, [nu], flow, cfg, t0=t)
    sim.step()
    return sim.fields()[0]
