"""Reacting densities: ``n_a' + u.grad n_a = nu_a lap n_a - sum_b eps_ab n_a n_b``.

The reaction sink is evaluated on the grid and its mean is fed both to the
species (through the spectral update) and to a per-species loss ledger
integrated with the same RK4 weights.  The ledger therefore matches the
mass lost by each species to round-off.
"""

from __future__ import annotations

import numpy as np

from .errors import NegativityError, ValidationError
from .grid import Field2D, Grid2D
from .stepper import PassiveScalar, SpectralSolver, StepperConfig

NEGATIVITY_TOL = 1e-8


def _as_matrix(eps, nspecies):
    e = np.asarray(eps, dtype=float)
    if e.ndim == 0:
        if nspecies != 2:
            raise ValidationError("a scalar eps needs exactly two species; pass a matrix otherwise")
        e = np.array([[0.0, float(e)], [float(e), 0.0]])
    if e.shape != (nspecies, nspecies):
        raise ValidationError(f"eps matrix must be {nspecies}x{nspecies}, got {e.shape}")
    if not np.all(np.isfinite(e)) or np.any(e < 0):
        raise ValidationError("eps entries must be finite and non-negative")
    if not np.array_equal(e, e.T):
        raise ValidationError("eps matrix must be symmetric")
    return e


class SpeciesSystem(SpectralSolver):
    """Two or more reacting species sharing one flow.

    Parameters
    ----------
    grid : Grid2D
    densities : sequence of Field2D or array, shape (k, n_x, n_y)
        Non-negative initial densities.
    nus : float or sequence of float
        Diffusivities in ``(0, 1]``; a scalar is shared by all species.
    eps : float or array
        Scalar reaction rate (two species) or symmetric ``k x k`` matrix.
    flow : FlowField
    cfg : StepperConfig
    """

    def __init__(self, grid: Grid2D, densities, nus, eps, flow, cfg: StepperConfig, t0=0.0):
        vals = np.asarray([d.values if isinstance(d, Field2D) else d for d in densities], dtype=float)
        if vals.ndim != 3 or vals.shape[0] < 2:
            raise ValidationError("need at least two species")
        if np.any(vals < 0):
            raise ValidationError("initial densities must be non-negative")
        self.eps = _as_matrix(eps, vals.shape[0])
        if vals.shape[0] == 2 and self.eps[0, 1] > 1:
            raise ValidationError(f"eps must lie in [0, 1] for two species, got {self.eps[0, 1]}")
        self.ledger_size = vals.shape[0]
        self.reactive = bool(np.any(self.eps > 0))
        self._pair = vals.shape[0] == 2
        self.scale = float(np.max(vals))
        self._sink_sign = 1.0
        self._phys_cache = None
        self.max_density = self.scale
        super().__init__(grid, vals, nus, flow, cfg, t0)
        self.cfg.check(cfg.dt, grid.dx, 0.0, self.eps_max, self.scale)

    @property
    def eps_max(self):
        return float(np.max(self.eps))

    def pre_step_check(self, h):
        if not self.reactive:
            return
        phys = self.layout.to_physical(self.state)
        self._phys_cache = (self.state, phys)
        self.max_density = float(np.max(np.abs(phys)))
        self.cfg.check(h, self.grid.dx, 0.0, self.eps_max, self.max_density)
        lo = phys.min(axis=(1, 2))
        worst = int(np.argmin(lo))
        if lo[worst] < -NEGATIVITY_TOL * self.scale:
            raise NegativityError(self.t, float(lo[worst]), NEGATIVITY_TOL * self.scale, worst)

    def sink(self, phys):
        """Reaction sink ``-n_a sum_b eps_ab n_b`` on the grid."""
        if self._pair:
            # one product array shared by both species keeps depletion symmetric
            s = -self.eps[0, 1] * (phys[0] * phys[1])
            return np.stack([s, s])
        return -phys * np.tensordot(self.eps, phys, axes=(1, 0))

    def explicit(self, F, t, out):
        if not self.reactive:
            self.advection(F, t, out)
            return np.zeros(self.ledger_size)
        cache = self._phys_cache
        if cache is not None and cache[0] is F:
            phys = cache[1]
        else:
            phys = self.layout.to_physical(F)
        self._phys_cache = None
        self.advection(F, t, out, phys=phys)
        if self._pair:
            s = self.layout.from_physical(-self.eps[0, 1] * (phys[0] * phys[1]))
            out += self._sink_sign * s
            rate = -s[0, 0].real / self.grid.size
            return np.array([rate, rate])
        sink_hat = self.layout.from_physical(self.sink(phys))
        out += self._sink_sign * sink_hat
        return -sink_hat[:, 0, 0].real / self.grid.size

    # -- ledgers ---------------------------------------------------------
    @property
    def losses(self):
        """Mass each species has lost to reactions since the start."""
        return self.ledger.copy()

    def reacted_mass(self):
        """Two species: ``eps * int int n1 n2``; more species: the total over all pairs."""
        return float(self.ledger[0]) if self._pair else float(np.sum(self.ledger))

    def reacted_mass_all(self):
        """Total mass removed from all species."""
        return float(np.sum(self.ledger))

    def masses(self):
        return self.means()

    def spawn_supersolutions(self):
        """Start ``eps = 0`` copies that advance in lockstep with this system."""
        twin = SuperSolutionTwin(self)
        self.twins.append(twin)
        return twin


class SuperSolutionTwin:
    """Reaction-free copies of each species; pointwise they bound the true densities."""

    def __init__(self, parent: SpeciesSystem):
        self.parent = parent
        self.solver = PassiveScalar(parent.grid, parent.physical(), parent.nus, parent.flow, parent.cfg, t0=parent.t)
        self.solver.state = parent.state.copy()
        self.t0 = parent.t

    @property
    def t(self):
        return self.solver.t

    def step(self, h, t):
        self.solver.step(h)

    def physical(self):
        return self.solver.physical()

    def fields(self):
        return self.solver.fields()


def step_reaction_diffusion(sys: SpeciesSystem, h=None):
    """Advance ``sys`` by one step; returns the system for chaining."""
    sys.step(h)
    return sys


def reacted_mass(sys: SpeciesSystem):
    return sys.reacted_mass()


def spawn_supersolutions(sys: SpeciesSystem):
    return sys.spawn_supersolutions()
