"""The one-dimensional reacting system driven by x-averages, and its bookkeeping.

Under a shear ``u = (u(y), 0)`` the x-average of each density obeys a 1D
reaction-diffusion equation up to a correlation term built from the parts
with zero x-average.  This module evolves the 1D system in lockstep with a
2D run and checks the relations linking the two:

* the difference ``n1 - n2`` of the 1D system translates the 2D one;
* the 1D-vs-2D deviation in L1 is bounded by the accumulated correlation;
* the ``min(n1, n2)`` mass balances the reacted mass and the diffusive flux
  through the crossing points of the two densities.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from . import _backend
from .errors import ValidationError
from .grid import Field1D
from .stepper import FLUSH_BELOW

log = logging.getLogger(__name__)

ROOT_TOL = 1e-12
TANGENT_TOL = 1e-8


class OneDSystem:
    """Two species on the y-circle, ``n_t = nu n_yy - eps n1 n2``.

    Uses the same integrating-factor RK4 and time grid as the 2D solver.
    The state holds raw real-to-complex spectra of length ``n_y//2 + 1``.
    """

    def __init__(self, grid, n1, n2, nu, eps, dealias=True, t0=0.0, scale=None):
        self.grid = grid
        self.n = grid.n_y
        v = np.array([np.asarray(n1, dtype=float), np.asarray(n2, dtype=float)])
        if v.shape != (2, self.n):
            raise ValidationError(f"1D densities need shape (2, {self.n})")
        if not 0 < nu <= 1:
            raise ValidationError(f"nu must lie in (0, 1], got {nu}")
        if eps < 0:
            raise ValidationError("eps must be non-negative")
        self.nu = float(nu)
        self.eps = float(eps)
        self.t = float(t0)
        self.t0 = float(t0)
        self.state = sfft.rfft(v, axis=-1)
        k = sfft.rfftfreq(self.n, 1.0 / self.n)
        self._lin = np.ascontiguousarray(np.broadcast_to(-4.0 * np.pi**2 * self.nu * k**2, self.state.shape))
        self._mask = (k <= self.n // 3) if dealias else np.ones_like(k, dtype=bool)
        self.ledger = 0.0
        self.scale = float(np.max(np.abs(v))) if scale is None else float(scale)
        self._factors = {}
        self.k = _backend.kernels

    def physical(self):
        return sfft.irfft(self.state, n=self.n, axis=-1)

    def _rhs(self, F, out):
        v = sfft.irfft(F, n=self.n, axis=-1)
        s = sfft.rfft(-self.eps * (v[0] * v[1])) * self._mask
        out[0] = s
        out[1] = s
        return -s[0].real / self.n

    def step(self, h):
        e, e2 = self._factors.get(h, (None, None))
        if e is None:
            e = np.exp(self._lin * h).reshape(-1)
            e2 = np.exp(self._lin * (0.5 * h)).reshape(-1)
            self._factors = {h: (e, e2)} if len(self._factors) > 8 else {**self._factors, h: (e, e2)}
        u = self.state
        n1, n2, n3, n4, tmp, new = (np.empty_like(u) for _ in range(6))
        fl = lambda a: a.reshape(-1)
        r1 = self._rhs(u, n1)
        self.k.ifrk4_stage_a(fl(u), e2, fl(n1), h, fl(tmp))
        r2 = self._rhs(tmp, n2)
        self.k.ifrk4_stage_b(fl(u), e2, fl(n2), h, fl(tmp))
        r3 = self._rhs(tmp, n3)
        self.k.ifrk4_stage_c(fl(u), e, e2, fl(n3), h, fl(tmp))
        r4 = self._rhs(tmp, n4)
        self.k.ifrk4_final(fl(u), e, e2, fl(n1), fl(n2), fl(n3), fl(n4), h, fl(new))
        parts = new.view(float)
        parts[np.abs(parts) < FLUSH_BELOW] = 0.0
        self.state = new
        self.ledger += (h / 6.0) * (r1 + 2.0 * (r2 + r3) + r4)
        self.t += h

    def reacted_mass(self):
        """``eps * int_{t0}^t int n1 n2 dy ds``."""
        return float(self.ledger)

    def difference_spectrum(self):
        return self.state[0] - self.state[1]

    def masses(self):
        return self.state[:, 0].real / self.n


def spawn_1d(sys2d) -> OneDSystem:
    """1D system started from the x-averages of a two-species 2D run under an x-shear."""
    if sys2d.nfields != 2:
        raise ValidationError("the 1D comparison needs exactly two species")
    if not sys2d.flow.is_x_shear:
        raise ValidationError(f"the 1D comparison needs a shear along x, got {sys2d.flow.kind}")
    if sys2d.nus[0] != sys2d.nus[1]:
        raise ValidationError("the 1D comparison needs equal diffusivities")
    avg = sys2d.physical().mean(axis=1)
    return OneDSystem(
        sys2d.grid, avg[0], avg[1], sys2d.nus[0], sys2d.eps[0, 1], dealias=sys2d.cfg.dealias,
        t0=sys2d.t, scale=float(np.max(np.abs(avg))),
    )


# ---------------------------------------------------------------------------
# crossings of n1 - n2


@dataclass
class CrossingReport:
    t: float
    points: np.ndarray
    slopes: np.ndarray
    flux: float
    tangential: int = 0

    @property
    def count(self):
        return len(self.points)


def _eta_to_y(eta):
    return (np.asarray(eta) % 1.0) - 0.5


def find_crossings(q_hat, n, nu, t=0.0, scale=1.0, tol=ROOT_TOL):
    """Zeros of the trigonometric interpolant with spectrum ``q_hat``.

    Sign changes between grid points are refined by bisection to ``tol``.
    Zeros whose slope is below ``TANGENT_TOL * scale`` are tangential: they
    are counted but left out of the flux ``nu * sum |q'|``.
    """
    k = _backend.kernels
    q_hat = np.ascontiguousarray(q_hat, dtype=complex)
    q = sfft.irfft(q_hat, n=n)
    eta = np.arange(n) / n
    sgn = np.sign(q)
    nz = np.nonzero(sgn)[0]
    lo, hi, exact = [], [], []
    if len(nz) >= 2:
        for a, b in zip(nz, np.roll(nz, -1)):
            if sgn[a] == sgn[b]:
                if b != (a + 1) % n and b != a:
                    # zero grid values between two same-sign points: a touch, not a crossing
                    log.debug("tangential touch between grid points %d and %d at t=%g", a, b, t)
                continue
            ea = eta[a]
            eb = eta[b] if b > a else eta[b] + 1.0
            if b == (a + 1) % n:
                lo.append(ea)
                hi.append(eb)
            else:
                # exact zeros on the grid between the sign change; take the middle one
                zs = [(a + j) % n for j in range(1, (b - a) % n)]
                exact.append(eta[zs[len(zs) // 2]] + (1.0 if zs[len(zs) // 2] < a else 0.0))
    roots = np.array(exact, dtype=float)
    if lo:
        found = k.bisect_roots(q_hat, n, np.array(lo), np.array(hi), tol, 200)
        roots = np.concatenate([roots, found])
    roots = np.sort(roots % 1.0)
    slopes = np.abs(k.trig_eval(q_hat, n, np.ascontiguousarray(roots), 1)) if len(roots) else np.zeros(0)
    transversal = slopes >= TANGENT_TOL * scale
    tangential = int(np.sum(~transversal))
    if tangential:
        log.info("%d tangential crossing(s) excluded from the flux at t=%g", tangential, t)
    flux = float(nu * np.sum(slopes[transversal]))
    return CrossingReport(float(t), _eta_to_y(roots), slopes, flux, tangential), roots


def abs_integral(q_hat, n, roots):
    """``int |q| dy`` over the circle, exact for the interpolant given its sign changes."""
    k = _backend.kernels
    q_hat = np.ascontiguousarray(q_hat, dtype=complex)
    if len(roots) == 0:
        return abs(float(q_hat[0].real) / n)
    a = np.asarray(roots, dtype=float)
    b = np.concatenate([a[1:], [a[0] + 1.0]])
    return float(np.sum(np.abs(k.trig_integral(q_hat, n, np.ascontiguousarray(a), np.ascontiguousarray(b)))))


def min_l1(sys1d: OneDSystem, roots=None):
    """``int min(n1, n2) dy`` computed as ``(int n1 + int n2 - int |n1 - n2|) / 2``."""
    q_hat = sys1d.difference_spectrum()
    if roots is None:
        _, roots = find_crossings(q_hat, sys1d.n, sys1d.nu, sys1d.t, sys1d.scale)
    total = float(np.sum(sys1d.masses()))
    return 0.5 * (total - abs_integral(q_hat, sys1d.n, roots))


# ---------------------------------------------------------------------------
# lockstep runs


@dataclass
class LockstepSample:
    t: float
    avg: np.ndarray
    tilde: np.ndarray
    correlation_l1: float
    reacted_1d: float
    min_l1: float
    crossing: CrossingReport


@dataclass
class Lockstep:
    """Samples from a 2D run and its 1D companion advanced on the same steps."""

    samples: list = field(default_factory=list)
    eps: float = 0.0
    nu: float = 0.0
    scale: float = 1.0
    mass_scale: float = 1.0


def sample_pair(sys2d, sys1d) -> LockstepSample:
    if abs(sys2d.t - sys1d.t) > 1e-9 * max(1.0, abs(sys2d.t)):
        raise ValidationError(f"time mismatch: 2D at t={sys2d.t}, 1D at t={sys1d.t}")
    v = sys2d.physical()
    avg = v.mean(axis=1)
    fl = v - avg[:, None, :]
    corr = (fl[0] * fl[1]).mean(axis=0)
    report, roots = find_crossings(sys1d.difference_spectrum(), sys1d.n, sys1d.nu, sys1d.t, sys1d.scale)
    return LockstepSample(
        t=float(sys2d.t),
        avg=avg,
        tilde=sys1d.physical(),
        correlation_l1=float(np.mean(np.abs(corr))),
        reacted_1d=sys1d.reacted_mass(),
        min_l1=min_l1(sys1d, roots),
        crossing=report,
    )


def run_lockstep(sys2d, t_end, every=1, sys1d=None, wall_time_cap=None) -> Lockstep:
    """Advance a 2D system and its 1D companion together, sampling every ``every`` steps."""
    sys1d = sys1d or spawn_1d(sys2d)
    out = Lockstep(eps=sys1d.eps, nu=sys1d.nu, scale=sys1d.scale,
                   mass_scale=float(max(np.abs(sys1d.masses()))))

    class _Follower:
        def step(self, h, t):
            sys1d.step(h)

    sys2d.twins.append(_Follower())
    try:
        sys2d.run(t_end, every=every, callback=lambda s: out.samples.append(sample_pair(s, sys1d)),
                  wall_time_cap=wall_time_cap)
    finally:
        sys2d.twins = [tw for tw in sys2d.twins if not isinstance(tw, _Follower)]
    return out


def translation_check(track: Lockstep):
    """Largest ``||(n1 - n2)_1D - (<n1> - <n2>)||_inf`` over the samples."""
    worst = 0.0
    for s in track.samples:
        d = (s.tilde[0] - s.tilde[1]) - (s.avg[0] - s.avg[1])
        worst = max(worst, float(np.max(np.abs(d))))
    return worst


def deviation_bound_check(track: Lockstep):
    """Left and right sides of the 1D-vs-2D deviation bound at each sample.

    ``lhs[a, i] = ||<n_a> - n~_a||_1(t_i) - ||<n_a> - n~_a||_1(t_0)`` and
    ``rhs[i] = eps * int_{t_0}^{t_i} int |<n1' n2'>| dy ds`` (trapezoid in time),
    with primes denoting the parts of zero x-average.
    """
    ts = np.array([s.t for s in track.samples])
    dev = np.array([[np.mean(np.abs(s.avg[a] - s.tilde[a])) for s in track.samples] for a in range(2)])
    lhs = dev - dev[:, :1]
    corr = np.array([s.correlation_l1 for s in track.samples])
    rhs = track.eps * np.concatenate([[0.0], np.cumsum(0.5 * (corr[1:] + corr[:-1]) * np.diff(ts))])
    return ts, lhs, rhs


def min_mass_balance(track: Lockstep):
    """Residual of ``M(t) - M(t0) + I(t) - int flux`` at each sample.

    ``M = int min(n1, n2)``, ``I`` is the 1D reacted mass and the flux is
    ``nu * sum |(n1 - n2)'|`` over the crossing points, integrated by the
    trapezoid rule.
    """
    ts = np.array([s.t for s in track.samples])
    m = np.array([s.min_l1 for s in track.samples])
    reacted = np.array([s.reacted_1d for s in track.samples])
    flux = np.array([s.crossing.flux for s in track.samples])
    flux_int = np.concatenate([[0.0], np.cumsum(0.5 * (flux[1:] + flux[:-1]) * np.diff(ts))])
    residual = (m - m[0]) + (reacted - reacted[0]) - flux_int
    return ts, residual


def field1d(grid, values):
    return Field1D(grid, values)
