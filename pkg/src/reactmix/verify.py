"""Self-checks on small canned instances.

Each check returns a :class:`Check` with the measured residual and the
tolerance it was held to.  ``mutation="flip-sink-sign"`` reverses the
reaction sink in the state update while the reacted-mass ledger keeps the
correct sign, which the mass identity must catch.  ``dt_scale`` multiplies
every canned time step; above one the stability guard must reject the run.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import comparison_1d as c1d
from . import diagnostics as dg
from .config import ExperimentConfig, config_hash, from_dict
from .errors import CFLViolation, ReactmixError
from .flows import AlternatingShear, CustomFlow, ZeroFlow, bump, make_shear
from .grid import Field2D, Grid2D, to_physical, to_spectral
from .initial import gaussians, random_smooth
from .species import SpeciesSystem
from .stepper import PassiveScalar, StepperConfig, stable_dt

MUTATIONS = (None, "flip-sink-sign")


@dataclass
class Check:
    name: str
    module: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def by_name(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"passed": self.passed, "seconds": self.seconds, "checks": [asdict(c) for c in self.checks]}

    def format(self):
        lines = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"{mark} {c.module:<14} {c.name:<24} residual={c.residual:.3e} tol={c.tolerance:.1e} {c.detail}")
        lines.append(f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks passed in {self.seconds:.1f}s")
        return "\n".join(lines)


def _check(name, module, residual, tol, detail="", le=True):
    ok = bool(residual <= tol) if le else bool(residual >= tol)
    return Check(name, module, ok and math.isfinite(residual), float(residual), float(tol), detail)


def _cfg(grid, flow, dt_scale, eps_max=0.0, dens=0.0, cfl=0.5):
    dt = stable_dt(grid, flow, cfl, eps_max, dens, 0.1, 0.9)
    if math.isinf(dt):
        dt = 0.01
    return StepperConfig(dt * dt_scale, cfl=cfl)


# ---------------------------------------------------------------------------
# spectral core


def check_roundtrip(seed=0):
    g = Grid2D(32, 32)
    v = np.random.default_rng(seed).normal(size=g.shape)
    back = to_physical(to_spectral(Field2D(g, v))).values
    return _check("spectral-roundtrip", "spectral_core", np.max(np.abs(back - v)) / np.max(np.abs(v)), 1e-12)


def heat_mode_error(n=64, nu=1e-3, t_end=1.0, dt=0.01, kx=1, ky=0):
    """Relative L-infinity error of a Fourier mode under pure diffusion."""
    g = Grid2D(n, n)
    x, y = g.mesh()
    f0 = np.sin(2 * np.pi * (kx * x + ky * y))
    sim = PassiveScalar(g, f0, [nu], ZeroFlow(), StepperConfig(dt))
    sim.run(t_end)
    exact = math.exp(-4 * np.pi**2 * nu * (kx * kx + ky * ky) * t_end) * f0
    return float(np.max(np.abs(sim.physical()[0] - exact)) / np.max(np.abs(exact))), sim.t


def check_heat_mode(dt_scale=1.0):
    err, t = heat_mode_error(dt=0.01 * dt_scale)
    return _check("heat-mode-decay", "spectral_core", err, 1e-9, f"t={t:g}")


def check_conservation_passive(dt_scale=1.0):
    g = Grid2D(32, 32)
    f0 = gaussians(g, [(0.1, -0.05)], 0.1)[0] - 0.3 * gaussians(g, [(-0.2, 0.2)], 0.07)[0]
    flow = AlternatingShear(0.05, 1e-2)
    sim = PassiveScalar(g, f0, [1e-2], flow, _cfg(g, flow, dt_scale))
    m0, l1 = sim.means()[0], dg.l1(f0)
    norms, drift = [], [0.0]

    def cb(s):
        norms.append(dg.l2(s.physical()[0]))
        drift.append(abs(s.means()[0] - m0))

    sim.run(4 * flow.T, callback=cb)
    growth = max(b / a for a, b in zip(norms, norms[1:]))
    return [
        _check("mass-conservation", "spectral_core", max(drift) / l1, 1e-10),
        _check("l2-monotone", "spectral_core", growth, 1 + 1e-9),
    ]


def spectral_order(n_list=(16, 32, 64), nu=1e-2, t_end=0.5):
    """Observed order of the spatial error for a smooth advected field.

    A reference at twice the finest resolution supplies the truth; the
    returned slope of log error against log n is at least the algebraic order.
    """
    flow = make_shear(1, power=1)
    dt = 0.5 / (2 * max(n_list)) * 0.9
    ref_n = 2 * max(n_list)

    def run(n):
        g = Grid2D(n, n)
        x, y = g.mesh()
        f0 = np.exp(np.cos(2 * np.pi * x) + 0.5 * np.sin(2 * np.pi * y))
        sim = PassiveScalar(g, f0, [nu], flow, StepperConfig(dt))
        sim.run(t_end)
        return sim

    ref = run(ref_n)
    ref_coef = to_spectral(ref.fields()[0]).values
    errs = []
    for n in n_list:
        c = to_spectral(run(n).fields()[0]).values
        # compare overlapping coefficients; modes absent on the coarse grid count fully
        kx = np.fft.fftfreq(n, 1 / n).astype(int)
        sub = ref_coef[np.ix_(kx % ref_n, kx % ref_n)]
        diff = np.sqrt(np.sum(np.abs(c - sub) ** 2) + max(np.sum(np.abs(ref_coef) ** 2) - np.sum(np.abs(sub) ** 2), 0))
        errs.append(diff)
    slope = -np.polyfit(np.log(n_list), np.log(errs), 1)[0]
    return float(slope), errs


def check_spectral_order():
    slope, errs = spectral_order()
    return _check("spectral-order", "spectral_core", slope, 3.5, f"errors={['%.1e' % e for e in errs]}", le=False)


def nash_constant(n=64, nu=1e-2, t_end=1.0):
    """``max_t ||f(t)||_inf * nu t / ||f0||_1`` on a heat run with mean-zero data."""
    g = Grid2D(n, n)
    f0 = gaussians(g, [(0.0, 0.0)], 0.03)[0] - gaussians(g, [(0.25, 0.25)], 0.05)[0]
    sim = PassiveScalar(g, f0, [nu], ZeroFlow(), StepperConfig(t_end / 200))
    l1 = dg.l1(f0)
    worst = [0.0]

    def cb(s):
        if s.t > 0:
            worst[0] = max(worst[0], dg.linf(s.physical()[0]) * nu * s.t / l1)

    sim.run(t_end, callback=cb)
    return worst[0]


def check_nash():
    return _check("nash-smoothing", "spectral_core", nash_constant(), 10.0)


# ---------------------------------------------------------------------------
# flows


def check_flows(seed=0):
    out = []
    worst = 0.0
    for j in (1, 2, 3):
        for d in ("x", "y"):
            worst = max(worst, make_shear(j, direction=d).check_divergence())
    alt = AlternatingShear(2.0, 1e-4, seed=seed)
    rng = np.random.default_rng(seed)
    worst = max(worst, alt.check_divergence(times=rng.uniform(0, 4 * alt.T, 8)))
    g = Grid2D(16, 16)
    x, y = g.mesh()
    # a tabulated flow from the streamfunctions sin(2 pi (x + a y)): u = (psi_y, -psi_x)
    ux = [2 * np.pi * a * np.cos(2 * np.pi * (x + a * y)) for a in (1, 2)]
    uy = [-2 * np.pi * np.cos(2 * np.pi * (x + a * y)) for a in (1, 2)]
    worst = max(worst, CustomFlow(g, [0.0, 1.0], ux, uy).check_divergence(grid=g, times=[0.0, 0.3, 1.0]))
    out.append(_check("divergence-free", "flows", worst, 1e-10))

    ts = rng.uniform(0, 6 * alt.T, 500)
    shift = max(abs(alt.phi(ell, t) - float(bump(np.array([(t - ell * alt.T) / alt.T]))[0]))
                for t in ts for ell in range(6))
    out.append(_check("block-shift", "flows", shift, 1e-14))
    active = max(sum(alt.phi(ell, t) != 0.0 for ell in range(8)) for t in ts)
    out.append(_check("single-active-block", "flows", active, 1))
    bad = 0
    for j in (1, 2, 3, 4):
        prof = make_shear(j).profile
        bad += prof.verify_vanishing_order() != j
    out.append(_check("vanishing-order", "flows", bad, 0))
    return out


# ---------------------------------------------------------------------------
# species


def _run_guarded(sys, t_end, cb):
    """Run to ``t_end``; return the abort message, or an empty string."""
    try:
        sys.run(t_end, callback=cb)
    except ReactmixError as exc:
        return f"aborted at t={sys.t:.4g}: {exc}"
    return ""


def low_mode_pair(grid):
    """Two positive, overlapping densities with few Fourier modes."""
    x, y = grid.mesh()
    return np.array([
        1.0 + 0.8 * np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y),
        1.0 - 0.8 * np.sin(2 * np.pi * (x + y)),
    ])


def conservation_suite(n=64, eps=0.5, nu=1e-3, t_end=2.0, dt_scale=1.0, mutation=None):
    """Mass, reacted-mass, symmetry and comparison checks on one two-species run.

    Also runs a three-species instance for the total reacted-mass identity.
    """
    if mutation not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutation!r}; choose from {MUTATIONS}")
    g = Grid2D(n, n)
    flow = make_shear(1, power=1)
    # low-mode data stays resolved under the shear; localized blobs at this
    # resolution develop sub-grid filaments and undershoot below zero
    n0 = low_mode_pair(g)
    sys = SpeciesSystem(g, n0, nu, eps, flow, _cfg(g, flow, dt_scale, eps, float(np.max(n0))))
    if mutation == "flip-sink-sign":
        sys._sink_sign = -1.0
    twin = sys.spawn_supersolutions()
    scale = float(np.max(n0))
    l1_0 = [dg.l1(v) for v in n0]
    q_err, sym, comp, neg = [0.0], [0.0], [0.0], [0.0]

    def cb(s):
        v = s.physical()
        Q = s.reacted_mass()
        for a in range(2):
            drop = l1_0[a] - dg.l1(v[a])
            q_err[0] = max(q_err[0], abs(drop - Q) / max(abs(Q), 1e-300) if Q > 1e-12 else abs(drop - Q))
        m = s.masses()
        sym[0] = max(sym[0], abs((sys_m0[0] - m[0]) - (sys_m0[1] - m[1])))
        comp[0] = max(comp[0], float(np.max(v - twin.physical())))
        neg[0] = max(neg[0], float(-np.min(v)))

    sys_m0 = sys.masses()
    aborted = _run_guarded(sys, t_end, cb)

    # mass conservation of the reaction-free twins
    tw_drift = float(np.max(np.abs(twin.solver.means() - sys_m0))) / max(l1_0)

    x, y = g.mesh()
    n3 = np.array([
        1.0 + 0.8 * np.cos(2 * np.pi * x),
        0.8 - 0.6 * np.cos(2 * np.pi * (x - y)),
        0.6 + 0.5 * np.sin(2 * np.pi * y),
    ])
    E = np.array([[0.0, 0.5, 0.3], [0.5, 0.0, 0.2], [0.3, 0.2, 0.0]])
    sys3 = SpeciesSystem(g, n3, nu, E, flow, _cfg(g, flow, dt_scale, 0.5, float(np.max(n3))))
    if mutation == "flip-sink-sign":
        sys3._sink_sign = -1.0
    M0 = float(sum(dg.l1(v) for v in n3))
    qall = [0.0]

    def cb3(s):
        M = float(sum(dg.l1(v) for v in s.physical()))
        Q = s.reacted_mass_all()
        qall[0] = max(qall[0], abs((M0 - M) - Q) / Q if Q > 1e-12 else abs((M0 - M) - Q))

    aborted = aborted or _run_guarded(sys3, t_end, cb3)
    return [
        Check("runs-complete", "species", not aborted, 0.0 if not aborted else math.inf, 0.0, aborted),
        _check("twin-mass-conservation", "species", tw_drift, 1e-10),
        _check("reacted-mass-identity", "species", q_err[0], 1e-6, f"Q={sys.reacted_mass():.6g}"),
        _check("total-reacted-identity", "species", qall[0], 1e-6, f"Q_all={sys3.reacted_mass_all():.6g}"),
        _check("symmetric-depletion", "species", sym[0] / scale, 1e-9),
        _check("comparison-principle", "species", comp[0] / scale, 1e-7),
        _check("positivity", "species", neg[0] / scale, 1e-8),
    ]


def check_reaction_ode(dt_scale=1.0):
    """Uniform data stay uniform and follow ``n = 1 / (1 + eps t)``."""
    g = Grid2D(32, 32)
    eps = 1.0
    flow = make_shear(1)
    sys = SpeciesSystem(g, np.ones((2,) + g.shape), 1e-3, eps, flow, _cfg(g, flow, dt_scale, eps, 1.0))
    err = 0.0
    for t in (0.5, 1.0, 2.0):
        sys.run(t)
        err = max(err, float(np.max(np.abs(sys.physical() - 1.0 / (1.0 + eps * t)))))
    return _check("reaction-ode", "species", err, 1e-6)


def check_passive_limit():
    g = Grid2D(32, 32)
    flow = make_shear(1)
    n0 = gaussians(g, [(-0.2, 0.0), (0.2, 0.1)], 0.1)
    cfg = _cfg(g, flow, 1.0)
    sys = SpeciesSystem(g, n0, 1e-2, 0.0, flow, cfg)
    sim = PassiveScalar(g, n0, [1e-2], flow, cfg)
    sys.run(0.5)
    sim.run(0.5)
    return _check("zero-rate-is-passive", "species", float(np.max(np.abs(sys.physical() - sim.physical()))), 1e-12)


# ---------------------------------------------------------------------------
# diagnostics


def check_diagnostics(seed=0):
    g = Grid2D(32, 32)
    rng = np.random.default_rng(seed)
    f = Field2D(g, random_smooth(g, seed, 5)[0] + 0.7)
    avg = dg.x_average(f)
    rem = dg.remainder(f)
    rec = np.max(np.abs(avg.values[None, :] + rem.values - f.values))
    zero_avg = np.max(np.abs(rem.values.mean(axis=0)))
    zero_mean = abs(dg.mean_zero_part(f).values.mean())
    out = [_check("decomposition", "diagnostics", max(rec, zero_avg, zero_mean), 1e-12)]
    t = np.linspace(0, 5, 40)
    y = 3.0 * np.exp(-0.7 * t) * (1 + 0.01 * rng.normal(size=t.size))
    r1 = dg.fit_decay_rate(np.c_[t, y]).rate
    r2 = dg.fit_decay_rate(np.c_[t, 1e6 * y]).rate
    out.append(_check("fit-scale-invariance", "diagnostics", abs(r1 - r2) / abs(r1), 1e-10))
    series = np.c_[t, np.exp(-t)]
    h1, h2 = dg.half_life(series, 0.5), dg.half_life(series, 0.25)
    out.append(_check("half-life-monotone", "diagnostics", 0.0 if h2 >= h1 else h1 - h2, 0.0))
    a = Field2D(g, np.abs(random_smooth(g, 1)[0]))
    b = Field2D(g, np.abs(random_smooth(g, 2)[0]))
    sym = abs(dg.overlap_mass(a, b) - dg.overlap_mass(b, a))
    self_ = abs(dg.overlap_mass(a, a) - dg.l1(dg.x_average(a).values))
    out.append(_check("overlap-symmetry", "diagnostics", max(sym, self_), 1e-14))
    return out


# ---------------------------------------------------------------------------
# 1D comparison


def heat_crossing_flux(n=128, nu=1e-3, t_end=1.0, steps=200):
    """Crossing flux for ``n1 - n2 = sin(2 pi y)`` under pure diffusion, with its exact value."""
    g = Grid2D(n, n)
    y = g.y
    sys = c1d.OneDSystem(g, 1 + 0.5 * np.sin(2 * np.pi * y), 1 - 0.5 * np.sin(2 * np.pi * y), nu, 0.0, scale=1.5)
    h = t_end / steps
    ts, flux = [], []
    for k in range(steps + 1):
        rep, _ = c1d.find_crossings(sys.difference_spectrum(), n, nu, sys.t, sys.scale)
        ts.append(sys.t)
        flux.append(rep.flux)
        if k < steps:
            sys.step(h)
    ts = np.array(ts)
    exact = 4 * np.pi * nu * np.exp(-4 * np.pi**2 * nu * ts)
    return ts, np.array(flux), exact


def comparison_battery(n=32, nu=1e-2, eps=0.5, t_end=1.0, dt_scale=1.0):
    g = Grid2D(n, n)
    flow = make_shear(1, power=1)
    n0 = gaussians(g, [(-0.15, -0.1), (0.15, 0.1)], 0.12)
    sys = SpeciesSystem(g, n0, nu, eps, flow, _cfg(g, flow, dt_scale, eps, float(np.max(n0))))
    sys1d = c1d.spawn_1d(sys)
    q0 = sys1d.difference_spectrum().copy()
    track = c1d.run_lockstep(sys, t_end, sys1d=sys1d)
    trans = c1d.translation_check(track) / track.scale
    # the difference obeys the heat equation exactly
    k = np.fft.rfftfreq(n, 1 / n)
    qt = q0 * np.exp(-4 * np.pi**2 * nu * k**2 * (sys1d.t - sys1d.t0))
    heat = float(np.max(np.abs(np.fft.irfft(qt - sys1d.difference_spectrum(), n)))) / track.scale
    _, lhs, rhs = c1d.deviation_bound_check(track)
    gap = float(np.max(lhs - rhs[None, :]))
    _, resid = c1d.min_mass_balance(track)
    reacted = [s.reacted_1d for s in track.samples]
    mono = max([0.0] + [a - b for a, b in zip(reacted, reacted[1:])])
    over = max(s.min_l1 - min(np.mean(s.tilde[0]), np.mean(s.tilde[1])) for s in track.samples)

    # crossing count never grows under pure diffusion
    ts, flux, exact = heat_crossing_flux(n=64, nu=nu, t_end=t_end, steps=50)
    sysh = c1d.OneDSystem(g, n0[0].mean(axis=0), n0[1].mean(axis=0), nu, 0.0)
    counts = []
    for _ in range(50):
        counts.append(c1d.find_crossings(sysh.difference_spectrum(), n, nu, sysh.t, sysh.scale)[0].count)
        sysh.step(t_end / 50)
    grow = max([0] + [b - a for a, b in zip(counts, counts[1:])])
    return [
        _check("translation", "comparison_1d", trans, 1e-6),
        _check("difference-heat", "comparison_1d", heat, 1e-8),
        _check("deviation-bound", "comparison_1d", max(gap, 0.0), 1e-12),
        _check("min-mass-balance", "comparison_1d", float(np.max(np.abs(resid))) / track.mass_scale, 1e-4),
        _check("reacted-monotone", "comparison_1d", max(mono, over, 0.0), 1e-14),
        _check("crossing-count", "comparison_1d", grow, 0),
        _check("heat-crossing-flux", "comparison_1d", float(np.max(np.abs(flux / exact - 1))), 0.01),
    ]


# ---------------------------------------------------------------------------
# experiments


def check_experiments():
    from .experiments import run_campaign

    data = {"kind": "simulate", "n": 16, "nu": 0.05, "eps": 0.5, "t_end": 0.2, "samples": 10,
            "initial": {"preset": "separated-blobs", "sigma": 0.15}}
    cfg = from_dict(ExperimentConfig, data).validate()
    blobs = []
    with tempfile.TemporaryDirectory() as tmp:
        for k in range(2):
            d = os.path.join(tmp, f"run{k}")
            run_campaign(cfg, d)
            with open(os.path.join(d, "summary.csv"), "rb") as fh:
                blobs.append(fh.read())
    same = 0.0 if blobs[0] == blobs[1] else 1.0
    h1 = config_hash(cfg)
    h2 = config_hash(from_dict(ExperimentConfig, dict(data, eps=0.25)))
    return [
        _check("determinism", "experiments", same, 0.0),
        _check("config-hash", "experiments", 0.0 if (h1 == config_hash(cfg) and h1 != h2) else 1.0, 0.0),
    ]


def _guard(fn, name, module, *args, **kw):
    try:
        res = fn(*args, **kw)
    except CFLViolation as exc:
        return [Check(name, module, False, math.inf, 0.0, f"rejected: {exc}")]
    except ReactmixError as exc:
        return [Check(name, module, False, math.inf, 0.0, f"error: {exc}")]
    return res if isinstance(res, list) else [res]


def verify_suite(mutation=None, dt_scale=1.0):
    """Run every self-check and return a :class:`VerifyReport`."""
    t0 = time.perf_counter()
    checks = []
    checks += _guard(check_roundtrip, "spectral-roundtrip", "spectral_core")
    checks += _guard(check_heat_mode, "heat-mode-decay", "spectral_core", dt_scale)
    checks += _guard(check_conservation_passive, "mass-conservation", "spectral_core", dt_scale)
    checks += _guard(check_spectral_order, "spectral-order", "spectral_core")
    checks += _guard(check_nash, "nash-smoothing", "spectral_core")
    checks += _guard(check_flows, "flows", "flows")
    checks += _guard(conservation_suite, "conservation", "species", n=32, t_end=1.0, dt_scale=dt_scale,
                     mutation=mutation)
    checks += _guard(check_reaction_ode, "reaction-ode", "species", dt_scale)
    checks += _guard(check_passive_limit, "zero-rate-is-passive", "species")
    checks += _guard(check_diagnostics, "diagnostics", "diagnostics")
    checks += _guard(comparison_battery, "comparison", "comparison_1d", dt_scale=dt_scale)
    checks += _guard(check_experiments, "experiments", "experiments")
    return VerifyReport(checks, time.perf_counter() - t0)
