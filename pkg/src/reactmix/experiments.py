"""Campaign drivers: parameter sweeps built from independent cells.

Each cell is a plain dict that fully determines its run, so cells can be
farmed out to worker processes and any single cell can be rerun on its own.
Every summary row carries the hash of its cell; the campaign hash covers the
whole effective configuration.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, _backend
from . import comparison_1d as c1d
from . import diagnostics as dg
from .config import ExperimentConfig, InitialSpec, config_hash
from .errors import ReactmixError, ValidationError
from .flows import ZeroFlow, build_flow
from .grid import Grid2D
from .initial import build_initial, random_smooth, single_mode
from .species import SpeciesSystem
from .stepper import PassiveScalar, StepperConfig, stable_dt

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL = 0, 1, 2


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


@dataclass
class CellResult:
    name: str
    row: dict
    records: list = field(default_factory=list)
    status: str = "ok"
    message: str = ""
    extra: dict = field(default_factory=dict)


@dataclass
class CampaignResult:
    kind: str
    rows: list
    cells: list
    fits: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    campaign_hash: str = ""

    @property
    def ok(self):
        return not self.failures


# ---------------------------------------------------------------------------
# shared helpers


def resolved(n, nu, flow):
    """Grid spacing at most a quarter of ``sqrt(nu / max|grad u|)``."""
    g = flow.max_gradient()
    if g <= 0:
        return True
    return 1.0 / n <= math.sqrt(nu / g) / 4.0


def _stepper_cfg(cell, grid, flow, eps_max=0.0, density_max=0.0, t_end=None):
    s = cell["stepper"]
    dt = s["dt"]
    if dt is None:
        dt = stable_dt(grid, flow, s["cfl"], eps_max, density_max, s["reaction_cfl"], s["safety"], t_end)
        if math.isinf(dt):
            # nothing explicit to resolve: diffusion is integrated exactly
            dt = min(0.05, (t_end or 1.0) / max(cell.get("samples", 200), 100))
        elif t_end:
            # never fewer steps than requested samples
            dt = min(dt, t_end / cell.get("samples", 1))
    return StepperConfig(dt=float(dt), dealias=s["dealias"], cfl=s["cfl"], reaction_cfl=s["reaction_cfl"],
                         advection=s["advection"])


def _every(t_end, dt, samples):
    return max(1, int(math.floor(t_end / dt / samples)))


def _flow_for(cell, nu):
    f = cell["flow"]
    return build_flow(f["kind"], nu=nu, j=f["j"], amplitude=f["amplitude"], K=f["K"], power=f["power"],
                      path=f["path"], seed=cell.get("seed", 0))


def _base_cell(cfg: ExperimentConfig, task, **kw):
    d = cfg.to_dict()
    cell = {
        "task": task,
        "n": cfg.n,
        "flow": d["flow"],
        "initial": d["initial"],
        "stepper": d["stepper"],
        "thresholds": d["thresholds"],
        "samples": cfg.samples,
        "fit_window": list(cfg.fit_window),
        "t_end": cfg.t_end,
        "t_scale": cfg.t_scale,
        "t_cap": cfg.t_cap,
        "periods": cfg.periods,
        "seed": cfg.seed,
        "wall_time_cap": cfg.wall_time_cap,
    }
    cell.update(kw)
    return cell


def _cell_hash(cell):
    return config_hash({k: v for k, v in cell.items() if k != "name"})


# ---------------------------------------------------------------------------
# cells


def ed_time(nu, j, t_scale):
    """Run length ``t_scale * nu**(-(j+1)/(j+3))``: a fixed number of predicted decay times."""
    return t_scale * nu ** (-(j + 1) / (j + 3))


def cell_ed_rate(cell) -> CellResult:
    """Fit the decay rate of the part with zero x-average under a static shear."""
    grid = Grid2D.square(cell["n"])
    nu, j = cell["nu"], cell["j"]
    control = cell["control"]
    if control:
        flow = ZeroFlow()
        f0 = single_mode(grid, (0, 1))[0]
        column = "fluct_sim"
    else:
        spec = dict(cell["flow"], kind="static-shear-x", j=j)
        flow = build_flow(spec["kind"], j=j, amplitude=spec["amplitude"], power=spec["power"])
        f0 = build_initial(grid, InitialSpec(**cell["initial"]))[0]
        column = "fluct_neq"
    t_end = cell["t_end"] or ed_time(nu, j, cell["t_scale"])
    cfg = _stepper_cfg(cell, grid, flow, t_end=t_end)
    sim = PassiveScalar(grid, f0, [nu], flow, cfg)
    recs = []
    sim.run(t_end, every=_every(t_end, cfg.dt, cell["samples"]), callback=lambda s: recs.append(dg.record_system(s)))
    a, b = cell["fit_window"]
    series = [(r.t, getattr(r, column)) for r in recs]
    fit = dg.fit_decay_rate(series, (a * t_end, b * t_end))
    row = {
        "j": j, "nu": nu, "flow": "none" if control else "shear", "column": column,
        "rate": fit.rate, "r2": fit.r2, "t_end": t_end, "dt": cfg.dt,
        "resolved": resolved(cell["n"], nu, flow),
    }
    return CellResult(cell["name"], row, recs)


def cell_halving(cell) -> CellResult:
    """Norm ratios over consecutive periods of the alternating shear (or with the flow off)."""
    grid = Grid2D.square(cell["n"])
    nu, K = cell["nu"], cell["K"]
    control = cell["control"]
    flow = ZeroFlow() if control else build_flow("alternating-shear", nu=nu, K=K, seed=cell["seed"])
    ini = InitialSpec(**cell["initial"])
    if ini.preset == "random-smooth":
        f0 = random_smooth(grid, ini.seed, ini.kmax, 1, ini.amplitude)[0]
    else:
        f0 = build_initial(grid, ini)[0]
        f0 = f0 - f0.mean()
    period = 2.0 * K / math.sqrt(nu)
    t_end = cell["periods"] * period
    cfg = _stepper_cfg(cell, grid, flow, t_end=t_end)
    if control:
        cfg = cfg.with_dt(period / max(cell["samples"], 1))
    sim = PassiveScalar(grid, f0, [nu], flow, cfg)
    recs = []
    every = _every(t_end, cfg.dt, cell["samples"])
    norms = [dg.record_system(sim).fluct_sim]
    for p in range(1, cell["periods"] + 1):
        sim.run(p * period, every=every, callback=lambda s: recs.append(dg.record_system(s)))
        norms.append(recs[-1].fluct_sim)
    # a norm that underflowed to zero has certainly halved
    ratios = [norms[i + 1] / norms[i] if norms[i] > 0 else 0.0 for i in range(len(norms) - 1)]
    row = {"K": K, "nu": nu, "flow": "off" if control else "on", "period": period, "dt": cfg.dt}
    for i, r in enumerate(ratios):
        row[f"ratio_{i + 1}"] = r
    row["max_ratio"] = max(ratios)
    row["halved"] = all(r <= 0.5 for r in ratios)
    row["resolved"] = resolved(cell["n"], nu, flow)
    return CellResult(cell["name"], row, recs, extra={"ratios": ratios})


def cell_half_life(cell) -> CellResult:
    """Time for species 1 to lose half its mass, or a censored lower bound."""
    grid = Grid2D.square(cell["n"])
    nu, eps = cell["nu"], cell["eps"]
    control = cell["control"]
    flow = ZeroFlow() if control else _flow_for(cell, nu)
    n0 = build_initial(grid, InitialSpec(**cell["initial"]))
    t_cap = cell["t_cap"]
    cfg = _stepper_cfg(cell, grid, flow, eps, float(np.max(n0)), t_cap)
    sys = SpeciesSystem(grid, n0, nu, eps, flow, cfg)
    th = cell["thresholds"]
    recs = []
    m0 = sys.masses()[0]
    half = {"reached": False}

    def cb(s):
        r = dg.record_system(s)
        r.flags = dg.assumption_flags(r, th["B"], th["B1"], th["B2"])
        recs.append(r)
        if r.masses[0] <= 0.5 * m0:
            half["reached"] = True
            raise _Stop

    try:
        sys.run(t_cap, every=_every(t_cap, cfg.dt, cell["samples"]), callback=cb,
                wall_time_cap=cell["wall_time_cap"])
    except _Stop:
        pass
    hl = dg.half_life([(r.t, r.masses[0]) for r in recs], 0.5)
    row = {
        "nu": nu, "eps": eps, "flow": "off" if control else flow.kind,
        "half_life": hl, "censored": hl is None, "t_reached": recs[-1].t, "t_cap": t_cap, "dt": cfg.dt,
        "resolved": resolved(cell["n"], nu, flow),
    }
    return CellResult(cell["name"], row, recs)


class _Stop(Exception):
    pass


def cell_shear_regime(cell) -> CellResult:
    """Rate fit, characteristic times, consumption check and the 1D comparison battery."""
    grid = Grid2D.square(cell["n"])
    nu, eps, j = cell["nu"], cell["eps"], cell["j"]
    ed = cell_ed_rate(dict(cell, control=False, t_end=None, name=cell["name"] + "-rate"))
    rate = ed.row["rate"]
    spec = dict(cell["flow"], kind="static-shear-x", j=j)
    flow = build_flow(spec["kind"], j=j, amplitude=spec["amplitude"], power=spec["power"])
    n0 = build_initial(grid, InitialSpec(**cell["initial"]))
    rec0 = dg.record(0.0, n0)
    target = rec0.overlap / 12.0
    ladder = []
    c = cell["c_cal"]
    while c <= cell["c_cal_max"] * (1 + 1e-12):
        ladder.append((c, *dg.characteristic_times(rec0, rate, eps, c)))
        c *= 2.0
    battery_end = cell.get("battery_t_end")
    horizon_max = max(ladder[-1][1] + ladder[-1][2], battery_end or 0.0)
    cfg = _stepper_cfg(cell, grid, flow, eps, float(np.max(n0)), horizon_max)
    sys = SpeciesSystem(grid, n0, nu, eps, flow, cfg)
    sys1d = c1d.spawn_1d(sys)
    track = c1d.Lockstep(eps=sys1d.eps, nu=sys1d.nu, scale=sys1d.scale,
                         mass_scale=float(max(np.abs(sys1d.masses()))))
    recs = []

    def cb(s):
        recs.append(dg.record_system(s))
        track.samples.append(c1d.sample_pair(s, sys1d))

    class _Follow:
        def step(self, h, t):
            sys1d.step(h)

    sys.twins.append(_Follow())
    passed_c, t_run, consumed = None, 0.0, 0.0
    for c, T0, T1 in ladder:
        t_run = max(T0 + T1, battery_end or 0.0)
        if t_run > sys.t:
            sys.run(t_run, every=1, callback=cb, wall_time_cap=cell["wall_time_cap"])
        consumed = float(np.interp(T0 + T1, [r.t for r in recs], [r.Q for r in recs]))
        if consumed >= target:
            passed_c = (c, T0, T1)
            break
    trans = c1d.translation_check(track)
    ts, lhs, rhs = c1d.deviation_bound_check(track)
    _, resid = c1d.min_mass_balance(track)
    tol_dev = 1e-12 * max(1.0, track.mass_scale)
    row = {
        "nu": nu, "eps": eps, "j": j, "rate": rate, "rate_r2": ed.row["r2"],
        "c_cal": passed_c[0] if passed_c else None,
        "T0": passed_c[1] if passed_c else ladder[-1][1],
        "T1": passed_c[2] if passed_c else ladder[-1][2],
        "consumed": consumed, "target": target, "bound_holds": passed_c is not None,
        "t_run": sys.t, "dt": cfg.dt,
        "translation_residual": trans, "translation_scale": track.scale,
        "deviation_bound_holds": bool(np.all(lhs <= rhs[None, :] + tol_dev)),
        "deviation_max_gap": float(np.max(lhs - rhs[None, :])),
        "balance_residual": float(np.max(np.abs(resid))), "balance_scale": track.mass_scale,
        "max_crossings": int(max(s.crossing.count for s in track.samples)),
        "resolved": resolved(cell["n"], nu, flow),
    }
    return CellResult(cell["name"], row, recs, extra={"track": track, "ed": ed.row})


def cell_multispecies(cell) -> CellResult:
    """Run several species and track total mass, total reacted mass and the mass-ratio flags."""
    grid = Grid2D.square(cell["n"])
    n0 = build_initial(grid, InitialSpec(**cell["initial"]))
    k = n0.shape[0]
    eps = np.asarray(cell["eps_matrix"] if cell["eps_matrix"] is not None else
                     cell["eps"] * (np.ones((k, k)) - np.eye(k)))
    nus = cell["nus"] or [cell["nu"]] * k
    flow = _flow_for(cell, nus[0])
    t_end = cell["t_end"] or 1.0
    cfg = _stepper_cfg(cell, grid, flow, float(np.max(eps)), float(np.max(n0)), t_end)
    sys = SpeciesSystem(grid, n0, nus, eps, flow, cfg)
    th = cell["thresholds"]
    recs = []

    def cb(s):
        r = dg.record(s.t, s.physical(), s.reacted_mass_all())
        r.flags = dg.assumption_flags(r, th["B"], th["B1"], th["B2"])
        recs.append(r)

    sys.run(t_end, every=_every(t_end, cfg.dt, cell["samples"]), callback=cb, wall_time_cap=cell["wall_time_cap"])
    identity = max(abs((recs[0].M_all - r.M_all) - r.Q) for r in recs)
    mins = [min(r.masses) for r in recs]
    ratio = [sum(r.masses) / min(r.masses) if min(r.masses) > 0 else math.inf for r in recs]
    first = {}
    for name in ("B1", "B2"):
        bad = [r.t for r in recs if r.flags.get(name) is False]
        first[name] = bad[0] if bad else None
    row = {
        "species": k, "t_end": recs[-1].t, "M_all_0": recs[0].M_all, "M_all": recs[-1].M_all,
        "Q_all": recs[-1].Q, "identity_residual": identity, "min_mass": mins[-1], "mass_ratio": ratio[-1],
        "first_B1_violation": first["B1"], "first_B2_violation": first["B2"], "dt": cfg.dt,
    }
    return CellResult(cell["name"], row, recs)


def cell_simulate(cell) -> CellResult:
    """One run: passive scalar for one field, reacting species otherwise."""
    grid = Grid2D.square(cell["n"])
    n0 = build_initial(grid, InitialSpec(**cell["initial"]))
    nu = cell["nu"]
    flow = _flow_for(cell, nu)
    t_end = cell["t_end"] or 1.0
    th = cell["thresholds"]
    recs = []
    if n0.shape[0] == 1:
        cfg = _stepper_cfg(cell, grid, flow, t_end=t_end)
        sim = PassiveScalar(grid, n0[0], [nu], flow, cfg)
    else:
        eps = cell["eps_matrix"] if cell["eps_matrix"] is not None else cell["eps"]
        cfg = _stepper_cfg(cell, grid, flow, float(np.max(eps)), float(np.max(n0)), t_end)
        sim = SpeciesSystem(grid, n0, cell["nus"] or nu, eps, flow, cfg)

    def cb(s):
        r = dg.record_system(s)
        r.flags = dg.assumption_flags(r, th["B"], th["B1"], th["B2"]) if n0.shape[0] > 1 else {}
        recs.append(r)

    reached = sim.run(t_end, every=_every(t_end, cfg.dt, cell["samples"]), callback=cb,
                      wall_time_cap=cell["wall_time_cap"])
    last = recs[-1]
    row = {"t": last.t, "reached": reached, "Q": last.Q, "M_all": last.M_all,
           "fluct_sim": last.fluct_sim, "fluct_neq": last.fluct_neq, "overlap": last.overlap, "dt": cfg.dt,
           "resolved": resolved(cell["n"], nu, flow)}
    return CellResult(cell["name"], row, recs)


TASKS = {
    "ed-rate": cell_ed_rate,
    "halving": cell_halving,
    "half-life": cell_half_life,
    "shear-regime": cell_shear_regime,
    "multispecies": cell_multispecies,
    "simulate": cell_simulate,
}


def run_cell(cell) -> CellResult:
    """Run one cell; numerical failures are caught and reported in the result."""
    h = _cell_hash(cell)
    try:
        res = TASKS[cell["task"]](cell)
    except ReactmixError as exc:
        log.error("cell %s failed: %s", cell["name"], exc)
        return CellResult(cell["name"], {"config_hash": h}, status="failed", message=str(exc))
    res.row["config_hash"] = h
    return res


def run_cells(cells, jobs=1):
    if jobs <= 1 or len(cells) <= 1:
        return [run_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_cell, cells))


# ---------------------------------------------------------------------------
# campaigns


def _nu_list(cfg):
    return list(cfg.nu_list) or [cfg.nu]


def _eps_list(cfg):
    return list(cfg.eps_list) or [cfg.eps]


def _name(prefix, **kw):
    return prefix + "".join(f"_{k}{format(v, 'g') if isinstance(v, float) else v}" for k, v in kw.items())


def _loglog(xs, ys):
    x, y = np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float))
    A = np.vstack([np.ones_like(x), x]).T
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(b), float(a)


def _affine(xs, ys):
    x, y = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    A = np.vstack([np.ones_like(x), x]).T
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (a + b * x)
    ss = float(np.sum((y - y.mean()) ** 2))
    return float(b), float(a), (1.0 - float(np.sum(resid**2)) / ss) if ss > 0 else 1.0


def _finish(kind, cfg, results, fits=None):
    failures = [f"{r.name}: {r.message}" for r in results if r.status != "ok"]
    rows = []
    for r in results:
        rows.append(dict({"cell": r.name, "status": r.status}, **r.row))
    return CampaignResult(kind, rows, results, fits or [], failures, config_hash(cfg))


def ed_rate_sweep(cfg: ExperimentConfig) -> CampaignResult:
    """Decay rates over ``j_list x nu_list`` and the log-log slope per ``j``."""
    cells = []
    for j in cfg.j_list:
        for nu in _nu_list(cfg):
            cells.append(_base_cell(cfg, "ed-rate", name=_name("ed", j=j, nu=float(nu)), j=j, nu=nu, control=False))
    if cfg.control:
        for nu in _nu_list(cfg):
            cells.append(_base_cell(cfg, "ed-rate", name=_name("heat", nu=float(nu)), j=1, nu=nu, control=True))
    results = run_cells(cells, cfg.jobs)
    fits = []
    for j in cfg.j_list:
        pts = [(r.row["nu"], r.row["rate"]) for r in results
               if r.status == "ok" and r.row["j"] == j and r.row["flow"] == "shear"]
        if len(pts) >= 2:
            slope, icpt = _loglog(*zip(*pts))
            fits.append({"group": f"j={j}", "slope": slope, "intercept": icpt,
                         "expected": (j + 1) / (j + 3), "points": len(pts)})
    return _finish("ed-rate-sweep", cfg, results, fits)


def alternating_halving(cfg: ExperimentConfig) -> CampaignResult:
    """Per-period norm ratios over ``K_list``; optionally stop at the first K that halves every period."""
    nu = _nu_list(cfg)[0]
    results = []
    passing = None
    ks = sorted(cfg.K_list)
    cells = [_base_cell(cfg, "halving", name=_name("halving", K=float(K), nu=float(nu)), K=K, nu=nu, control=False)
             for K in ks]
    if cfg.stop_at_first_pass:
        for cell in cells:
            res = run_cell(cell)
            results.append(res)
            if res.status == "ok" and res.row["halved"]:
                passing = cell["K"]
                break
    else:
        results = run_cells(cells, cfg.jobs)
        passing = next((r.row["K"] for r in results if r.status == "ok" and r.row["halved"]), None)
    if cfg.control:
        ctrl_ks = [passing] if (cfg.stop_at_first_pass and passing is not None) else [r.row.get("K") for r in results
                                                                                        if "K" in r.row]
        ctrl = [_base_cell(cfg, "halving", name=_name("halving-off", K=float(K), nu=float(nu)), K=K, nu=nu,
                           control=True) for K in ctrl_ks if K is not None]
        results += run_cells(ctrl, cfg.jobs)
    fits = [{"group": "halving", "first_K": passing, "nu": nu}]
    return _finish("alternating-halving", cfg, results, fits)


def half_life_sweep(cfg: ExperimentConfig) -> CampaignResult:
    """Half-lives over ``nu_list x eps_list``; affine fit in ``1/eps`` per ``nu``."""
    cells = []
    for nu in _nu_list(cfg):
        for eps in _eps_list(cfg):
            cells.append(_base_cell(cfg, "half-life", name=_name("hl", nu=float(nu), eps=float(eps)),
                                    nu=nu, eps=eps, control=False))
            if cfg.control:
                cells.append(_base_cell(cfg, "half-life", name=_name("hl-off", nu=float(nu), eps=float(eps)),
                                        nu=nu, eps=eps, control=True))
    results = run_cells(cells, cfg.jobs)
    fits = []
    for nu in _nu_list(cfg):
        pts = [(1.0 / r.row["eps"], r.row["half_life"]) for r in results
               if r.status == "ok" and r.row["nu"] == nu and r.row["flow"] != "off" and r.row["half_life"] is not None]
        if len(pts) >= 2:
            slope, icpt, r2 = _affine(*zip(*pts))
            fits.append({"group": f"nu={nu:g}", "slope": slope, "intercept": icpt, "r2": r2, "points": len(pts)})
    return _finish("halflife-sweep", cfg, results, fits)


def shear_regime_run(cfg: ExperimentConfig) -> CampaignResult:
    cells = []
    for nu in _nu_list(cfg):
        for eps in _eps_list(cfg):
            cells.append(_base_cell(cfg, "shear-regime", name=_name("shear", nu=float(nu), eps=float(eps)),
                                    nu=nu, eps=eps, j=cfg.flow.j, c_cal=cfg.c_cal, c_cal_max=cfg.c_cal_max,
                                    battery_t_end=cfg.battery_t_end))
    return _finish("shear-regime", cfg, run_cells(cells, cfg.jobs))


def multispecies_run(cfg: ExperimentConfig) -> CampaignResult:
    cell = _base_cell(cfg, "multispecies", name="multispecies", eps=cfg.eps, eps_matrix=cfg.eps_matrix,
                      nus=cfg.nus, nu=cfg.nu)
    return _finish("multispecies", cfg, run_cells([cell]))


def simulate(cfg: ExperimentConfig) -> CampaignResult:
    cell = _base_cell(cfg, "simulate", name="simulate", nu=cfg.nu, eps=cfg.eps, eps_matrix=cfg.eps_matrix,
                      nus=cfg.nus)
    return _finish("simulate", cfg, run_cells([cell]))


CAMPAIGNS = {
    "simulate": simulate,
    "ed-rate-sweep": ed_rate_sweep,
    "alternating-halving": alternating_halving,
    "halflife-sweep": half_life_sweep,
    "shear-regime": shear_regime_run,
    "multispecies": multispecies_run,
}


# ---------------------------------------------------------------------------
# output


def write_rows(path, rows):
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r.get(k)) for k in cols])


def write_outputs(result: CampaignResult, cfg: ExperimentConfig, out_dir, started, wall):
    """Write summary, per-cell diagnostics, fits and the manifest; return the manifest dict."""
    os.makedirs(out_dir, exist_ok=True)
    outputs = []
    summary = os.path.join(out_dir, "summary.csv")
    write_rows(summary, result.rows)
    outputs.append("summary.csv")
    if result.fits:
        write_rows(os.path.join(out_dir, "fits.csv"), result.fits)
        outputs.append("fits.csv")
    cell_dir = os.path.join(out_dir, "cells")
    for c in result.cells:
        if c.records:
            os.makedirs(cell_dir, exist_ok=True)
            rel = os.path.join("cells", c.name + ".csv")
            dg.write_csv(os.path.join(out_dir, rel), c.records, c.row.get("config_hash", ""))
            outputs.append(rel)
    manifest = {
        "campaign_hash": result.campaign_hash,
        "kind": result.kind,
        "version": __version__,
        "backend": _backend.BACKEND,
        "started": started,
        "wall_clock_seconds": wall,
        "config": cfg.to_dict(),
        "outputs": outputs,
        "failures": result.failures,
        "status": "ok" if result.ok else "partial",
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
    return manifest


def run_campaign(cfg: ExperimentConfig, out_dir):
    """Run the campaign named by ``cfg.kind`` and write its outputs.

    Returns
    -------
    (int, dict)
        Exit code (0 all cells ok, 2 some cells failed) and the manifest.
    """
    if cfg.kind == "verify-suite":
        raise ValidationError("use reactmix.verify.verify_suite for the verification suite")
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    t0 = time.perf_counter()
    result = CAMPAIGNS[cfg.kind](cfg)
    manifest = write_outputs(result, cfg, out_dir, started, time.perf_counter() - t0)
    return (EXIT_OK if result.ok else EXIT_PARTIAL), manifest


def effective_config(cfg):
    return dataclasses.asdict(cfg)
