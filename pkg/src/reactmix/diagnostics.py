"""Norms, averages, decay-rate fits and characteristic times.

Integrals over the unit torus are grid averages (rectangle rule), which is
exact for trigonometric polynomials resolved by the grid.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .grid import Field1D, Field2D


def _values(f):
    if isinstance(f, (Field2D, Field1D)):
        if isinstance(f, Field2D) and f.representation != "physical":
            raise ValidationError("diagnostics need physical fields")
        return f.values
    return np.asarray(f, dtype=float)


def l1(f):
    return float(np.mean(np.abs(_values(f))))


def l2(f):
    v = _values(f)
    return float(math.sqrt(np.mean(v * v)))


def linf(f):
    return float(np.max(np.abs(_values(f))))


def mass(f):
    return float(np.mean(_values(f)))


def x_average(f) -> Field1D:
    """``<f>(y)``: mean over x, i.e. the ``kx = 0`` part of ``f``."""
    return Field1D(f.grid, _values(f).mean(axis=0))


def remainder(f) -> Field2D:
    """``f - <f>``: the part of ``f`` with zero x-average."""
    v = _values(f)
    return Field2D(f.grid, v - v.mean(axis=0, keepdims=True))


def mean_zero_part(f) -> Field2D:
    """``f - mean(f)``."""
    v = _values(f)
    return Field2D(f.grid, v - v.mean())


def overlap_mass(*fields):
    """``int min_a <n_a>(y) dy``; with one field it is ``||<n>||_1``."""
    if not fields:
        raise ValidationError("overlap needs at least one field")
    avgs = np.array([_values(f).mean(axis=0) for f in fields])
    return float(np.mean(np.min(avgs, axis=0)))


def combined_norm(parts):
    """Root-sum-square of per-species norms."""
    return float(math.sqrt(sum(p * p for p in parts)))


@dataclass
class DiagnosticsRecord:
    """One sample of a run."""

    t: float
    masses: tuple
    l1: tuple
    l2: tuple
    linf: tuple
    Q: float
    M_all: float
    fluct_sim: float
    fluct_neq: float
    overlap: float
    flags: dict = field(default_factory=dict)

    @property
    def sum_l2(self):
        return float(sum(self.l2))


def fluctuation_norms(spectrum, n_y):
    """L2 norms of ``f - mean(f)`` and ``f - <f>`` from raw half-spectra.

    ``spectrum`` has shape ``(k, n_x, n_y//2 + 1)`` as returned by ``rfft2``.
    Summing only the modes that belong to each part keeps fluctuations far
    below the rounding level of the mean visible.
    """
    nx = spectrum.shape[-2]
    p = np.abs(spectrum) ** 2
    w = np.full(p.shape[-1], 2.0)
    w[0] = 1.0
    if n_y % 2 == 0:
        w[-1] = 1.0
    p = p * (w / float(nx * n_y) ** 2)
    neq = p[:, 1:, :].sum(axis=(1, 2))
    sim = np.sqrt(neq + p[:, 0, 1:].sum(axis=-1))
    return [float(x) for x in sim], [float(x) for x in np.sqrt(neq)]


def record(t, values, Q=0.0, flags=None, spectrum=None) -> DiagnosticsRecord:
    """Build a record from physical values, shape ``(k, n_x, n_y)``.

    ``spectrum`` (raw half-spectra of the same fields) is used for the
    fluctuation norms when given.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim == 2:
        v = v[None]
    masses = tuple(float(x) for x in v.mean(axis=(1, 2)))
    if spectrum is None:
        spectrum = np.fft.rfft2(v, axes=(1, 2))
    sim, neq = fluctuation_norms(spectrum, v.shape[-1])
    return DiagnosticsRecord(
        t=float(t),
        masses=masses,
        l1=tuple(l1(x) for x in v),
        l2=tuple(l2(x) for x in v),
        linf=tuple(linf(x) for x in v),
        Q=float(Q),
        M_all=float(sum(masses)),
        fluct_sim=combined_norm(sim),
        fluct_neq=combined_norm(neq),
        overlap=float(np.mean(np.min(v.mean(axis=1), axis=0))),
        flags=dict(flags or {}),
    )


def record_system(sys, flags=None) -> DiagnosticsRecord:
    """Record for a running solver (passive or reacting)."""
    Q = sys.reacted_mass() if hasattr(sys, "reacted_mass") else 0.0
    return record(sys.t, sys.physical(), Q, flags, spectrum=sys.full_spectrum())


def assumption_flags(rec: DiagnosticsRecord, B=None, B1=None, B2=None):
    """Which mass-ratio assumptions hold for this record; unset thresholds are skipped."""
    flags = {}
    m = rec.masses
    if B is not None:
        flags["B"] = bool(m[0] >= 1.0 / B)
    if B1 is not None:
        flags["B1"] = bool(min(m) >= 1.0 / B1)
    if B2 is not None:
        lo = min(m)
        flags["B2"] = bool(lo > 0 and sum(m) / lo <= B2 * (1 + 1e-12))
    return flags


# ---------------------------------------------------------------------------
# fits


@dataclass(frozen=True)
class RateFit:
    rate: float
    intercept: float
    r2: float
    window: tuple
    samples: int


def fit_decay_rate(series, window=None) -> RateFit:
    """Least-squares fit of ``log norm = a - rate * t``.

    Parameters
    ----------
    series : sequence of (t, value) or array (m, 2)
    window : (t0, t1), optional
        Only samples with ``t0 <= t <= t1`` are used.
    """
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError("series must be pairs (t, value)")
    if window is not None:
        t0, t1 = window
        arr = arr[(arr[:, 0] >= t0) & (arr[:, 0] <= t1)]
    if len(arr) < 10:
        raise ValidationError(f"need at least 10 samples in the fit window, got {len(arr)}")
    if np.any(arr[:, 1] <= 0) or not np.all(np.isfinite(arr)):
        raise ValidationError("norm series must be positive and finite")
    t, y = arr[:, 0], np.log(arr[:, 1])
    A = np.vstack([np.ones_like(t), t]).T
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (a + b * t)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(rate=float(-b), intercept=float(a), r2=r2, window=(float(t[0]), float(t[-1])), samples=len(t))


def half_life(series, fraction=0.5):
    """First time the value drops to ``fraction`` of its initial value.

    Linear interpolation between samples.  Returns ``None`` when the level is
    never reached.
    """
    if not 0 < fraction < 1:
        raise ValidationError(f"fraction must lie in (0, 1), got {fraction}")
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or len(arr) < 1:
        raise ValidationError("series must be pairs (t, value)")
    target = fraction * arr[0, 1]
    below = np.nonzero(arr[:, 1] <= target)[0]
    if len(below) == 0:
        return None
    i = int(below[0])
    if i == 0:
        return float(arr[0, 0])
    (t0, v0), (t1, v1) = arr[i - 1], arr[i]
    return float(t0 + (v0 - target) / (v0 - v1) * (t1 - t0))


def characteristic_times(initial, fit, eps, c_cal=1.0):
    """Mixing and reaction time scales ``(T0, T1)`` from the initial record and a rate fit.

    ``T0 = log(C (eps/rate * S + 1) * S / overlap) / rate`` and
    ``T1 = C / eps * max(1, 1/overlap)`` with ``S`` the summed L2 norms.
    """
    if isinstance(initial, DiagnosticsRecord):
        s, ov = initial.sum_l2, initial.overlap
    else:
        s, ov = initial
    rate = fit.rate if isinstance(fit, RateFit) else float(fit)
    if not rate > 0:
        raise ValidationError(f"decay rate must be positive, got {rate}")
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    if not ov > 0:
        raise ValidationError("initial overlap must be positive")
    t0 = math.log(c_cal * (eps / rate * s + 1.0) * s / ov) / rate
    t1 = c_cal / eps * max(1.0, 1.0 / ov)
    return max(t0, 0.0), t1


# ---------------------------------------------------------------------------
# CSV


def csv_header(nspecies):
    return (
        ["t"]
        + [f"mass_{a + 1}" for a in range(nspecies)]
        + ["Q", "M_all"]
        + [f"l2_{a + 1}" for a in range(nspecies)]
        + ["fluct_sim", "fluct_neq", "overlap", "flags", "config_hash"]
    )


def _fmt(x):
    return format(float(x), ".17g")


def csv_row(rec: DiagnosticsRecord, config_hash):
    flags = ";".join(f"{k}={int(v)}" for k, v in sorted(rec.flags.items()))
    return (
        [_fmt(rec.t)]
        + [_fmt(m) for m in rec.masses]
        + [_fmt(rec.Q), _fmt(rec.M_all)]
        + [_fmt(x) for x in rec.l2]
        + [_fmt(rec.fluct_sim), _fmt(rec.fluct_neq), _fmt(rec.overlap), flags, config_hash]
    )


def write_csv(path, records, config_hash):
    records = list(records)
    if not records:
        raise ValidationError("no records to write")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_header(len(records[0].masses)))
        for rec in records:
            w.writerow(csv_row(rec, config_hash))


def read_csv(path):
    """Read a diagnostics CSV back as a dict of column name to list."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValidationError(f"{path} has no data rows")
    cols = {}
    for name in rows[0]:
        vals = [r[name] for r in rows]
        try:
            cols[name] = np.array([float(v) for v in vals])
        except ValueError:
            cols[name] = vals
    return cols
