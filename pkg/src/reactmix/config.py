"""Experiment configuration: YAML files, dotted overrides, validation, hashing."""

from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
import re
import typing
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .errors import ConfigError

KINDS = (
    "simulate",
    "ed-rate-sweep",
    "alternating-halving",
    "halflife-sweep",
    "shear-regime",
    "multispecies",
    "verify-suite",
)


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e-3`` (no dot) as a float."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+][0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


@dataclass
class FlowSpec:
    kind: str = "static-shear-x"
    j: int = 1
    power: Optional[int] = None
    amplitude: float = 1.0
    K: float = 2.0
    path: Optional[str] = None


@dataclass
class InitialSpec:
    preset: str = "single-mode"
    sigma: float = 0.08
    mass: float = 1.0
    mode: list[int] = field(default_factory=lambda: [1, 0])
    amplitude: float = 1.0
    mean: float = 0.0
    phase: str = "sin"
    centers: Optional[list[list[float]]] = None
    values: Optional[list[float]] = None
    species: int = 2
    kmax: int = 4
    seed: int = 0
    path: Optional[str] = None


@dataclass
class StepperSpec:
    dt: Optional[float] = None
    cfl: float = 0.5
    reaction_cfl: float = 0.1
    safety: float = 0.9
    dealias: bool = True
    advection: str = "auto"


@dataclass
class Thresholds:
    B: Optional[float] = None
    B1: Optional[float] = None
    B2: Optional[float] = None


@dataclass
class ExperimentConfig:
    """Everything a campaign needs; unknown keys are rejected."""

    kind: str = "simulate"
    n: int = 64
    nu: float = 1e-3
    eps: float = 0.5
    eps_matrix: Optional[list[list[float]]] = None
    nus: Optional[list[float]] = None
    nu_list: list[float] = field(default_factory=list)
    eps_list: list[float] = field(default_factory=list)
    j_list: list[int] = field(default_factory=lambda: [1])
    K_list: list[float] = field(default_factory=lambda: [2.0])
    flow: FlowSpec = field(default_factory=FlowSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    stepper: StepperSpec = field(default_factory=StepperSpec)
    thresholds: Thresholds = field(default_factory=Thresholds)
    t_end: Optional[float] = None
    t_scale: float = 1.0
    t_cap: float = 200.0
    periods: int = 4
    samples: int = 200
    fit_window: list[float] = field(default_factory=lambda: [0.1, 0.9])
    control: bool = False
    stop_at_first_pass: bool = True
    c_cal: float = 1.0
    c_cal_max: float = 64.0
    battery_t_end: Optional[float] = None
    wall_time_cap: Optional[float] = None
    seed: int = 0
    jobs: int = 1

    def validate(self):
        errs = []
        if self.kind not in KINDS:
            errs.append(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n < 16 or self.n & (self.n - 1):
            errs.append(f"n must be a power of two >= 16, got {self.n}")
        for nu in [self.nu, *self.nu_list, *(self.nus or [])]:
            if not 0 < nu <= 1:
                errs.append(f"nu must lie in (0, 1], got {nu}")
        for eps in [self.eps, *self.eps_list]:
            if not 0 <= eps <= 1:
                errs.append(f"eps must lie in [0, 1], got {eps}")
        for K in self.K_list:
            if not K > 0:
                errs.append(f"K must be positive, got {K}")
        for j in self.j_list:
            if j < 1:
                errs.append(f"vanishing order must be >= 1, got {j}")
        if len(self.fit_window) != 2 or not 0 <= self.fit_window[0] < self.fit_window[1] <= 1:
            errs.append(f"fit_window must be two fractions 0 <= a < b <= 1, got {self.fit_window}")
        if self.samples < 10:
            errs.append("samples must be at least 10")
        if self.t_end is not None and not self.t_end > 0:
            errs.append("t_end must be positive")
        if self.jobs < 1:
            errs.append("jobs must be >= 1")
        if self.stepper.dt is not None and not self.stepper.dt > 0:
            errs.append("stepper.dt must be positive")
        if errs:
            raise ConfigError("; ".join(errs))
        return self

    def to_dict(self):
        return dataclasses.asdict(self)


def _coerce(tp, value, where):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)][0]
        return _coerce(inner, value, where)
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected a mapping, got {type(value).__name__}")
        return from_dict(tp, value, where)
    if origin is list:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: expected a list, got {value!r}")
        return [_coerce(args[0], v, f"{where}[{i}]") for i, v in enumerate(value)]
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    return value


def from_dict(cls, data, where="config"):
    """Build dataclass ``cls`` from ``data``, rejecting unknown keys."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping")
    hints = typing.get_type_hints(cls)
    names = [f.name for f in dataclasses.fields(cls)]
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}; valid keys are {names}")
    kwargs = {k: _coerce(hints[k], v, f"{where}.{k}") for k, v in data.items()}
    return cls(**kwargs)


def parse_value(text):
    """Parse an override value with YAML rules (numbers, lists, booleans, strings)."""
    try:
        return yaml.load(text, Loader=_Loader)
    except yaml.YAMLError:
        return text


def apply_overrides(data, overrides):
    """Apply ``key.sub=value`` overrides left to right; the last one wins."""
    data = copy.deepcopy(data)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise ConfigError(f"override {item!r} has an empty key")
        node = data
        for p in parts[:-1]:
            nxt = node.get(p)
            if nxt is None:
                nxt = {}
                node[p] = nxt
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {item!r}: {p} is not a section")
            node = nxt
        node[parts[-1]] = parse_value(text)
    return data


def load_yaml(path):
    try:
        with open(path) as fh:
            data = yaml.load(fh, Loader=_Loader)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        loc = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"{path}: YAML parse error at {loc}: {exc.problem}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def load_config(path=None, overrides=None) -> ExperimentConfig:
    """Read a YAML file (optional), apply overrides and validate."""
    data = load_yaml(path) if path else {}
    data = apply_overrides(data, overrides)
    return from_dict(ExperimentConfig, data).validate()


def config_hash(obj):
    """Short SHA-256 of the canonical JSON form of ``obj``."""
    if dataclasses.is_dataclass(obj):
        obj = dataclasses.asdict(obj)
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
