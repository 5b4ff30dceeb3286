"""Pseudo-spectral simulation of absorbing reactions stirred by shear flows on the unit torus."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .comparison_1d import OneDSystem, spawn_1d
from .diagnostics import (
    DiagnosticsRecord,
    RateFit,
    characteristic_times,
    fit_decay_rate,
    half_life,
    overlap_mass,
    remainder,
    x_average,
)
from .errors import (
    CFLViolation,
    ConfigError,
    DivergenceError,
    NegativityError,
    NonFiniteError,
    ReactmixError,
    ValidationError,
)
from .flows import AlternatingShear, CustomFlow, ShearFlow, ShearProfile, ZeroFlow, build_flow, make_shear
from .grid import Field1D, Field2D, Grid2D, to_physical, to_spectral
from .species import SpeciesSystem, reacted_mass, spawn_supersolutions, step_reaction_diffusion
from .stepper import PassiveScalar, StepperConfig, run_until, step_advect_diffuse

__all__ = [
    "BACKEND",
    "AlternatingShear",
    "CFLViolation",
    "ConfigError",
    "CustomFlow",
    "DiagnosticsRecord",
    "DivergenceError",
    "Field1D",
    "Field2D",
    "Grid2D",
    "NegativityError",
    "NonFiniteError",
    "OneDSystem",
    "PassiveScalar",
    "RateFit",
    "ReactmixError",
    "ShearFlow",
    "ShearProfile",
    "SpeciesSystem",
    "StepperConfig",
    "ValidationError",
    "ZeroFlow",
    "build_flow",
    "characteristic_times",
    "fit_decay_rate",
    "half_life",
    "make_shear",
    "overlap_mass",
    "reacted_mass",
    "remainder",
    "run_until",
    "spawn_1d",
    "spawn_supersolutions",
    "step_advect_diffuse",
    "step_reaction_diffusion",
    "to_physical",
    "to_spectral",
    "x_average",
]
