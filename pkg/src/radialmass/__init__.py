"""Radial aggregation mass equation ``m_t + m (m_rho)^alpha = 0`` with ``alpha >= 1``.

The package provides a monotone finite-difference solver, explicit
solutions (vortex, point masses, waiting-time subsolutions), classical
solutions by characteristics, front tracking, waiting-time analysis and
long-time diagnostics.
"""

from .core import (
    CFLError,
    DomainError,
    Grid,
    InitialDatum,
    MassProfile,
    ModelParams,
    Trajectory,
    build_grid,
    density_from_mass,
    sample_initial_mass,
)
from .scheme import interpolate, iterate_scheme, run_scheme

__all__ = [
    "CFLError",
    "DomainError",
    "Grid",
    "InitialDatum",
    "MassProfile",
    "ModelParams",
    "Trajectory",
    "build_grid",
    "density_from_mass",
    "interpolate",
    "iterate_scheme",
    "run_scheme",
    "sample_initial_mass",
]

__version__ = "0.1.0"
