"""Grids, wave fields and their hydrodynamic (Madelung) reading."""

from .fields import FlowField, PhaseVortexError, WaveField, global_phase_error, to_polar
from .grid import Grid, PhysicalConstants, l2_norm, linf_norm
from .madelung import (
    continuity_residual,
    convective_identity_residual,
    hamilton_jacobi_residual,
    helmholtz_decompose,
    modified_pressure_gradient,
    pressure_terms,
    quantum_potential,
    quantum_potential_gradient_form,
    velocity_from_wave,
)

__all__ = [
    "FlowField",
    "Grid",
    "PhaseVortexError",
    "PhysicalConstants",
    "WaveField",
    "continuity_residual",
    "convective_identity_residual",
    "global_phase_error",
    "hamilton_jacobi_residual",
    "helmholtz_decompose",
    "l2_norm",
    "linf_norm",
    "modified_pressure_gradient",
    "pressure_terms",
    "quantum_potential",
    "quantum_potential_gradient_form",
    "to_polar",
    "velocity_from_wave",
]
