"""Quantum-hydrodynamics workbench: Madelung fields, Bohmian trajectories,
Gaussian vortices under fluctuating viscosity and torus topology."""

__version__ = "0.1.0"
