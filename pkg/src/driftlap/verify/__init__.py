"""Oracles and checks: finite differences, closed-form catalogue, sweeps,
delta-mass quadrature and the commuting-diagram test."""

from .catalogue import CatalogueReport, run_catalogue
from .delta import DeltaMassEstimate, delta_mass
from .diagram import DiagramReport, diagram_check
from .fd import fd_derivative
from .sweep import ResidualReport, SweepConfig, run_sweep

__all__ = [
    "CatalogueReport",
    "DeltaMassEstimate",
    "DiagramReport",
    "ResidualReport",
    "SweepConfig",
    "delta_mass",
    "diagram_check",
    "fd_derivative",
    "run_catalogue",
    "run_sweep",
]
