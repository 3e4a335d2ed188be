"""Arbitrary-order well-balanced finite-volume schemes for the Euler equations with gravity."""

from .core import CartesianGrid, RunConfig, l1_norm, project_cell_averages
from .equilibrium import EquilibriumPair, isothermal_pair, make_pair, polytropic_pair
from .physics import NonPhysicalStateError
from .solver import Scheme, evolve, integrator_for

__all__ = [
    "CartesianGrid", "RunConfig", "l1_norm", "project_cell_averages", "EquilibriumPair",
    "isothermal_pair", "make_pair", "polytropic_pair", "NonPhysicalStateError", "Scheme",
    "evolve", "integrator_for",
]
__version__ = "0.1.0"
