"""Density-difference-dependent discrete nonlinear Schroedinger equation toolkit."""

__version__ = "0.1.0"

from .model import Boundary, LatticeState, ModelParams, energy, rhs, chemical_potential  # noqa: E402
from .dynamics import IntegratorConfig, StationaryState  # noqa: E402

__all__ = ["Boundary", "LatticeState", "ModelParams", "energy", "rhs", "chemical_potential",
           "IntegratorConfig", "StationaryState", "__version__"]
