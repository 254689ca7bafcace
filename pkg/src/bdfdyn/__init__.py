"""Momentum-lattice simulator of cutoff Bogoliubov-Dirac-Fock dynamics with classical nuclei."""

from .constants import ConstantReport, estimate_constants
from .coulomb import ChargeDensity, GaussianShape, coulomb_inner, coulomb_norm
from .coupling import picard_schauder
from .dynamics import SystemState, build_initial_state, rk4_step, simulate, total_energy
from .errors import BDFError, ConfigurationError, DivergenceError, LatticeMismatchError, RetractionError
from .lattice import MomentumLattice, build_difference_lattice, build_lattice
from .newton import NucleusState, nuclear_force, potential_energy_U
from .opspace import KernelOperator
from .probes import lipschitz_divergence_probe

__version__ = "0.1.0"

__all__ = [
    "BDFError",
    "ChargeDensity",
    "ConfigurationError",
    "ConstantReport",
    "DivergenceError",
    "GaussianShape",
    "KernelOperator",
    "LatticeMismatchError",
    "MomentumLattice",
    "NucleusState",
    "RetractionError",
    "SystemState",
    "build_difference_lattice",
    "build_initial_state",
    "build_lattice",
    "coulomb_inner",
    "coulomb_norm",
    "estimate_constants",
    "lipschitz_divergence_probe",
    "nuclear_force",
    "picard_schauder",
    "potential_energy_U",
    "rk4_step",
    "simulate",
    "total_energy",
]
