"""Doubly dressed V-system spectroscopy toolkit.

Closed-form dressed states of a V system driven by two coupling fields,
weak-probe spectra of the resulting N configuration, Zeeman-sublevel
decomposition of the rubidium scheme, power-series fits, and a steady-state
Bloch-equation oracle.
"""
__version__ = "0.1.0"

from .dressed import (
    DressedSolution,
    DriveConfig,
    absorption_weights,
    build_hamiltonian,
    characteristic_coeffs,
    dressed_energies,
    dressed_vectors,
    eigen_oracle,
    resonance_solution,
    solve,
)
from .fitting import PowerSeries, confidence_band, fit_height, fit_splitting, load_series
from .kernels import BACKEND
from .obe import DecayConfig, ProbeConfig, build_liouvillian, probe_absorption_spectrum, steady_state
from .spectrum import LineshapeConfig, SpectrumModel, anticrossing_gap, find_peaks, synthesize
from .zeeman import build_coupling_graph, clebsch_gordan, decompose, effective_n_parameters, transform_basis

__all__ = [
    "BACKEND",
    "DecayConfig",
    "DressedSolution",
    "DriveConfig",
    "LineshapeConfig",
    "PowerSeries",
    "ProbeConfig",
    "SpectrumModel",
    "absorption_weights",
    "anticrossing_gap",
    "build_coupling_graph",
    "build_hamiltonian",
    "build_liouvillian",
    "characteristic_coeffs",
    "clebsch_gordan",
    "confidence_band",
    "decompose",
    "dressed_energies",
    "dressed_vectors",
    "effective_n_parameters",
    "eigen_oracle",
    "find_peaks",
    "fit_height",
    "fit_splitting",
    "load_series",
    "probe_absorption_spectrum",
    "resonance_solution",
    "solve",
    "steady_state",
    "synthesize",
    "transform_basis",
]
