"""Entanglement dynamics of dissipative half-SSH chains."""

from .chain import ChainParams, ModeBasis, build_mode_basis, localization_length, single_particle_hamiltonian

__version__ = "0.1.0"

__all__ = [
    "ChainParams",
    "ModeBasis",
    "build_mode_basis",
    "localization_length",
    "single_particle_hamiltonian",
    "__version__",
]
