"""Steady states, dynamics and two-time correlations of open quadratic systems."""

from ._lyapoqs import (
    Bath,
    LyapoqsError,
    SpectralFunction,
    System,
    chain_hamiltonian,
    resonant_level,
    run_cli,
)

__all__ = [
    "Bath",
    "LyapoqsError",
    "SpectralFunction",
    "System",
    "chain_hamiltonian",
    "resonant_level",
    "run_cli",
]
__version__ = "0.1.0"
