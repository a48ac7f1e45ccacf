"""Complexity-geometry distances on U(2**N) and a geodesic-to-circuit compiler."""
from .pauli import PauliString, PhasedPauli, commutator, commutes, enumerate_paulis, multiply, weight
from .schedule import PenaltySchedule
from .path import Hamiltonian, Path, Segment

__version__ = "0.1.0"

__all__ = [
    "Hamiltonian",
    "Path",
    "PauliString",
    "PenaltySchedule",
    "PhasedPauli",
    "Segment",
    "commutator",
    "commutes",
    "enumerate_paulis",
    "multiply",
    "weight",
]
