"""Exact-diagonalization simulator for rotation-encoded entanglement generation in dimerized spin chains."""

__version__ = "0.1.0"

from .engine import DegeneracyPolicy, ground_state, evolve
from .hamiltonian import ChainSpec, Model
from .protocol import Outcome, RotationAngles, find_tstar, run_protocol

__all__ = [
    "ChainSpec",
    "DegeneracyPolicy",
    "Model",
    "Outcome",
    "RotationAngles",
    "evolve",
    "find_tstar",
    "ground_state",
    "run_protocol",
]
