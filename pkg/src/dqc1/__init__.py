"""Mixed-state quantum computation with one clean qubit, simulated densely."""

from ._config import DenseLimitError, InvariantError, settings
from .circuit import (
    ControlledPauliRotation,
    GateNetwork,
    PauliRotation,
    PauliSum,
    build_tn,
    conditional_half_evolutions,
    conditional_u,
    network_unitary,
    parse_circuit,
    parse_hamiltonian,
    trotterize,
)
from .measurement import EstimationBudget, NoisyMeter, estimate, estimate_mean
from .pauli import PauliString, PhasedPauli, commutes, pauli_mul
from .state import DensityState, PureState, evolve, init_dqc1, init_dqcp

__version__ = "0.1.0"

__all__ = [
    "ControlledPauliRotation",
    "DenseLimitError",
    "DensityState",
    "EstimationBudget",
    "GateNetwork",
    "InvariantError",
    "NoisyMeter",
    "PauliRotation",
    "PauliString",
    "PauliSum",
    "PhasedPauli",
    "PureState",
    "build_tn",
    "commutes",
    "conditional_half_evolutions",
    "conditional_u",
    "estimate",
    "estimate_mean",
    "evolve",
    "init_dqc1",
    "init_dqcp",
    "network_unitary",
    "parse_circuit",
    "parse_hamiltonian",
    "pauli_mul",
    "settings",
    "trotterize",
]
