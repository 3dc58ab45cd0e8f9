"""Superadiabatic geometric quantum gates on a driven two-level system.

Waveform synthesis (:mod:`.schedule`), propagation (:mod:`.dynamics`),
phase analysis (:mod:`.analysis`), process tomography (:mod:`.tomography`),
randomized benchmarking (:mod:`.benchmarking`) and the figure sweeps
(:mod:`.experiments`).
"""

__version__ = "0.1.0"

from .analysis import (
    PhaseDecomposition,
    bloch_vector,
    cyclic_states,
    dynamic_phase,
    extract_geometric_phase,
    solid_angle,
)
from .dynamics import evolve_state, gate_unitary, propagate
from .noise import NoiseModel, sample_noise
from .schedule import (
    GateFamily,
    GateSpec,
    PulseSchedule,
    build_schedule,
    pauli_x,
    pauli_y,
    pauli_z,
    rotation_gate,
)

__all__ = [
    "GateFamily",
    "GateSpec",
    "NoiseModel",
    "PhaseDecomposition",
    "PulseSchedule",
    "bloch_vector",
    "build_schedule",
    "cyclic_states",
    "dynamic_phase",
    "evolve_state",
    "extract_geometric_phase",
    "gate_unitary",
    "pauli_x",
    "pauli_y",
    "pauli_z",
    "propagate",
    "rotation_gate",
    "sample_noise",
    "solid_angle",
]
