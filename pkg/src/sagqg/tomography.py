"""Single-qubit process tomography by linear inversion.

Four input states are prepared ideally, sent through the gate and read out
in three settings: directly, after a ``(pi/2)_y`` pulse and after a
``(pi/2)_x`` pulse. The three ``|0>`` populations fix the output Bloch
vector, the four outputs fix the superoperator and that in turn fixes the
process matrix

    E(rho) = sum_mn chi_mn E_m rho E_n^dagger,   E = (I, sx, sy, sz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import X_READOUT, Y_READOUT
from .noise import NOISELESS, NoiseModel, realized_unitary, sample_noise
from .operators import HADAMARD, I2, PAULI_BASIS, SX, SY, SZ, is_unitary
from .schedule import GateSpec, pauli_x, pauli_y, pauli_z, rotation_gate


class IncompleteDataError(ValueError):
    """Records do not determine the process."""


class ReconstructionError(ArithmeticError):
    pass


SETTINGS = ("direct", "y", "x")
_READOUT = {"direct": I2, "y": Y_READOUT, "x": X_READOUT}

_S = 1.0 / math.sqrt(2.0)
INPUT_STATES = (
    np.array([1, 0], dtype=np.complex128),
    np.array([0, 1], dtype=np.complex128),
    np.array([_S, _S], dtype=np.complex128),
    np.array([_S, 1j * _S], dtype=np.complex128),
)


@dataclass(frozen=True)
class MeasurementRecord:
    input_index: int  # 1..4
    setting: str
    p0: float
    shots: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError(f"p0 must lie in [0, 1], got {self.p0}")
        if self.setting not in _READOUT:
            raise ValueError(f"unknown readout setting {self.setting!r}")


def qpt_input_states() -> tuple[np.ndarray, ...]:
    """``|0>``, ``|1>``, ``(|0>+|1>)/sqrt2``, ``(|0>+i|1>)/sqrt2``."""
    return tuple(s.copy() for s in INPUT_STATES)


def _p0(psi, setting):
    amp = _READOUT[setting][0] @ psi
    return float(min(1.0, max(0.0, abs(amp) ** 2)))


def simulate_qpt(gate, noise: NoiseModel | None = None, shots: int = 0,
                 rng: np.random.Generator | None = None, substeps: int = 256) -> list[MeasurementRecord]:
    """Measurement records for every input state and readout setting.

    ``gate`` is a unitary, a :class:`GateSpec`, a schedule or a sequence of
    those. With a noise model a fresh realisation is drawn for each of the
    twelve (input, setting) pairs. ``shots = 0`` records exact populations,
    otherwise binomial estimates.
    """
    if shots < 0:
        raise ValueError("shots must be >= 0")
    noise = NoiseModel() if noise is None else noise
    if rng is None:
        rng = np.random.default_rng(0)
    if noise.is_noiseless:
        u_fixed = realized_unitary(gate, NOISELESS, substeps)
    records = []
    for j, psi in enumerate(INPUT_STATES, start=1):
        for setting in SETTINGS:
            u = u_fixed if noise.is_noiseless else realized_unitary(gate, sample_noise(noise, rng), substeps)
            p = _p0(u @ psi, setting)
            if shots:
                p = rng.binomial(shots, p) / shots
            records.append(MeasurementRecord(j, setting, float(p), shots))
    return records


def output_bloch_vectors(records) -> np.ndarray:
    """Output Bloch vector per input state, shape ``(4, 3)``."""
    table = {}
    for r in records:
        table[(r.input_index, r.setting)] = r.p0
    out = np.empty((len(INPUT_STATES), 3))
    for j in range(1, len(INPUT_STATES) + 1):
        try:
            p_d, p_y, p_x = (table[(j, s)] for s in SETTINGS)
        except KeyError as exc:
            raise IncompleteDataError(f"missing record for input {j}, setting {exc.args[0][1]!r}") from None
        # (pi/2)_x sends +y to |0>, (pi/2)_y sends +x to |1>
        out[j - 1] = (1.0 - 2.0 * p_y, 2.0 * p_x - 1.0, 2.0 * p_d - 1.0)
    return out


def _density(bloch):
    x, y, z = bloch
    return 0.5 * (I2 + x * SX + y * SY + z * SZ)


def _vec(m):
    # column stacking
    return np.asarray(m).reshape(-1, order="F")


# chi -> superoperator: vec(E_m rho E_n^dag) = (conj(E_n) kron E_m) vec(rho)
_CHI_TO_SUPER = np.column_stack(
    [_vec(np.kron(PAULI_BASIS[n].conj(), PAULI_BASIS[m])) for m in range(4) for n in range(4)]
)


def superoperator_to_chi(superop: np.ndarray) -> np.ndarray:
    return np.linalg.solve(_CHI_TO_SUPER, _vec(superop)).reshape(4, 4)


def chi_to_superoperator(chi: np.ndarray) -> np.ndarray:
    return (_CHI_TO_SUPER @ np.asarray(chi).reshape(-1)).reshape(4, 4, order="F")


def reconstruct_chi(records, project_cp: bool = False, inputs=None) -> np.ndarray:
    """Process matrix from :func:`simulate_qpt` records by linear inversion.

    ``project_cp`` clips negative eigenvalues and rescales to unit trace.
    """
    inputs = INPUT_STATES if inputs is None else inputs
    rho_in = np.column_stack([_vec(np.outer(s, s.conj())) for s in inputs])
    if np.linalg.matrix_rank(rho_in, tol=1e-10) < 4:
        raise IncompleteDataError("input states are not informationally complete")
    rho_out = np.column_stack([_vec(_density(b)) for b in output_bloch_vectors(records)])
    superop = rho_out @ np.linalg.inv(rho_in)
    chi = superoperator_to_chi(superop)
    chi = 0.5 * (chi + chi.conj().T)
    return project_to_cp(chi) if project_cp else chi


def project_to_cp(chi: np.ndarray) -> np.ndarray:
    """Nearest-by-clipping positive semidefinite chi with trace one."""
    w, v = np.linalg.eigh(0.5 * (chi + chi.conj().T))
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise ReconstructionError("process matrix has no positive part")
    w /= w.sum()
    return (v * w) @ v.conj().T


def ideal_chi(target: np.ndarray) -> np.ndarray:
    """Rank-one chi of a unitary, ``u_m = Tr(E_m U) / 2``."""
    target = np.asarray(target, dtype=np.complex128)
    if target.shape != (2, 2) or not is_unitary(target, 1e-8):
        raise ValueError("ideal_chi needs a 2x2 unitary")
    u = np.array([np.trace(e @ target) / 2.0 for e in PAULI_BASIS])
    return np.outer(u, u.conj())


def process_fidelity(chi_exp: np.ndarray, chi_0: np.ndarray) -> float:
    """``Re Tr(chi_exp chi_0)`` clamped to ``[0, 1 + 1e-9]``."""
    f = float(np.real(np.trace(np.asarray(chi_exp) @ np.asarray(chi_0))))
    return min(max(f, 0.0), 1.0 + 1e-9)


def corrected_fidelity(fidelity: float, fidelity_identity: float) -> float:
    if fidelity_identity == 0:
        raise ZeroDivisionError("identity fidelity is zero")
    return fidelity / fidelity_identity


# ---------------------------------------------------------------------------
# named gates


def hadamard_sequence(**kwargs) -> tuple[GateSpec, GateSpec]:
    """Pauli-Z followed by a y rotation by pi/2; equals the Hadamard up to phase."""
    return pauli_z(**kwargs), rotation_gate("y", math.pi / 2, **kwargs)


GATES = {
    "identity": (lambda **kw: (), I2),
    "pauli-x": (lambda **kw: (pauli_x(**kw),), SX),
    "pauli-y": (lambda **kw: (pauli_y(**kw),), SY),
    "pauli-z": (lambda **kw: (pauli_z(**kw),), SZ),
    "hadamard": (hadamard_sequence, HADAMARD),
}


@dataclass(frozen=True)
class QPTReport:
    gate: str
    chi_exp: np.ndarray
    chi_0: np.ndarray
    fidelity: float
    fidelity_identity: float
    corrected: float
    shots: int
    seed: int | None

    def to_dict(self) -> dict:
        def flat(m):
            return [[float(z.real), float(z.imag)] for z in np.asarray(m).reshape(-1)]

        return {
            "gate": self.gate,
            "chi_exp": flat(self.chi_exp),
            "chi_0": flat(self.chi_0),
            "F": self.fidelity,
            "F_ID": self.fidelity_identity,
            "F_corrected": self.corrected,
            "shots": self.shots,
            "seed": self.seed,
        }


def run_qpt(gate_name: str, noise: NoiseModel | None = None, shots: int = 0, seed: int | None = None,
            project_cp: bool = False, **spec_kwargs) -> QPTReport:
    """Tomography of a named gate and of the identity, with the corrected fidelity."""
    try:
        build, target = GATES[gate_name]
    except KeyError:
        raise ValueError(f"unknown gate {gate_name!r}; choose from {sorted(GATES)}") from None
    rng = np.random.default_rng(seed)
    pulses = build(**spec_kwargs)
    # the empty sequence is the identity operation
    chi_id = reconstruct_chi(simulate_qpt((), noise, shots, rng), project_cp)
    chi = reconstruct_chi(simulate_qpt(pulses, noise, shots, rng), project_cp)
    chi0 = ideal_chi(target)
    f = process_fidelity(chi, chi0)
    f_id = process_fidelity(chi_id, ideal_chi(I2))
    return QPTReport(gate_name, chi, chi0, f, f_id, corrected_fidelity(f, f_id), shots, seed)
