"""Bloch trajectories, enclosed solid angles and phase bookkeeping.

For a cyclic state the total phase ``arg <lambda|U(T)|lambda>`` splits into
a dynamic part ``-int <psi|H|psi> dt`` and a geometric remainder. For a
spin-1/2 the geometric remainder is half the solid angle swept by the
Bloch vector, with the orientation convention used by :func:`solid_angle`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import DEFAULT_SUBSTEPS, evolve_state, pauli_coefficients
from .operators import KET_0, check_state, rotation
from .schedule import GateFamily, GateSpec, PulseSchedule, build_schedule, segment_grid, wrap_angle


class OpenTrajectoryError(ValueError):
    """Solid angle requested for a trajectory that does not close."""


class CyclicityError(ValueError):
    """The evolution does not return a cyclic state to itself."""


class QuadratureError(ArithmeticError):
    """Trajectory too sparse for the requested quadrature accuracy."""


@dataclass(frozen=True)
class BlochSample:
    t: float
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class PhaseDecomposition:
    """Phases (rad) acquired by one cyclic state over a full gate."""

    total: float
    dynamic: float
    geometric: float
    overlap: float


def bloch_vector(state) -> np.ndarray:
    """``(<sx>, <sy>, <sz>)`` of a normalised state."""
    a, b = check_state(state, atol=1e-8)
    ab = np.conj(a) * b
    return np.array([2 * ab.real, 2 * ab.imag, abs(a) ** 2 - abs(b) ** 2])


def bloch_vectors(states) -> np.ndarray:
    """Vectorised :func:`bloch_vector` for an ``(n, 2)`` array of states."""
    states = np.asarray(states, dtype=np.complex128).reshape(-1, 2)
    norms = np.linalg.norm(states, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise ValueError("unnormalised state in trajectory")
    ab = np.conj(states[:, 0]) * states[:, 1]
    z = np.abs(states[:, 0]) ** 2 - np.abs(states[:, 1]) ** 2
    return np.column_stack([2 * ab.real, 2 * ab.imag, z])


def bloch_samples(times, states) -> list[BlochSample]:
    vecs = bloch_vectors(states)
    return [BlochSample(float(t), *map(float, v)) for t, v in zip(times, vecs)]


_REFERENCE_CANDIDATES = np.array(
    [[0, 0, 1], [1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0], [0, 0, -1]]
    + [[sx, sy, sz] for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)],
    dtype=float,
)
_REFERENCE_CANDIDATES /= np.linalg.norm(_REFERENCE_CANDIDATES, axis=1, keepdims=True)


def _reference_point(points):
    # Triangles (r, p_i, p_j) degenerate when p_i is near -r, so keep -r away from the path.
    margins = (1.0 + points @ _REFERENCE_CANDIDATES.T).min(axis=0)
    if margins[0] > 0.1:
        return _REFERENCE_CANDIDATES[0]
    return _REFERENCE_CANDIDATES[int(np.argmax(margins))]


def solid_angle(trajectory, closure_tol: float = 1e-3) -> float:
    """Signed solid angle (sr) enclosed by a closed Bloch-sphere path.

    ``trajectory`` is an ``(n, 3)`` array of Bloch vectors or a sequence of
    :class:`BlochSample`. The path is closed by the geodesic from the last
    point back to the first and decomposed into spherical triangles that
    share a reference vertex (the north pole unless the path comes close to
    the south pole). The sign is positive for loops traversed clockwise
    when viewed from outside the sphere, so that the geometric phase of the
    travelling state is ``+solid_angle / 2``. The result is reduced to
    ``(-2 pi, 2 pi]`` (areas are only defined modulo ``4 pi``).
    """
    if len(trajectory) and isinstance(trajectory[0], BlochSample):
        pts = np.array([[s.x, s.y, s.z] for s in trajectory], dtype=float)
    else:
        pts = np.asarray(trajectory, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("empty trajectory")
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    if np.linalg.norm(pts[0] - pts[-1]) > closure_tol:
        raise OpenTrajectoryError(
            f"trajectory is not closed (endpoint gap {np.linalg.norm(pts[0] - pts[-1]):.3g})"
        )
    r = _reference_point(pts)
    a = pts
    b = np.roll(pts, -1, axis=0)
    num = np.einsum("j,ij->i", r, np.cross(a, b))
    den = 1.0 + a @ r + np.einsum("ij,ij->i", a, b) + b @ r
    area = -2.0 * np.sum(np.arctan2(num, den))
    # reduce to (-2 pi, 2 pi]
    return float(2.0 * math.pi - np.mod(2.0 * math.pi - area, 4.0 * math.pi))


def cyclic_states(spec: GateSpec) -> tuple[np.ndarray, np.ndarray]:
    """Eigenstates of the uncorrected Hamiltonian at ``t = 0``.

    The first state is aligned with the field (higher energy) and acquires
    ``+gamma``; the second is anti-aligned and acquires ``-gamma``.
    """
    if spec.family is GateFamily.PHASE:
        up = np.array([1, 0], dtype=np.complex128)
        down = np.array([0, 1], dtype=np.complex128)
        if spec.delta_0 == 0:
            raise CyclicityError("delta_0 = 0 leaves the initial field undefined")
        return up, down
    phi = spec.varphi + spec.phi_tilde_1
    e = np.exp(1j * phi)
    s = 1.0 / math.sqrt(2.0)
    return np.array([s, s * e]), np.array([s, -s * e])


def expectation_energy(schedule, times, states, side: str = "right") -> np.ndarray:
    """``<psi(t)|H(t)|psi(t)>`` in rad/us along a trajectory."""
    hx, hy, hz = pauli_coefficients(schedule, times, side)
    return np.einsum("ij,ij->i", bloch_vectors(states), np.column_stack([hx, hy, hz]))


def _trapezoid(times, f_right, f_left):
    return float(np.sum(0.5 * (f_right[:-1] + f_left[1:]) * np.diff(times)))


def dynamic_phase(schedule, times, states, tol: float = 1e-4) -> float:
    """``-int <psi|H|psi> dt`` by the trapezoidal rule.

    Interior nodes that fall on segment boundaries use one-sided values of
    the Hamiltonian, so the jump in ``delta_S`` is integrated exactly. The
    error is estimated by step halving; :class:`QuadratureError` is raised
    when it exceeds ``tol``.
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states)
    if len(times) < 2:
        return 0.0
    f_right = expectation_energy(schedule, times, states, "right")
    f_left = expectation_energy(schedule, times, states, "left")
    fine = -_trapezoid(times, f_right, f_left)
    idx = np.arange(0, len(times), 2)
    if idx[-1] != len(times) - 1:
        idx = np.append(idx, len(times) - 1)
    if len(idx) >= 2 and len(idx) < len(times):
        coarse = -_trapezoid(times[idx], f_right[idx], f_left[idx])
        if abs(fine - coarse) / 3.0 > tol:
            raise QuadratureError(
                f"dynamic phase not converged: estimated error {abs(fine - coarse) / 3.0:.2e} rad > {tol:.0e}"
            )
    return fine


def gate_trajectory(schedule, state=KET_0, points_per_segment: int = 1025, max_step: float | None = None):
    """``(times, states)`` on a uniform per-segment grid that includes the boundaries."""
    tau = np.min(np.diff(np.asarray(schedule.segment_boundaries)))
    times = segment_grid(tau, points_per_segment) if len(schedule.segment_boundaries) == 5 else np.linspace(
        0.0, schedule.total_time, points_per_segment
    )
    times = np.clip(times, 0.0, schedule.total_time)
    return times, evolve_state(state, schedule, times, max_step=max_step)


def extract_geometric_phase(spec: GateSpec, schedule: PulseSchedule | None = None,
                            points_per_segment: int = 1025,
                            substeps: int = DEFAULT_SUBSTEPS) -> tuple[PhaseDecomposition, PhaseDecomposition]:
    """Total, dynamic and geometric phase of both cyclic states of ``spec``.

    ``schedule`` overrides the drive (e.g. a distorted one); the cyclic
    states still come from ``spec``.
    """
    schedule = build_schedule(spec) if schedule is None else schedule
    max_step = schedule.spec.tau * schedule.time_scale / substeps
    out = []
    for lam in cyclic_states(spec):
        times, states = gate_trajectory(schedule, lam, points_per_segment, max_step)
        # the trajectory starts at t = 0 exactly
        overlap = np.vdot(lam, states[-1])
        if abs(overlap) < 0.999:
            raise CyclicityError(f"cyclic state not restored: |overlap| = {abs(overlap):.4f}")
        total = float(np.angle(overlap))
        dyn = dynamic_phase(schedule, times, states)
        out.append(PhaseDecomposition(total, dyn, wrap_angle(total - dyn), float(abs(overlap))))
    return out[0], out[1]


def trajectory_solid_angle(schedule, state, points_per_segment: int = 1025) -> float:
    _, states = gate_trajectory(schedule, state, points_per_segment)
    return solid_angle(bloch_vectors(states))


# readout pulses applied before measuring the |0> population
X_READOUT = rotation("x", math.pi / 2)
Y_READOUT = rotation("y", math.pi / 2)


def stroboscopic_readout(times, states) -> np.ndarray:
    """Rows ``(t, P0 after (pi/2)_x, P0 after (pi/2)_y, P0 direct)``.

    With ``R(theta) = exp(-i theta/2 n.sigma)`` the ``(pi/2)_x`` readout maps
    ``+y`` to ``|0>`` and ``(pi/2)_y`` maps ``+x`` to ``|1>``; see
    :func:`reconstruct_bloch`.
    """
    states = np.asarray(states, dtype=np.complex128).reshape(-1, 2)
    p_x = np.abs(states @ X_READOUT.T[:, 0]) ** 2
    p_y = np.abs(states @ Y_READOUT.T[:, 0]) ** 2
    p_d = np.abs(states[:, 0]) ** 2
    return np.column_stack([np.asarray(times, dtype=float), p_x, p_y, p_d])


def reconstruct_bloch(readout) -> np.ndarray:
    """Bloch vectors ``(x, y, z)`` from :func:`stroboscopic_readout` rows."""
    readout = np.asarray(readout, dtype=float).reshape(-1, 4)
    p_x, p_y, p_d = readout[:, 1], readout[:, 2], readout[:, 3]
    return np.column_stack([1.0 - 2.0 * p_y, 2.0 * p_x - 1.0, 2.0 * p_d - 1.0])
