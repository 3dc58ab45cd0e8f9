"""Hamiltonians and propagators for the driven two-level system.

Hamiltonians are written as ``h . sigma`` with ``h`` in rad/us (hbar = 1).
For a drive of Rabi frequency ``Omega`` (MHz), phase ``phi`` and effective
detuning ``Delta_S`` (MHz) the rotating-frame coefficients are::

    hx = pi * Omega * cos(phi)
    hy = pi * Omega * sin(phi)
    hz = pi * Delta_S

Propagation uses the exponential midpoint rule: on each step the
Hamiltonian is frozen at the step midpoint and exponentiated in closed
form. Step grids are split at waveform segment boundaries so that every
step sees a smooth integrand, which keeps the scheme second order.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .operators import I2, SX, SY, SZ, check_state, rotation, rz
from .schedule import PulseSchedule, RectPulse, TWO_PI

DEFAULT_SUBSTEPS = 256


class PropagationError(ArithmeticError):
    """Non-finite Hamiltonian or an invalid integration interval."""


def _backend(name):
    return _kernels.backend if name is None else _kernels.select(name)


def pauli_coefficients(schedule, t, side: str = "right"):
    """Rotating-frame ``(hx, hy, hz)`` in rad/us at times ``t``."""
    amp, phase, det = schedule.played_fields(np.asarray(t, dtype=float), side)
    return math.pi * amp * np.cos(phase), math.pi * amp * np.sin(phase), math.pi * det


def _to_matrix(hx, hy, hz):
    return hx * SX + hy * SY + hz * SZ


def rotating_frame_hamiltonian(schedule, t: float) -> np.ndarray:
    """``H_S(t)`` as a 2x2 Hermitian matrix in rad/us."""
    hx, hy, hz = pauli_coefficients(schedule, float(t))
    return _to_matrix(float(hx), float(hy), float(hz))


def lab_frame_angle(schedule: PulseSchedule, t, carrier: float):
    """Accumulated phase ``omega_D(t) * t`` of the drive (rad) for a carrier in MHz."""
    t = np.asarray(t, dtype=float)
    return TWO_PI * (carrier * t - np.asarray(schedule.detuning_integral(t)))


def lab_pauli_coefficients(schedule: PulseSchedule, t, carrier: float):
    """Laboratory-frame coefficients for qubit splitting ``carrier`` (MHz).

    The drive is ``2 Omega cos(omega_D(t) t + phi(t))`` on the off-diagonal
    with ``omega_D(t) = omega_0 - 2 pi delta(t)``; no rotating-wave
    approximation is made.
    """
    t = np.asarray(t, dtype=float)
    amp, phase, _ = schedule.played_fields(t)
    hx = TWO_PI * amp * np.cos(lab_frame_angle(schedule, t, carrier) + phase)
    return hx, np.zeros_like(hx), np.full_like(hx, math.pi * carrier)


def lab_frame_hamiltonian(t: float, carrier: float, schedule: PulseSchedule) -> np.ndarray:
    hx, hy, hz = lab_pauli_coefficients(schedule, float(t), carrier)
    return _to_matrix(float(hx), float(hy), float(hz))


def lab_to_rotating(state, t: float, schedule: PulseSchedule, carrier: float) -> np.ndarray:
    """Unwind the drive frame: ``exp(i omega_D t sz / 2) psi_lab``."""
    theta = float(lab_frame_angle(schedule, t, carrier))
    return rz(-theta) @ np.asarray(state)


def _coefficients(source, t):
    if callable(source):
        hx, hy, hz = source(t)
    else:
        hx, hy, hz = pauli_coefficients(source, t)
    hx, hy, hz = (np.broadcast_to(np.asarray(v, dtype=float), np.shape(t)) for v in (hx, hy, hz))
    if not (np.all(np.isfinite(hx)) and np.all(np.isfinite(hy)) and np.all(np.isfinite(hz))):
        raise PropagationError("non-finite Hamiltonian entries")
    return hx, hy, hz


def propagate(source, t0: float, t1: float, substeps: int, backend: str | None = None) -> np.ndarray:
    """Propagator ``U(t1, t0)`` from ``substeps`` uniform midpoint steps.

    ``source`` is a schedule or a callable ``t -> (hx, hy, hz)``.
    """
    if not t1 > t0:
        raise PropagationError(f"need t0 < t1, got t0={t0}, t1={t1}")
    if substeps < 1:
        raise PropagationError(f"substeps must be >= 1, got {substeps}")
    dt = (t1 - t0) / substeps
    mid = t0 + (np.arange(substeps) + 0.5) * dt
    hx, hy, hz = _coefficients(source, mid)
    return _backend(backend).propagate(hx, hy, hz, np.full(substeps, dt))


def _grid(knots, boundaries, max_dt):
    """Midpoints, step sizes and per-interval step counts between ``knots``."""
    mids, dts, counts = [], [], []
    for a, b in zip(knots[:-1], knots[1:]):
        if b <= a:
            counts.append(0)
            continue
        cuts = [a] + [c for c in boundaries if a < c < b] + [b]
        n_total = 0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            n = max(1, int(math.ceil((hi - lo) / max_dt - 1e-9)))
            h = (hi - lo) / n
            mids.append(lo + (np.arange(n) + 0.5) * h)
            dts.append(np.full(n, h))
            n_total += n
        counts.append(n_total)
    if mids:
        return np.concatenate(mids), np.concatenate(dts), np.asarray(counts, dtype=np.int64)
    return np.empty(0), np.empty(0), np.asarray(counts, dtype=np.int64)


def _frame(schedule):
    angle = getattr(schedule, "frame_angle", 0.0)
    return rz(angle) if angle else None


def gate_unitary(schedule, substeps: int = DEFAULT_SUBSTEPS, backend: str | None = None) -> np.ndarray:
    """Full propagator of a schedule, ``substeps`` midpoint steps per segment.

    Rectangular pulses have a constant Hamiltonian and are exponentiated in
    one step.
    """
    if isinstance(schedule, RectPulse):
        u = I2.copy()
        if schedule.total_time > 0:
            hx, hy, hz = _coefficients(schedule, np.array([0.5 * schedule.total_time]))
            u = _backend(backend).propagate(hx, hy, hz, np.array([schedule.total_time]))
        frame = _frame(schedule)
        return u if frame is None else frame @ u
    bounds = np.asarray(schedule.segment_boundaries, dtype=float)
    mids = np.concatenate(
        [lo + (np.arange(substeps) + 0.5) * (hi - lo) / substeps for lo, hi in zip(bounds[:-1], bounds[1:])]
    )
    dts = np.concatenate([np.full(substeps, (hi - lo) / substeps) for lo, hi in zip(bounds[:-1], bounds[1:])])
    hx, hy, hz = _coefficients(schedule, mids)
    return _backend(backend).propagate(hx, hy, hz, dts)


def converged_gate_unitary(schedule, tol: float = 1e-9, start: int = DEFAULT_SUBSTEPS, max_substeps: int = 1 << 16,
                           backend: str | None = None) -> tuple[np.ndarray, int]:
    """Double the step count until successive propagators differ by less than ``tol``."""
    n = start
    u = gate_unitary(schedule, n, backend)
    while n < max_substeps:
        u2 = gate_unitary(schedule, 2 * n, backend)
        n *= 2
        if np.linalg.norm(u2 - u) < tol:
            return u2, n
        u = u2
    raise PropagationError(f"propagator not converged to {tol} with {n} substeps per segment")


def evolve_state(state, schedule, sample_times, max_step: float | None = None,
                 backend: str | None = None) -> np.ndarray:
    """States at ``sample_times`` starting from ``state`` at ``t = 0``.

    Returns an array of shape ``(len(sample_times), 2)``. ``max_step``
    defaults to ``tau / 256`` for gate schedules.
    """
    psi0 = check_state(state)
    times = np.asarray(sample_times, dtype=float)
    if times.size == 0:
        return np.empty((0, 2), dtype=np.complex128)
    if np.any(np.diff(times) < 0):
        raise ValueError("sample_times must be sorted")
    if times[0] < 0 or times[-1] > schedule.total_time * (1 + 1e-12):
        raise ValueError("sample_times outside the schedule")
    if max_step is None:
        bounds = np.asarray(schedule.segment_boundaries)
        max_step = float(np.min(np.diff(bounds))) / DEFAULT_SUBSTEPS
    knots = np.concatenate([[0.0], times])
    mids, dts, counts = _grid(knots, list(schedule.segment_boundaries), max_step)
    if mids.size == 0:
        return np.tile(psi0, (times.size, 1))
    hx, hy, hz = _coefficients(schedule, mids)
    states = _backend(backend).evolve(hx, hy, hz, dts, counts, psi0)
    states = states[1:]
    return states / np.linalg.norm(states, axis=1, keepdims=True)


def evolve_lab_frame(state, schedule: PulseSchedule, carrier: float, steps_per_period: int = 64,
                     backend: str | None = None) -> np.ndarray:
    """Final state after integrating the full lab-frame Hamiltonian (no RWA)."""
    psi0 = check_state(state)
    total = schedule.total_time
    n = int(math.ceil(total * carrier * steps_per_period))
    mids, dts, _ = _grid(np.array([0.0, total]), list(schedule.segment_boundaries), total / n)
    hx, hy, hz = lab_pauli_coefficients(schedule, mids, carrier)
    u = _backend(backend).propagate(hx, hy, hz, dts)
    return u @ psi0


# --------------------------------------------------------------------------
# dynamic (rectangular) gates
# --------------------------------------------------------------------------

_PULSE_PHASE = {"x": 0.0, "y": math.pi / 2, "xbar": math.pi, "ybar": 3 * math.pi / 2}


def dynamic_pulse(axis: str, angle: float, rabi: float | None = None) -> tuple[np.ndarray, RectPulse]:
    """Ideal rotation and the resonant rectangular pulse that produces it.

    A pulse of Rabi frequency ``rabi`` (MHz) rotates by ``2 pi rabi t``, so a
    pi pulse lasts ``1 / (2 rabi)``. Rotations about ``z``/``zbar`` are
    realised as zero-length phase-reference shifts.
    """
    if axis in ("z", "zbar"):
        signed = angle if axis == "z" else -angle
        return rz(signed), RectPulse(rabi=0.0, phase=0.0, duration=0.0, frame_angle=signed)
    if axis not in _PULSE_PHASE:
        raise ValueError(f"unsupported axis {axis!r}")
    if rabi is None or not rabi > 0:
        raise ValueError("physical pulses need a positive Rabi frequency")
    if angle < 0:
        raise ValueError("pulse angle must be non-negative; use the barred axis instead")
    duration = angle / (TWO_PI * rabi)
    return rotation(axis, angle), RectPulse(rabi=rabi, phase=_PULSE_PHASE[axis], duration=duration)
