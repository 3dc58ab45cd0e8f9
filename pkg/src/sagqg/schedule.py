"""Driving-field waveforms for superadiabatic geometric gates.

A gate is four segments of length ``tau``. On each segment the Rabi
envelope is a raised cosine (``1 - cos`` or ``1 + cos``) and the effective
detuning ``delta_S`` is a shifted cosine. The transitionless-driving
correction ``omega_C`` is the angular velocity of the polar angle of the
uncorrected field vector ``(omega_R, delta_S)``; the played field is the
vector sum ``omega_S = hypot(omega_R, omega_C)`` with phase
``phi_S = atan2(omega_C, omega_R)``.

Units: time in microseconds, every frequency in MHz as an *ordinary*
frequency. Conversion to angular units (``2 pi f``) happens only when a
Hamiltonian is assembled. The correction field is an angular velocity in
rad/us and is divided by ``2 pi`` so that it lives in the same MHz units.

The drive detuning ``delta`` actually programmed on the synthesiser solves
``delta + t * d(delta)/dt = delta_S``, i.e. ``delta(t) = (1/t) int_0^t
delta_S``. It is evaluated from the closed-form antiderivative.

Default parameters: ``omega_0 = 3.5`` MHz, ``delta_0 = 1`` MHz and
``tau = 0.8 / (2 omega_0)`` us (about 114.3 ns). The factor of ``2 pi``
that sometimes accompanies this expression is read as the ordinary-to-angular
conversion of ``omega_0``; taking it literally instead gives
``tau = 2 pi * 0.8 / (2 omega_0)`` (about 718 ns). Pass ``tau`` explicitly
to use that reading.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

TWO_PI = 2.0 * math.pi

DEFAULT_OMEGA_0 = 3.5
DEFAULT_DELTA_0 = 1.0
DEFAULT_TAU_FACTOR = 0.8

N_SEGMENTS = 4

# relative slack when testing t against [0, 4 tau]
_DOMAIN_SLACK = 1e-12


class InvalidSpecError(ValueError):
    """Gate parameters outside the physically meaningful range."""


class ScheduleDomainError(ValueError):
    """A waveform was evaluated outside ``[0, 4 tau]``."""


class GateFamily(enum.Enum):
    """Phase gates rotate about z; flip gates rotate about an equatorial axis."""

    PHASE = "phase"
    FLIP = "flip"


# Per-segment signs: omega_R = omega_0 (1 + a_k cos x), delta_S = delta_0 (cos x + b_k)
_RABI_SIGN = {
    GateFamily.PHASE: np.array([-1.0, 1.0, -1.0, 1.0]),
    GateFamily.FLIP: np.array([1.0, -1.0, 1.0, -1.0]),
}
_DETUNING_SHIFT = {
    GateFamily.PHASE: np.array([1.0, -1.0, 1.0, -1.0]),
    GateFamily.FLIP: np.array([-1.0, 1.0, -1.0, 1.0]),
}
# Which phase constant (0 -> phi_tilde_1, 1 -> phi_tilde_2) is active per segment
_PHASE_SLOT = {
    GateFamily.PHASE: np.array([0, 0, 1, 1]),
    GateFamily.FLIP: np.array([0, 1, 1, 0]),
}


def default_tau(omega_0: float = DEFAULT_OMEGA_0) -> float:
    """Segment length ``0.8 / (2 omega_0)`` in microseconds."""
    return DEFAULT_TAU_FACTOR / (2.0 * omega_0)


def wrap_angle(angle):
    """Map angles to the half-open interval (-pi, pi]."""
    wrapped = np.mod(-np.asarray(angle, dtype=float) + math.pi, TWO_PI)
    out = math.pi - wrapped
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GateSpec:
    """Parameters of one superadiabatic geometric gate.

    ``phi_tilde_1``/``phi_tilde_2`` are the piecewise-constant phase offsets
    of the drive and ``varphi`` a common offset that turns the rotation
    axis of a flip gate (``pi/2`` gives a y rotation). The geometric phase
    picked up by the first cyclic state is
    ``gamma = pi - (phi_tilde_2 - phi_tilde_1)``.
    """

    family: GateFamily = GateFamily.PHASE
    phi_tilde_1: float = 0.0
    phi_tilde_2: float = math.pi / 2
    varphi: float = 0.0
    omega_0: float = DEFAULT_OMEGA_0
    delta_0: float = DEFAULT_DELTA_0
    tau: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not isinstance(self.family, GateFamily):
            object.__setattr__(self, "family", GateFamily(self.family))
        if self.tau is None:
            object.__setattr__(self, "tau", default_tau(self.omega_0) if self.omega_0 > 0 else float("nan"))
        for name in ("phi_tilde_1", "phi_tilde_2", "varphi", "omega_0", "delta_0", "tau"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidSpecError(f"{name} must be finite, got {value!r}")
        if self.omega_0 <= 0:
            raise InvalidSpecError(f"omega_0 must be positive, got {self.omega_0}")
        if self.delta_0 < 0:
            raise InvalidSpecError(f"delta_0 must be non-negative, got {self.delta_0}")
        if self.tau <= 0:
            raise InvalidSpecError(f"tau must be positive, got {self.tau}")

    @property
    def gamma(self) -> float:
        """Geometric phase in [0, 2 pi)."""
        return float(np.mod(math.pi - (self.phi_tilde_2 - self.phi_tilde_1), TWO_PI))

    @property
    def total_time(self) -> float:
        return N_SEGMENTS * self.tau

    @classmethod
    def phase_gate(cls, gamma: float, **kwargs) -> "GateSpec":
        """Phase gate ``exp(i gamma sz)`` (``phi_tilde_1 = 0``)."""
        return cls(family=GateFamily.PHASE, phi_tilde_1=0.0, phi_tilde_2=math.pi - gamma, **kwargs)

    @classmethod
    def flip_gate(cls, gamma: float, axis_angle: float = 0.0, **kwargs) -> "GateSpec":
        """Flip gate ``exp(i gamma n.sigma)`` with ``n`` at azimuth ``axis_angle``."""
        return cls(
            family=GateFamily.FLIP,
            phi_tilde_1=0.0,
            phi_tilde_2=math.pi - gamma,
            varphi=axis_angle,
            **kwargs,
        )

    def with_gamma(self, gamma: float) -> "GateSpec":
        """Same gate with ``phi_tilde_2`` adjusted to realise ``gamma``."""
        return replace(self, phi_tilde_2=self.phi_tilde_1 + math.pi - gamma)


def pauli_z(**kwargs) -> GateSpec:
    return GateSpec.phase_gate(math.pi / 2, **kwargs)


def pauli_x(**kwargs) -> GateSpec:
    return GateSpec.flip_gate(math.pi / 2, axis_angle=0.0, **kwargs)


def pauli_y(**kwargs) -> GateSpec:
    return GateSpec.flip_gate(math.pi / 2, axis_angle=math.pi / 2, **kwargs)


_AXIS_AZIMUTH = {"x": 0.0, "y": math.pi / 2, "xbar": math.pi, "ybar": 3 * math.pi / 2}


def rotation_gate(axis: str, angle: float, **kwargs) -> GateSpec:
    """Gate equal to ``exp(-i angle/2 n.sigma)`` up to a global phase.

    ``axis`` is one of ``x, y, z, xbar, ybar, zbar``. The geometric gate
    implements ``exp(i gamma n.sigma)`` on its cyclic states, so
    ``gamma = -angle / 2``.
    """
    gamma = float(np.mod(-angle / 2.0, TWO_PI))
    if axis == "z":
        return GateSpec.phase_gate(gamma, **kwargs)
    if axis == "zbar":
        return GateSpec.phase_gate(float(np.mod(-gamma, TWO_PI)), **kwargs)
    try:
        azimuth = _AXIS_AZIMUTH[axis]
    except KeyError:
        raise ValueError(f"unsupported axis {axis!r}") from None
    return GateSpec.flip_gate(gamma, axis_angle=azimuth, **kwargs)


# --------------------------------------------------------------------------
# waveform evaluators
# --------------------------------------------------------------------------


def _segment_coords(t, spec: GateSpec, side: str = "right"):
    t_arr = np.asarray(t, dtype=float)
    tau = spec.tau
    lo = -_DOMAIN_SLACK * tau
    hi = spec.total_time * (1.0 + _DOMAIN_SLACK)
    if np.any(~np.isfinite(t_arr)) or np.any(t_arr < lo) or np.any(t_arr > hi):
        raise ScheduleDomainError(f"time outside [0, {spec.total_time:.6g}] us")
    t_arr = np.clip(t_arr, 0.0, spec.total_time)
    s = t_arr / tau
    # right-continuous at interior boundaries by default; the last segment is closed
    if side == "right":
        k = np.clip(np.floor(s + 1e-12), 0, N_SEGMENTS - 1).astype(np.int64)
    elif side == "left":
        k = np.clip(np.ceil(s - 1e-12) - 1, 0, N_SEGMENTS - 1).astype(np.int64)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    x = math.pi * (s - k)
    return t_arr, k, x


def _out(value, t):
    return float(value) if np.ndim(t) == 0 else value


def _envelopes(t, spec: GateSpec, side: str = "right"):
    """Return (omega_R, d omega_R/dt, delta_S, d delta_S/dt, k) arrays."""
    _, k, x = _segment_coords(t, spec, side)
    a = _RABI_SIGN[spec.family][k]
    b = _DETUNING_SHIFT[spec.family][k]
    rate = math.pi / spec.tau
    cx, sx = np.cos(x), np.sin(x)
    rabi = spec.omega_0 * (1.0 + a * cx)
    d_rabi = -spec.omega_0 * a * sx * rate
    det = spec.delta_0 * (cx + b)
    d_det = -spec.delta_0 * sx * rate
    return rabi, d_rabi, det, d_det, k


def rabi_envelope(t, spec: GateSpec):
    """Uncorrected Rabi frequency ``omega_R(t)`` in MHz."""
    return _out(_envelopes(t, spec)[0], t)


def superadiabatic_detuning(t, spec: GateSpec):
    """Effective detuning ``delta_S(t) = delta(t) + t d(delta)/dt`` in MHz."""
    return _out(_envelopes(t, spec)[2], t)


def correction_field(rabi, d_rabi, det, d_det):
    """Transitionless-driving field in MHz from envelopes and their time derivatives.

    ``(d_rabi * det - rabi * d_det) / (rabi**2 + det**2)`` is the angular
    velocity of the field's polar angle in rad/us; dividing by ``2 pi``
    expresses it as an ordinary frequency.
    """
    rabi, d_rabi, det, d_det = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (rabi, d_rabi, det, d_det))
    )
    denom = rabi * rabi + det * det
    if np.any(denom == 0.0):
        raise InvalidSpecError("omega_R and delta_S vanish simultaneously; correction field undefined")
    return (d_rabi * det - rabi * d_det) / denom / TWO_PI


def corrected_rabi(t, spec: GateSpec):
    """Correction field ``omega_C(t)`` in MHz."""
    rabi, d_rabi, det, d_det, _ = _envelopes(t, spec)
    return _out(correction_field(rabi, d_rabi, det, d_det), t)


def superadiabatic_rabi(t, spec: GateSpec):
    """Played Rabi frequency ``omega_S = hypot(omega_R, omega_C)`` in MHz."""
    rabi, d_rabi, det, d_det, _ = _envelopes(t, spec)
    return _out(np.hypot(rabi, correction_field(rabi, d_rabi, det, d_det)), t)


def superadiabatic_phase(t, spec: GateSpec):
    """``phi_S = atan2(omega_C, omega_R)``; zero where both vanish."""
    rabi, d_rabi, det, d_det, _ = _envelopes(t, spec)
    corr = correction_field(rabi, d_rabi, det, d_det)
    # np.arctan2(0, 0) is already 0
    return _out(np.arctan2(corr, rabi), t)


def phase_program(t, spec: GateSpec):
    """Total drive phase ``varphi + phi_tilde(t) + phi_S(t)`` in radians."""
    _, k, _ = _segment_coords(t, spec)
    offsets = np.array([spec.phi_tilde_1, spec.phi_tilde_2])[_PHASE_SLOT[spec.family][k]]
    return _out(spec.varphi + offsets + np.asarray(superadiabatic_phase(t, spec)), t)


def detuning_integral(t, spec: GateSpec):
    """``int_0^t delta_S(s) ds`` in MHz*us, from the closed-form antiderivative."""
    t_arr, k, x = _segment_coords(t, spec)
    tau = spec.tau
    b = _DETUNING_SHIFT[spec.family]
    # each full segment contributes delta_0 * b_j * tau (the cosine integrates to zero)
    completed = np.concatenate([[0.0], np.cumsum(b * tau)])[k]
    partial = (tau / math.pi) * np.sin(x) + b[k] * (t_arr - k * tau)
    return _out(spec.delta_0 * (completed + partial), t)


def drive_detuning(t, spec: GateSpec):
    """Programmed drive detuning ``delta(t) = (1/t) int_0^t delta_S`` in MHz.

    At ``t = 0`` the removable singularity is replaced by its limit
    ``delta_S(0)``.
    """
    t_arr = np.asarray(t, dtype=float)
    integral = np.asarray(detuning_integral(t_arr, spec))
    at_zero = t_arr == 0.0
    safe_t = np.where(at_zero, 1.0, t_arr)
    value = np.where(at_zero, np.asarray(superadiabatic_detuning(np.where(at_zero, 0.0, t_arr), spec)), integral / safe_t)
    return _out(value, t)


# --------------------------------------------------------------------------
# schedules
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PulseSchedule:
    """Time-dependent drive of one gate, optionally distorted.

    The nominal evaluators (``omega_R``, ``omega_C``, ``delta_S``, ...) follow
    the gate design. The distortions model an imperfect drive:

    * ``detuning_offset`` -- constant offset in MHz added to ``delta`` (and
      therefore to ``delta_S``),
    * ``amplitude_scale`` -- multiplicative Rabi miscalibration,
    * ``rabi_clip`` -- hard cap on the played Rabi frequency in MHz,
    * ``time_scale`` -- the waveform is played stretched by this factor.

    ``played_fields`` returns what the qubit actually sees.
    """

    spec: GateSpec
    detuning_offset: float = 0.0
    amplitude_scale: float = 1.0
    rabi_clip: float | None = None
    time_scale: float = 1.0

    @property
    def total_time(self) -> float:
        return self.spec.total_time * self.time_scale

    @property
    def segment_boundaries(self) -> np.ndarray:
        return np.arange(N_SEGMENTS + 1) * self.spec.tau * self.time_scale

    @property
    def is_nominal(self) -> bool:
        return (
            self.detuning_offset == 0.0
            and self.amplitude_scale == 1.0
            and self.rabi_clip is None
            and self.time_scale == 1.0
        )

    def _design_time(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < -_DOMAIN_SLACK * self.total_time) or np.any(
            t_arr > self.total_time * (1.0 + _DOMAIN_SLACK)
        ):
            raise ScheduleDomainError(f"time outside [0, {self.total_time:.6g}] us")
        return np.clip(t_arr / self.time_scale, 0.0, self.spec.total_time)

    def omega_R(self, t):
        return _out(rabi_envelope(self._design_time(t), self.spec), t)

    def omega_C(self, t):
        return _out(corrected_rabi(self._design_time(t), self.spec), t)

    def omega_S(self, t):
        """Played Rabi frequency, including clipping and amplitude error."""
        value = np.asarray(superadiabatic_rabi(self._design_time(t), self.spec))
        if self.rabi_clip is not None:
            value = np.minimum(value, self.rabi_clip)
        return _out(self.amplitude_scale * value, t)

    def delta_S(self, t):
        return _out(np.asarray(superadiabatic_detuning(self._design_time(t), self.spec)) + self.detuning_offset, t)

    def delta(self, t):
        return _out(np.asarray(drive_detuning(self._design_time(t), self.spec)) + self.detuning_offset, t)

    def phi_S(self, t):
        return _out(superadiabatic_phase(self._design_time(t), self.spec), t)

    def phase(self, t):
        return _out(phase_program(self._design_time(t), self.spec), t)

    def detuning_integral(self, t):
        """``int_0^t delta_S``, the accumulated frame angle divided by ``2 pi``."""
        t_arr = np.asarray(t, dtype=float)
        design = np.asarray(detuning_integral(self._design_time(t_arr), self.spec))
        return _out(self.time_scale * design + self.detuning_offset * t_arr, t)

    def played_fields(self, t, side: str = "right"):
        """Return ``(omega_S, phase, delta_S)`` arrays as played on the qubit.

        ``side="left"`` takes left limits at segment boundaries.
        """
        u = self._design_time(t)
        rabi, d_rabi, det, d_det, k = _envelopes(u, self.spec, side)
        corr = correction_field(rabi, d_rabi, det, d_det)
        amp = np.hypot(rabi, corr)
        if self.rabi_clip is not None:
            amp = np.minimum(amp, self.rabi_clip)
        amp = self.amplitude_scale * amp
        offsets = np.array([self.spec.phi_tilde_1, self.spec.phi_tilde_2])[_PHASE_SLOT[self.spec.family][k]]
        phase = self.spec.varphi + offsets + np.arctan2(corr, rabi)
        return amp, phase, det + self.detuning_offset

    def with_distortion(self, **changes) -> "PulseSchedule":
        return replace(self, **changes)


@dataclass(frozen=True)
class RectPulse:
    """Resonant rectangular pulse, or a zero-length virtual z rotation.

    A physical pulse drives at ``rabi`` MHz with phase ``phase`` for
    ``duration`` us. ``frame_angle`` is a z rotation applied by shifting
    the phase reference of all later pulses; it takes no time and is not
    affected by drive errors.
    """

    rabi: float
    phase: float
    duration: float
    frame_angle: float = 0.0
    detuning_offset: float = 0.0
    amplitude_scale: float = 1.0
    rabi_clip: float | None = None
    time_scale: float = 1.0

    @property
    def total_time(self) -> float:
        return self.duration * self.time_scale

    @property
    def segment_boundaries(self) -> np.ndarray:
        return np.array([0.0, self.total_time])

    def played_fields(self, t, side: str = "right"):
        t_arr = np.asarray(t, dtype=float)
        amp = self.rabi if self.rabi_clip is None else min(self.rabi, self.rabi_clip)
        amp = np.full(t_arr.shape, self.amplitude_scale * amp)
        return amp, np.full(t_arr.shape, self.phase), np.full(t_arr.shape, self.detuning_offset)

    def with_distortion(self, **changes) -> "RectPulse":
        return replace(self, **changes)


def build_schedule(spec: GateSpec) -> PulseSchedule:
    """Bundle the waveform evaluators of ``spec`` into an undistorted schedule."""
    if not isinstance(spec, GateSpec):
        raise InvalidSpecError(f"expected GateSpec, got {type(spec).__name__}")
    # touch the correction field once so degenerate specs fail here, not mid-propagation
    corrected_rabi(segment_grid(spec.tau, 8), spec)
    return PulseSchedule(spec)


def segment_grid(tau: float, points_per_segment: int) -> np.ndarray:
    """Closed grid on each of the four segments (shared endpoints appear once)."""
    base = np.linspace(0.0, 1.0, points_per_segment)
    grid = np.concatenate([k + base[:-1] for k in range(N_SEGMENTS)] + [[float(N_SEGMENTS)]])
    return grid * tau


def max_superadiabatic_rabi(spec: GateSpec, tau: float | None = None, points_per_segment: int = 4096) -> float:
    """Peak of ``omega_S`` over a dense grid, optionally at another ``tau``."""
    if tau is not None:
        if not tau > 0:
            raise InvalidSpecError(f"tau must be positive, got {tau}")
        spec = replace(spec, tau=tau)
    grid = segment_grid(spec.tau, points_per_segment)
    return float(np.max(superadiabatic_rabi(grid, spec)))


def schedule_table(schedule: PulseSchedule, points_per_segment: int = 64) -> dict[str, np.ndarray]:
    """Sampled waveforms keyed by the column names of the schedule CSV."""
    t = segment_grid(schedule.spec.tau, points_per_segment) * schedule.time_scale
    return {
        "t_us": t,
        "omega_R_MHz": np.asarray(schedule.omega_R(t)),
        "omega_C_MHz": np.asarray(schedule.omega_C(t)),
        "omega_S_MHz": np.asarray(schedule.omega_S(t)),
        "delta_S_MHz": np.asarray(schedule.delta_S(t)),
        "delta_MHz": np.asarray(schedule.delta(t)),
        "phase_rad": np.asarray(schedule.phase(t)),
    }
