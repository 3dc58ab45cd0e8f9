"""Parameter sweeps behind the figures: feasibility maps, robustness curves,
phase sweeps and stroboscopic trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import bloch_vectors, reconstruct_bloch, stroboscopic_readout
from .dynamics import evolve_state, gate_unitary
from .operators import KET_0, SX, check_state, rotation
from .schedule import (
    GateFamily,
    GateSpec,
    TWO_PI,
    build_schedule,
    corrected_rabi,
    rabi_envelope,
    segment_grid,
)
from .tomography import ideal_chi, process_fidelity, reconstruct_chi, simulate_qpt

OMEGA_MAX = 7.0
PARAMETER_SETS = {"A": (1.5, 1.5), "B": (1.5, 6.0), "C": (2.0, 8.0)}


def pi_pulse_time(omega_max: float = OMEGA_MAX) -> float:
    """``1 / (2 omega_max)`` in us."""
    return 1.0 / (2.0 * omega_max)


# ---------------------------------------------------------------------------
# minimal segment length


class _RabiProfile:
    """``omega_S`` at any ``tau`` from one evaluation at ``tau = 1``.

    Time derivatives scale as ``1/tau``, so on the normalised grid
    ``omega_S(tau) = sqrt(R^2 + (C1 / tau)^2)`` with ``R`` and ``C1`` fixed.
    """

    def __init__(self, omega_0, delta_0, family=GateFamily.FLIP, points_per_segment=4096):
        spec = GateSpec(family=family, omega_0=omega_0, delta_0=delta_0, tau=1.0)
        grid = segment_grid(1.0, points_per_segment)
        self.r2 = np.asarray(rabi_envelope(grid, spec)) ** 2
        self.c2 = np.asarray(corrected_rabi(grid, spec)) ** 2
        self.peak_rabi = float(np.sqrt(self.r2.max()))

    def max_rabi(self, tau):
        return float(np.sqrt(np.max(self.r2 + self.c2 / (tau * tau))))


def tau_min(omega_0: float, delta_0: float, omega_max: float = OMEGA_MAX, family=GateFamily.FLIP,
            points_per_segment: int = 4096, rtol: float = 1e-4) -> float:
    """Smallest ``tau`` (us) with ``max_t omega_S <= omega_max``; ``inf`` if none exists.

    Bisection on the monotone map ``tau -> max omega_S``. Every evaluation
    is checked against monotonicity and a grid scan takes over if it fails.
    """
    if not omega_max > 0:
        raise ValueError("omega_max must be positive")
    profile = _RabiProfile(omega_0, delta_0, family, points_per_segment)
    if profile.peak_rabi > omega_max:
        return math.inf
    seen = []

    def feasible(tau):
        value = profile.max_rabi(tau)
        seen.append((tau, value))
        return value <= omega_max

    hi = pi_pulse_time(omega_max)
    while not feasible(hi):
        hi *= 2.0
        if hi > 1e6:
            return math.inf
    lo = hi / 2.0
    while feasible(lo):
        hi, lo = lo, lo / 2.0
        if lo < 1e-12:
            return 0.0
    while (hi - lo) > rtol * hi:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    seen.sort()
    values = np.array([v for _, v in seen])
    if np.any(np.diff(values) > 1e-12 * values[:-1]):
        return _tau_min_scan(profile, omega_max, seen[0][0], seen[-1][0], rtol)
    return hi


def _tau_min_scan(profile, omega_max, lo, hi, rtol):
    taus = np.geomspace(lo, hi, int(math.log(hi / lo) / rtol) + 2)
    ok = [t for t in taus if profile.max_rabi(t) <= omega_max]
    return float(ok[0]) if ok else math.inf


def tau_min_closed_form(omega_0: float, delta_0: float, omega_max: float = OMEGA_MAX,
                        family=GateFamily.FLIP, points_per_segment: int = 4096) -> float:
    """``max C1 / sqrt(omega_max^2 - R^2)`` on the grid; independent of the bisection."""
    profile = _RabiProfile(omega_0, delta_0, family, points_per_segment)
    if profile.peak_rabi > omega_max:
        return math.inf
    room = omega_max**2 - profile.r2
    # C1 vanishes analytically at the Rabi peak; ignore round-off there
    mask = profile.c2 > 1e-24 * profile.c2.max()
    if not np.any(mask):
        return 0.0
    if np.any(room[mask] <= 0):
        return math.inf
    return float(np.sqrt(np.max(profile.c2[mask] / room[mask])))


@dataclass(frozen=True)
class SweepGrid:
    omega0_range: tuple[float, float] = (0.5, 3.5)
    delta0_range: tuple[float, float] = (0.5, 8.0)
    resolution: tuple[int, int] = (64, 64)
    omega_max: float = OMEGA_MAX

    def __post_init__(self):
        res = self.resolution
        if isinstance(res, int):
            res = (res, res)
        object.__setattr__(self, "resolution", tuple(int(v) for v in res))
        for name in ("omega0_range", "delta0_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and 0 < lo <= hi):
                raise ValueError(f"{name} must be a positive finite interval, got {(lo, hi)}")
        if min(self.resolution) < 1:
            raise ValueError("resolution must be >= 1 per axis")
        if not self.omega_max > 0:
            raise ValueError("omega_max must be positive")

    @property
    def omega0_values(self) -> np.ndarray:
        return np.linspace(*self.omega0_range, self.resolution[0])

    @property
    def delta0_values(self) -> np.ndarray:
        return np.linspace(*self.delta0_range, self.resolution[1])


@dataclass(frozen=True)
class TauMinMap:
    omega0: np.ndarray
    delta0: np.ndarray
    tau_min: np.ndarray  # [omega0 index, delta0 index], us
    omega_max: float

    def argmin(self) -> tuple[float, float, float]:
        i, j = np.unravel_index(np.argmin(self.tau_min), self.tau_min.shape)
        return float(self.omega0[i]), float(self.delta0[j]), float(self.tau_min[i, j])

    def rows(self):
        for i, w in enumerate(self.omega0):
            for j, d in enumerate(self.delta0):
                yield float(w), float(d), float(self.tau_min[i, j])


def tau_min_map(grid: SweepGrid | None = None, family=GateFamily.FLIP, points_per_segment: int = 4096) -> TauMinMap:
    grid = SweepGrid() if grid is None else grid
    w, d = grid.omega0_values, grid.delta0_values
    out = np.empty((len(w), len(d)))
    for i, omega_0 in enumerate(w):
        for j, delta_0 in enumerate(d):
            out[i, j] = tau_min(omega_0, delta_0, grid.omega_max, family, points_per_segment)
    return TauMinMap(w, d, out, grid.omega_max)


# ---------------------------------------------------------------------------
# robustness against a Rabi-frequency cap


@dataclass(frozen=True)
class FidelityCurve:
    tau: np.ndarray
    fidelity: np.ndarray
    tau_min: float
    t_pi: float
    omega_0: float
    delta_0: float
    omega_max: float


def default_tau_values(omega_0, delta_0, omega_max=OMEGA_MAX, n=41):
    """From ``0.5 t_pi`` to ``1.5 t_pi``, stretched to include ``1.2 tau_min``."""
    t_pi = pi_pulse_time(omega_max)
    upper = 1.5 * t_pi
    t_min = tau_min(omega_0, delta_0, omega_max)
    if math.isfinite(t_min):
        upper = max(upper, 1.2 * t_min)
    return np.linspace(0.5 * t_pi, upper, n)


def fidelity_vs_tau(param_set, tau_values=None, omega_max: float = OMEGA_MAX, substeps: int = 256) -> FidelityCurve:
    """Noiseless QPT fidelity of a Pauli-X gate whose ``omega_S`` is capped at ``omega_max``.

    ``param_set`` is ``(omega_0, delta_0)`` or one of the keys of
    :data:`PARAMETER_SETS`.
    """
    if isinstance(param_set, str):
        param_set = PARAMETER_SETS[param_set]
    omega_0, delta_0 = map(float, param_set)
    taus = default_tau_values(omega_0, delta_0, omega_max) if tau_values is None else np.asarray(tau_values, float)
    chi0 = ideal_chi(SX)
    fid = np.empty(len(taus))
    for k, tau in enumerate(taus):
        spec = GateSpec.flip_gate(math.pi / 2, 0.0, omega_0=omega_0, delta_0=delta_0, tau=float(tau))
        schedule = build_schedule(spec).with_distortion(rabi_clip=omega_max)
        chi = reconstruct_chi(simulate_qpt(schedule, substeps=substeps))
        fid[k] = process_fidelity(chi, chi0)
    return FidelityCurve(taus, fid, tau_min(omega_0, delta_0, omega_max), pi_pulse_time(omega_max), omega_0, delta_0,
                         omega_max)


# ---------------------------------------------------------------------------
# phase sweeps

_S = 1.0 / math.sqrt(2.0)
DEFAULT_SWEEP_STATES = (
    np.array([1, 0], dtype=np.complex128),
    np.array([_S, _S], dtype=np.complex128),
    np.array([_S, -_S], dtype=np.complex128),
    np.array([_S, 1j * _S], dtype=np.complex128),
)
SWEEP_READOUT = rotation("ybar", math.pi / 2)


@dataclass(frozen=True)
class GammaSweep:
    gamma: np.ndarray
    p0: np.ndarray  # [state, gamma]
    final_states: np.ndarray  # [state, gamma, 2], before the readout pulse
    family: GateFamily

    def rows(self):
        for k, g in enumerate(self.gamma):
            for s in range(self.p0.shape[0]):
                yield float(g), s, float(self.p0[s, k])


def default_gamma_values(n: int = 33) -> np.ndarray:
    return np.linspace(0.0, TWO_PI, n + 2)[1:-1]


def gamma_sweep(initial_states=None, gamma_values=None, gate_family=GateFamily.PHASE, axis_angle: float = 0.0,
                substeps: int = 256, **spec_kwargs) -> GammaSweep:
    """``|0>`` population after the gate and a ``(pi/2)`` pulse about ``-y``."""
    family = GateFamily(gate_family)
    states = DEFAULT_SWEEP_STATES if initial_states is None else [check_state(s) for s in initial_states]
    gammas = default_gamma_values() if gamma_values is None else np.asarray(gamma_values, dtype=float)
    if np.any(gammas <= 0) or np.any(gammas >= TWO_PI):
        raise ValueError("gamma values must lie in (0, 2 pi)")
    psi0 = np.stack(states)
    final = np.empty((len(states), len(gammas), 2), dtype=np.complex128)
    for k, g in enumerate(gammas):
        if family is GateFamily.PHASE:
            spec = GateSpec.phase_gate(float(g), **spec_kwargs)
        else:
            spec = GateSpec.flip_gate(float(g), axis_angle, **spec_kwargs)
        u = gate_unitary(build_schedule(spec), substeps)
        final[:, k] = psi0 @ u.T
    p0 = np.abs(final @ SWEEP_READOUT[0]) ** 2
    return GammaSweep(gammas, p0, final, family)


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    bloch: np.ndarray
    readout: np.ndarray  # rows (t, p0 x-readout, p0 y-readout, p0 direct)
    reconstructed: np.ndarray

    def bloch_table(self) -> dict[str, np.ndarray]:
        return {
            "t_us": self.times,
            "x": self.bloch[:, 0],
            "y": self.bloch[:, 1],
            "z": self.bloch[:, 2],
            "p0_x_readout": self.readout[:, 1],
            "p0_y_readout": self.readout[:, 2],
            "p0_direct": self.readout[:, 3],
            "x_readout": self.reconstructed[:, 0],
            "y_readout": self.reconstructed[:, 1],
            "z_readout": self.reconstructed[:, 2],
        }

    def state_table(self) -> dict[str, np.ndarray]:
        return {
            "t_us": self.times,
            "re0": self.states[:, 0].real,
            "im0": self.states[:, 0].imag,
            "re1": self.states[:, 1].real,
            "im1": self.states[:, 1].imag,
        }


def trajectory_experiment(gate, n_samples: int = 201, initial_state=KET_0, max_step: float | None = None) -> Trajectory:
    """Uniformly sampled evolution of ``initial_state`` under a gate spec or schedule."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    schedule = build_schedule(gate) if isinstance(gate, GateSpec) else gate
    times = np.linspace(0.0, schedule.total_time, n_samples)
    states = evolve_state(initial_state, schedule, times, max_step=max_step)
    readout = stroboscopic_readout(times, states)
    return Trajectory(times, states, bloch_vectors(states), readout, reconstruct_bloch(readout))
