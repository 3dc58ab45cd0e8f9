import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sagqg.analysis import (
    BlochSample,
    CyclicityError,
    OpenTrajectoryError,
    QuadratureError,
    bloch_samples,
    bloch_vector,
    bloch_vectors,
    cyclic_states,
    dynamic_phase,
    extract_geometric_phase,
    gate_trajectory,
    reconstruct_bloch,
    solid_angle,
    stroboscopic_readout,
    trajectory_solid_angle,
)
from sagqg.operators import KET_0, KET_1, SX, SZ, haar_unitary
from sagqg.schedule import GateFamily, GateSpec, RectPulse, build_schedule, pauli_x, pauli_y, pauli_z

S = 1 / math.sqrt(2)


def circle(theta, n=2001):
    p = np.linspace(0, 2 * np.pi, n)
    return np.column_stack([np.sin(theta) * np.cos(p), np.sin(theta) * np.sin(p), np.full(n, np.cos(theta))])


def orange_slice(opening, n=1001):
    t = np.linspace(0, np.pi, n)
    down = np.column_stack([np.sin(t), np.zeros(n), np.cos(t)])
    up = np.column_stack([np.sin(t[::-1]) * np.cos(opening), np.sin(t[::-1]) * np.sin(opening), np.cos(t[::-1])])
    return np.vstack([down, up[1:]])


@pytest.mark.parametrize("state, expected", [
    (KET_0, (0, 0, 1)),
    (np.array([S, S]), (1, 0, 0)),
    (np.array([S, 1j * S]), (0, 1, 0)),
    (KET_1, (0, 0, -1)),
])
def test_bloch_vector(state, expected):
    assert np.allclose(bloch_vector(state), expected, atol=1e-15)


def test_bloch_vector_rejects_unnormalised():
    with pytest.raises(ValueError):
        bloch_vector(np.array([1.0, 1.0]))


def test_bloch_samples():
    samples = bloch_samples([0.0, 0.1], [KET_0, KET_1])
    assert samples[1] == BlochSample(0.1, 0.0, 0.0, -1.0)


def test_great_circle_is_hemisphere():
    assert abs(solid_angle(circle(math.pi / 2))) == pytest.approx(2 * math.pi, abs=1e-5)


def test_point_trajectory():
    assert solid_angle(np.tile([0.0, 0.0, 1.0], (10, 1))) == 0.0
    assert solid_angle(np.tile([0.0, 0.0, -1.0], (10, 1))) == 0.0


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.0, 2.9])
def test_latitude_circle(theta):
    cap = 2 * math.pi * (1 - math.cos(theta))
    expected = cap if cap <= 2 * math.pi else cap - 4 * math.pi
    # counter-clockwise seen from +z, so the sign is negative
    assert solid_angle(circle(theta)) == pytest.approx(-expected, abs=1e-5)
    assert solid_angle(circle(theta)[::-1]) == pytest.approx(expected, abs=1e-5)


def test_orange_slice():
    assert abs(solid_angle(orange_slice(math.pi / 2))) == pytest.approx(math.pi, abs=1e-9)
    assert abs(solid_angle(orange_slice(math.pi / 4))) == pytest.approx(math.pi / 2, abs=1e-9)


def test_samples_accepted():
    pts = circle(1.0, 101)
    samples = [BlochSample(float(i), *p) for i, p in enumerate(pts)]
    assert solid_angle(samples) == solid_angle(pts)


def test_open_trajectory():
    with pytest.raises(OpenTrajectoryError):
        solid_angle(circle(1.0)[:-200])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0, 2 * math.pi), st.floats(0, math.pi))
def test_solid_angle_rotation_invariant(opening, yaw, pitch):
    c, s = math.cos(yaw), math.sin(yaw)
    rz = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    c, s = math.cos(pitch), math.sin(pitch)
    rx = np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    pts = orange_slice(opening, 401)
    assert solid_angle(pts @ (rx @ rz).T) == pytest.approx(solid_angle(pts), abs=1e-9)


def test_cyclic_states():
    up, down = cyclic_states(pauli_z())
    assert np.allclose(up, KET_0) and np.allclose(down, KET_1)
    plus, minus = cyclic_states(pauli_x())
    assert np.allclose(plus, [S, S]) and np.allclose(minus, [S, -S])
    for spec in (pauli_z(), pauli_x(), GateSpec(family=GateFamily.FLIP, phi_tilde_1=0.7, varphi=0.2)):
        a, b = cyclic_states(spec)
        assert abs(np.vdot(a, b)) < 1e-12


def test_cyclic_states_are_eigenstates_of_initial_field():
    spec = GateSpec(family=GateFamily.FLIP, phi_tilde_1=0.7, varphi=0.2)
    sched = build_schedule(spec)
    t = 1e-6 * spec.tau
    amp, phase, det = sched.played_fields(np.array([t]))
    # the corrected field starts along x' (Omega_R) since Omega_C and Delta_S vanish at t = 0
    h = np.array([np.cos(phase[0]), np.sin(phase[0]), 0.0])
    assert np.allclose(bloch_vector(cyclic_states(spec)[0]), h, atol=1e-6)


def test_cyclic_states_degenerate():
    with pytest.raises(CyclicityError):
        cyclic_states(GateSpec(delta_0=0.0))


def test_dynamic_phase_zero_hamiltonian():
    sched = RectPulse(rabi=0.0, phase=0.0, duration=1.0)
    t = np.linspace(0, 1, 11)
    assert dynamic_phase(sched, t, np.tile(KET_0, (11, 1))) == 0.0


def test_dynamic_phase_stationary_state():
    # constant H = pi * 2 MHz * sx; |+> has energy 2 pi rad/us
    sched = RectPulse(rabi=2.0, phase=0.0, duration=0.3)
    t = np.linspace(0, 0.3, 31)
    states = np.tile([S, S], (31, 1)).astype(complex)
    assert dynamic_phase(sched, t, states) == pytest.approx(-2 * math.pi * 0.3, abs=1e-12)


def test_dynamic_phase_convergence_error():
    sched = build_schedule(pauli_x())
    times, states = gate_trajectory(sched, KET_0, 5)
    with pytest.raises(QuadratureError):
        dynamic_phase(sched, times, states)


@pytest.mark.parametrize("spec", [pauli_z(), pauli_x(), pauli_y()])
def test_geometric_phase_of_pauli_gates(spec):
    a, b = extract_geometric_phase(spec)
    assert a.geometric == pytest.approx(math.pi / 2, abs=1e-2)
    assert b.geometric == pytest.approx(-math.pi / 2, abs=1e-2)
    assert abs(a.dynamic) < 1e-2 and abs(b.dynamic) < 1e-2
    assert a.overlap > 0.999


@pytest.mark.parametrize("gamma", [math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi])
def test_solid_angle_matches_geometric_phase(gamma):
    spec = GateSpec.phase_gate(gamma)
    a, b = extract_geometric_phase(spec)
    diff = (a.geometric + b.geometric + math.pi) % (2 * math.pi) - math.pi
    assert abs(diff) < 1e-3
    sa = trajectory_solid_angle(build_schedule(spec), cyclic_states(spec)[0])
    assert abs(sa) / 2 == pytest.approx(abs(a.geometric), abs=2e-2)


def test_equal_offsets_give_pi():
    spec = GateSpec(phi_tilde_1=0.4, phi_tilde_2=0.4)
    a, _ = extract_geometric_phase(spec)
    assert abs(abs(a.geometric) - math.pi) < 1e-2


def test_global_phase_gauge():
    sched = build_schedule(pauli_x())
    t1, s1 = gate_trajectory(sched, np.array([S, S], dtype=complex), 129)
    t2, s2 = gate_trajectory(sched, np.exp(0.9j) * np.array([S, S]), 129)
    assert np.allclose(bloch_vectors(s1), bloch_vectors(s2), atol=1e-12)
    assert dynamic_phase(sched, t1, s1, tol=1.0) == pytest.approx(dynamic_phase(sched, t2, s2, tol=1.0), abs=1e-12)


def test_trajectory_purity():
    _, states = gate_trajectory(build_schedule(pauli_y()), KET_0, 257)
    assert np.allclose(np.linalg.norm(bloch_vectors(states), axis=1), 1, atol=1e-8)


def test_readout_examples():
    rows = stroboscopic_readout([0.0, 1.0], [KET_0, np.array([S, S])])
    assert rows[0, 3] == pytest.approx(1.0)
    # (pi/2)_y takes +x to |1>
    assert rows[1, 2] == pytest.approx(0.0, abs=1e-15)


def test_readout_reconstruction(rng):
    states = np.array([haar_unitary(rng) @ KET_0 for _ in range(50)])
    rec = reconstruct_bloch(stroboscopic_readout(np.arange(50.0), states))
    assert np.max(np.abs(rec - bloch_vectors(states))) < 1e-9
