"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line and then asserts. Run
``python tests/test_acceptance.py`` to get only those lines.
"""

import contextlib
import io
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from sagqg.analysis import cyclic_states, extract_geometric_phase, trajectory_solid_angle
from sagqg.benchmarking import RBConfig, compare_gatesets, run_rb
from sagqg.cli import main
from sagqg.dynamics import evolve_lab_frame, gate_unitary, lab_to_rotating
from sagqg.experiments import OMEGA_MAX, PARAMETER_SETS, SweepGrid, fidelity_vs_tau, pi_pulse_time, tau_min_map
from sagqg.noise import NoiseModel
from sagqg.operators import haar_unitary, unitarity_error
from sagqg.schedule import (
    GateFamily,
    GateSpec,
    build_schedule,
    drive_detuning,
    max_superadiabatic_rabi,
    pauli_x,
    pauli_z,
    rotation_gate,
    segment_grid,
    superadiabatic_detuning,
)
from sagqg.tomography import ideal_chi, reconstruct_chi, run_qpt, simulate_qpt


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_1_minimal_gate_length():
    start = time.perf_counter()
    m = tau_min_map(SweepGrid(resolution=(64, 64), omega_max=OMEGA_MAX))
    elapsed = time.perf_counter() - start
    w, d, t = m.argmin()
    target = pi_pulse_time(OMEGA_MAX)
    ok = abs(t - target) <= 0.01 * target and abs(4 * t - 0.284) <= 0.02 * 0.284 and elapsed < 60
    detail = (f"min tau_min {1e3 * t:.2f} ns at (Omega0, Delta0) = ({w:.3f}, {d:.3f}) MHz, "
              f"target {1e3 * target:.2f} ns; t_gate {1e3 * 4 * t:.1f} ns vs 284 ns; {elapsed:.1f} s")
    assert report(1, "minimal gate length", ok, detail)


def test_2_free_parameter_consistency():
    start = time.perf_counter()
    peak = max_superadiabatic_rabi(GateSpec(omega_0=3.5, delta_0=1.0, tau=0.8 / 7.0))
    elapsed = time.perf_counter() - start
    ok = 7.0 <= peak <= 7.6 and elapsed < 1
    assert report(2, "free-parameter consistency", ok, f"max Omega_S = {peak:.4f} MHz; {elapsed:.3f} s")


def test_3_geometric_phase():
    start = time.perf_counter()
    worst = {"geometric": 0.0, "dynamic": 0.0, "solid": 0.0}
    for gamma in (math.pi / 4, math.pi / 2, 3 * math.pi / 4):
        spec = GateSpec.phase_gate(gamma)
        a, b = extract_geometric_phase(spec)
        sa = trajectory_solid_angle(build_schedule(spec), cyclic_states(spec)[0])
        worst["geometric"] = max(worst["geometric"], abs(a.geometric - gamma), abs(b.geometric + gamma))
        worst["dynamic"] = max(worst["dynamic"], abs(a.dynamic), abs(b.dynamic))
        worst["solid"] = max(worst["solid"], abs(sa - 2 * gamma))
    elapsed = time.perf_counter() - start
    ok = worst["geometric"] < 1e-2 and worst["dynamic"] < 1e-2 and worst["solid"] < 2e-2 and elapsed < 10
    detail = (f"max |gamma_geo - gamma| {worst['geometric']:.1e} rad, max |dynamic| {worst['dynamic']:.1e} rad, "
              f"max |solid angle - 2 gamma| {worst['solid']:.1e} sr; {elapsed:.1f} s")
    assert report(3, "geometric phase", ok, detail)


def test_4_gate_fidelities():
    fids = {g: run_qpt(g, shots=0, seed=0).fidelity for g in ("pauli-x", "pauli-z", "hadamard")}
    ok = all(f > 0.999 for f in fids.values())
    assert report(4, "noiseless QPT fidelity", ok, ", ".join(f"{g} F = {f:.10f}" for g, f in fids.items()))


def test_5_detuning_ratio():
    start = time.perf_counter()
    t = segment_grid(pauli_z().tau, 4096)
    peak_z = np.max(np.abs(drive_detuning(t, pauli_z())))
    peak_x = np.max(np.abs(drive_detuning(t, pauli_x())))
    ratio = peak_z / peak_x
    elapsed = time.perf_counter() - start
    ok = abs(ratio - 2.0) <= 0.2 and elapsed < 1
    assert report(5, "detuning amplitude ratio", ok, f"max|Delta_Z| / max|Delta_X| = {ratio:.4f}; {elapsed:.3f} s")


@pytest.mark.slow
def test_6_rb_ordering():
    start = time.perf_counter()
    config = RBConfig(shots=1000)
    noiseless = {g: run_rb(g, None, RBConfig(shots=0)).eps_g for g in ("sagqg", "dynamic")}
    noise = NoiseModel.from_t2star(4.25)
    cmp = compare_gatesets(noise, range(5), config)
    elapsed = time.perf_counter() - start
    ok = cmp.sagqg_better and all(v < 1e-3 for v in noiseless.values()) and elapsed < 600
    detail = (f"sigma = {noise.detuning_sigma:.4f} MHz, 5 seeds: eps_g sagqg {np.mean(cmp.eps_sagqg):.2e} "
              f"vs dynamic {np.mean(cmp.eps_dynamic):.2e} (one-sided p = {cmp.p_value:.3g}); noiseless eps_g "
              f"sagqg {noiseless['sagqg']:.1e}, dynamic {noiseless['dynamic']:.1e}; {elapsed:.0f} s")
    assert report(6, "RB ordering", ok, detail)


def test_7_robustness_curve():
    start = time.perf_counter()
    parts, ok = [], True
    for name in sorted(PARAMETER_SETS):
        curve = fidelity_vs_tau(name)
        above = curve.fidelity[curve.tau >= curve.tau_min]
        below = curve.fidelity[curve.tau < curve.t_pi]
        monotone = bool(np.all(np.diff(below) >= 0))
        dropped = below[0] < above.min()
        ok &= bool(above.min() > 0.99 and monotone and dropped)
        parts.append(f"{name}: min F(tau >= tau_min) {above.min():.6f}, F(0.5 t_pi) {below[0]:.3f}, "
                     f"monotone below t_pi {monotone}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    assert report(7, "robustness curve", ok, "; ".join(parts) + f"; {elapsed:.1f} s")


def _ode_residual(spec):
    h = 1e-6 * spec.tau
    t = np.linspace(1e-3 * spec.tau, 4 * spec.tau - h, 4001)
    t = t[np.min(np.abs(t[:, None] - spec.tau * np.arange(5)), axis=1) > 2 * h]
    d_dot = (drive_detuning(t + h, spec) - drive_detuning(t - h, spec)) / (2 * h)
    return float(np.max(np.abs(drive_detuning(t, spec) + d_dot * t - superadiabatic_detuning(t, spec))))


def _artifacts_identical(tmp):
    commands = [
        ("rb", "--gateset", "both", "--noise", "detuning:0.05", "--seed", "7", "--n-sequences", "1", "--n-pauli", "2",
         "--lengths", "2,4,8,16", "--shots", "500"),
        ("qpt", "--gate", "hadamard", "--noise", "detuning:0.05,amplitude:0.01", "--shots", "1000", "--seed", "3"),
        ("trajectory", "--gate", "pauli-y", "--samples", "51"),
        ("gamma-sweep", "--n-gamma", "5"),
    ]
    for k, argv in enumerate(commands):
        outputs = []
        for rep in range(2):
            out = Path(tmp) / f"{k}-{rep}"
            with contextlib.redirect_stdout(io.StringIO()):
                code = main([*argv, "--out", str(out)])
            if code != 0:
                return False
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if outputs[0] != outputs[1]:
            return False
    return True


def test_8_property_suites(tmp_path):
    rng = np.random.default_rng(2024)
    specs = [pauli_x(), pauli_z(), rotation_gate("y", math.pi / 2), GateSpec(family=GateFamily.FLIP, delta_0=5.0)]
    unitarity = max(unitarity_error(gate_unitary(build_schedule(s))) for s in specs)

    round_trip = 0.0
    for _ in range(100):
        u = haar_unitary(rng)
        round_trip = max(round_trip, float(np.linalg.norm(reconstruct_chi(simulate_qpt(u)) - ideal_chi(u))))

    frame = 1.0
    for spec in (pauli_x(), pauli_z()):
        sched = build_schedule(spec)
        psi0 = np.array([1, 1], dtype=complex) / math.sqrt(2)
        carrier = 200 * OMEGA_MAX
        lab = lab_to_rotating(evolve_lab_frame(psi0, sched, carrier), sched.total_time, sched, carrier)
        ref = gate_unitary(sched, 2048) @ psi0
        frame = min(frame, abs(np.vdot(ref, lab)) ** 2)

    residual = max(_ode_residual(GateSpec(family=f, delta_0=d)) for f in GateFamily for d in (0.5, 1.0))
    reproducible = _artifacts_identical(tmp_path)

    ok = unitarity < 1e-10 and round_trip < 1e-8 and frame > 1 - 1e-3 and residual < 1e-9 and reproducible
    detail = (f"unitarity {unitarity:.1e}, QPT round trip {round_trip:.1e}, lab/rotating fidelity {frame:.6f}, "
              f"ODE residual {residual:.1e}, artifacts bit-identical {reproducible}")
    assert report(8, "property suites", ok, detail)


if __name__ == "__main__":
    import tempfile

    failed = 0
    for name, fn in sorted((n, f) for n, f in globals().items() if n.startswith("test_")):
        try:
            if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as tmp:
                    fn(Path(tmp))
            else:
                fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
