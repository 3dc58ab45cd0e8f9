import numpy as np
import pytest

from sagqg.benchmarking import (
    ALPHA,
    GateSet,
    RBConfig,
    FitError,
    compare_gatesets,
    fit_rb_decay,
    generate_rb_sequences,
    ideal_gate,
    printed_decay,
    run_rb,
    survival_model,
)
from sagqg.noise import NoiseModel
from sagqg.operators import gate_overlap_fidelity, rotation

SMALL = RBConfig(n_sequences=2, n_pauli=4, shots=0)


def test_alpha():
    assert ALPHA == 2


def test_config_validation():
    assert RBConfig().n_total == 416
    with pytest.raises(ValueError):
        RBConfig(lengths=(0, 2))
    with pytest.raises(ValueError):
        RBConfig(n_pauli=0)
    with pytest.raises(ValueError):
        RBConfig(seed=-1)


@pytest.mark.parametrize("family", ["sagqg", "dynamic"])
def test_sequence_count_and_structure(family):
    seqs = generate_rb_sequences(RBConfig(), family)
    assert len(seqs) == 416
    for s in seqs[:50]:
        # P1 G1 P2 ... Gl P(l+1) R P(l+2)
        assert len(s.keys) == 2 * s.length + 3


@pytest.mark.parametrize("family", ["sagqg", "dynamic"])
def test_ideal_sequences_end_in_eigenstate(family):
    for s in generate_rb_sequences(RBConfig(seed=5), family):
        u = np.eye(2)
        for key in s.keys:
            u = ideal_gate(key) @ u
        p = abs(u[:, 0]) ** 2
        assert p[s.expected] == pytest.approx(1.0, abs=1e-12)


def test_sequences_deterministic():
    a = generate_rb_sequences(RBConfig(seed=3), "sagqg")
    b = generate_rb_sequences(RBConfig(seed=3), "sagqg")
    c = generate_rb_sequences(RBConfig(seed=4), "sagqg")
    assert a == b
    assert a != c


def test_computational_gates():
    seqs = generate_rb_sequences(RBConfig(), "sagqg")
    comp = {k for s in seqs for k in s.keys[1:-2:2]}
    assert comp == {("x", 1), ("z", 1), ("xbar", 1), ("zbar", 1)}


@pytest.mark.parametrize("family", ["sagqg", "dynamic"])
def test_gateset_realises_ideal_gates(family):
    gates = GateSet.build(family)
    keys = sorted(gates.pulses)
    for key, u in zip(keys, gates.unitaries(keys, substeps=1024)):
        assert gate_overlap_fidelity(u, ideal_gate(key)) > 1 - 1e-9, key


def test_ideal_gate():
    assert np.allclose(ideal_gate(("x", 1)), rotation("x", np.pi / 2))
    assert np.allclose(ideal_gate(("id", 1)), np.eye(2))


def test_fit_recovers_synthetic_parameters():
    lengths = np.array(RBConfig().lengths)
    fit = fit_rb_decay(lengths, survival_model(lengths, 0.01, 0.02))
    assert fit.eps_g == pytest.approx(0.01, abs=1e-6)
    assert fit.eps_m == pytest.approx(0.02, abs=1e-6)


@pytest.mark.parametrize("g, m", [(0.003, 0.01), (0.05, -0.02), (1e-4, 0.0)])
def test_refit_own_model(g, m):
    lengths = np.arange(1, 60, 4)
    fit = fit_rb_decay(lengths, survival_model(lengths, g, m))
    assert fit.eps_g == pytest.approx(g, abs=1e-8)
    assert fit.eps_m == pytest.approx(m, abs=1e-8)


def test_model_forms():
    l = np.arange(10)
    assert np.allclose(survival_model(l, 0.0, 0.1), (1 + (1 - 2 * 0.1)) / 2)
    assert np.allclose(printed_decay(l, 0.01, 0.02), 1 - survival_model(l, 0.01, 0.02))
    assert printed_decay(0, 0.0, 0.0) == 0.0


def test_fit_needs_lengths():
    with pytest.raises(ValueError):
        fit_rb_decay([1, 2, 3], [1, 1, 1])


def test_fit_error_type():
    assert issubclass(FitError, RuntimeError)


@pytest.mark.parametrize("family", ["sagqg", "dynamic"])
def test_noiseless_rb(family):
    result = run_rb(family, None, RBConfig(shots=0))
    assert np.all(result.mean >= 1 - 1e-4)
    assert result.eps_g < 1e-3
    assert np.all((0 <= result.survival) & (result.survival <= 1))


def test_rb_reproducible():
    noise = NoiseModel(detuning_sigma=0.05)
    cfg = RBConfig(n_sequences=2, n_pauli=2, shots=100, seed=9)
    a = run_rb("sagqg", noise, cfg)
    b = run_rb("sagqg", noise, cfg)
    assert np.array_equal(a.survival, b.survival)
    assert a.to_dict() == b.to_dict()


def test_backends_give_same_result():
    noise = NoiseModel(detuning_sigma=0.05)
    cfg = RBConfig(n_sequences=1, n_pauli=2, shots=0)
    a = run_rb("dynamic", noise, cfg, backend="numpy")
    b = run_rb("dynamic", noise, cfg, backend="numba")
    assert np.allclose(a.survival, b.survival, atol=1e-12)


def test_monotone_degradation():
    sigmas = [0.0, 0.05, 0.1, 0.2, 0.4]
    for family in ("sagqg", "dynamic"):
        eps = [run_rb(family, NoiseModel(detuning_sigma=s), SMALL).eps_g for s in sigmas]
        assert np.all(np.diff(eps) >= 0), (family, eps)


def test_result_dict():
    d = run_rb("dynamic", None, SMALL).to_dict()
    assert d["config"]["seed"] == 0
    assert len(d["mean_fidelity"]) == len(SMALL.lengths)


def test_compare_gatesets_noiseless_has_no_winner():
    with pytest.raises(ValueError):
        compare_gatesets(NoiseModel(), [0], SMALL)


def test_amplitude_noise_favours_sagqg():
    # the geometric gates tolerate Rabi miscalibration better than square pulses
    result = compare_gatesets(NoiseModel(amplitude_sigma=0.02), range(5), RBConfig(shots=0))
    assert result.sagqg_better
