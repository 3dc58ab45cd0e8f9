"""Randomized benchmarking with Pauli randomisation.

A sequence of length ``l`` is played in the order

    P1, G1, P2, G2, ..., Gl, P(l+1), R, P(l+2)

where the ``G`` are pi/2 rotations, the ``P`` are pi rotations about the
six signed axes or an identity, and ``R`` takes the ideal output to a pole
of the Bloch sphere. Each sequence sees one quasi-static noise draw.

The survival probability is fitted to

    F(l) = ((alpha - 1) + (1 - alpha eps_m) (1 - alpha eps_g)^l) / alpha,   alpha = 2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize, stats

from . import _kernels
from .dynamics import DEFAULT_SUBSTEPS, dynamic_pulse
from .noise import NOISELESS, NoiseModel, NoiseSample, realized_unitary, sample_noise
from .operators import I2, KET_0, rotation
from .schedule import DEFAULT_DELTA_0, DEFAULT_OMEGA_0, GateSpec, build_schedule, rotation_gate

__all__ = [
    "NoiseModel",
    "NoiseSample",
    "sample_noise",
    "RBConfig",
    "RBSequence",
    "RBFit",
    "RBResult",
    "GateSet",
    "FitError",
    "ALPHA",
    "DEFAULT_LENGTHS",
    "generate_rb_sequences",
    "run_rb",
    "fit_rb_decay",
    "survival_model",
    "printed_decay",
    "compare_gatesets",
]

ALPHA = 2.0  # 2^n / (2^n - 1) for one qubit
DEFAULT_LENGTHS = (2, 4, 6, 8, 10, 14, 18, 22, 26, 30, 34, 40, 48)
DYNAMIC_RABI = 7.0


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class RBConfig:
    n_sequences: int = 4
    n_pauli: int = 8
    lengths: tuple[int, ...] = DEFAULT_LENGTHS
    shots: int = 1000
    seed: int = 0
    omega_0: float = DEFAULT_OMEGA_0
    delta_0: float = DEFAULT_DELTA_0
    tau: float | None = None
    dynamic_rabi: float = DYNAMIC_RABI
    substeps: int = DEFAULT_SUBSTEPS

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(int(v) for v in self.lengths))
        if self.n_sequences < 1 or self.n_pauli < 1:
            raise ValueError("n_sequences and n_pauli must be >= 1")
        if not self.lengths or min(self.lengths) < 1:
            raise ValueError("lengths must be non-empty and >= 1")
        if self.shots < 0:
            raise ValueError("shots must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_total(self) -> int:
        return self.n_sequences * self.n_pauli * len(self.lengths)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lengths"] = list(self.lengths)
        return d


# ---------------------------------------------------------------------------
# gate sets

# Gate keys are (axis, angle in quarter turns); ("id", v) is an identity in variant v.
_PAULIS = (("x", 2), ("z", 2), ("y", 2), ("xbar", 2), ("ybar", 2), ("zbar", 2), ("id", 0))
_R_BY_POLE_AXIS = {
    2: (("id", 0), ("x", 2)),  # state on +-z
    1: (("x", 1), ("xbar", 1)),  # state on +-y
    0: (("y", 1), ("ybar", 1)),  # state on +-x
}
_COMPUTATIONAL = {
    "sagqg": (("x", 1), ("z", 1), ("xbar", 1), ("zbar", 1)),
    "dynamic": (("x", 1), ("y", 1), ("xbar", 1), ("ybar", 1)),
}


def ideal_gate(key) -> np.ndarray:
    axis, quarters = key
    if axis == "id":
        return I2
    return rotation(axis, quarters * math.pi / 2)


@dataclass
class GateSet:
    """Pulse realisation of every gate key for one gate family."""

    name: str
    pulses: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name: str, config: RBConfig | None = None) -> "GateSet":
        config = RBConfig() if config is None else config
        if name not in _COMPUTATIONAL:
            raise ValueError(f"unknown gate set {name!r}; expected 'sagqg' or 'dynamic'")
        keys = set(_COMPUTATIONAL[name]) | set(_PAULIS) | {k for ks in _R_BY_POLE_AXIS.values() for k in ks}
        keys |= {("id", 1)}
        pulses = {}
        spec_kw = {"omega_0": config.omega_0, "delta_0": config.delta_0, "tau": config.tau}
        for key in sorted(keys):
            axis, quarters = key
            if name == "sagqg":
                if axis == "id":
                    # gamma = 0 or pi: both leave every state unchanged
                    spec = GateSpec.phase_gate(quarters * math.pi, **spec_kw)
                else:
                    spec = rotation_gate(axis, quarters * math.pi / 2, **spec_kw)
                pulses[key] = (build_schedule(spec),)
            else:
                if axis == "id":
                    pulses[key] = (dynamic_pulse("x" if quarters == 0 else "xbar", 2 * math.pi, config.dynamic_rabi)[1],)
                else:
                    pulses[key] = (dynamic_pulse(axis, quarters * math.pi / 2, config.dynamic_rabi)[1],)
        return cls(name, pulses)

    def unitaries(self, keys, sample: NoiseSample = NOISELESS, substeps: int = DEFAULT_SUBSTEPS) -> np.ndarray:
        return np.stack([realized_unitary(self.pulses[k], sample, substeps) for k in keys])


@dataclass(frozen=True)
class RBSequence:
    index: int
    length: int
    base: int
    pauli: int
    keys: tuple  # time order
    expected: int  # ideal outcome, 0 or 1


def _pole_axis(psi):
    bloch = np.array(
        [2 * (np.conj(psi[0]) * psi[1]).real, 2 * (np.conj(psi[0]) * psi[1]).imag, abs(psi[0]) ** 2 - abs(psi[1]) ** 2]
    )
    axis = int(np.argmax(np.abs(bloch)))
    if abs(abs(bloch[axis]) - 1.0) > 1e-9:
        raise AssertionError("ideal RB state left the cardinal points")
    return axis


def generate_rb_sequences(config: RBConfig, gate_family: str) -> list[RBSequence]:
    """All ``n_sequences * len(lengths) * n_pauli`` sequences, deterministic in ``config.seed``.

    The random draws do not depend on the gate family, so the two families
    get sequences with the same structure (common random numbers).
    """
    computational = _COMPUTATIONAL.get(gate_family)
    if computational is None:
        raise ValueError(f"unknown gate family {gate_family!r}")
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0]))
    lmax = max(config.lengths)
    bases = [rng.integers(0, len(computational), size=lmax) for _ in range(config.n_sequences)]
    out = []
    for length in config.lengths:
        for g, base in enumerate(bases):
            comp = [computational[i] for i in base[:length]]
            for p in range(config.n_pauli):
                pauli_idx = rng.integers(0, len(_PAULIS), size=length + 2)
                id_variant = rng.integers(0, 2, size=length + 2)
                r_choice = int(rng.integers(0, 2))
                paulis = [
                    ("id", int(v)) if _PAULIS[i][0] == "id" else _PAULIS[i] for i, v in zip(pauli_idx, id_variant)
                ]
                keys = [paulis[0]]
                for k in range(length):
                    keys += [comp[k], paulis[k + 1]]
                psi = KET_0
                for key in keys:
                    psi = ideal_gate(key) @ psi
                r_key = _R_BY_POLE_AXIS[_pole_axis(psi)][r_choice]
                psi = ideal_gate(paulis[-1]) @ (ideal_gate(r_key) @ psi)
                keys += [r_key, paulis[-1]]
                expected = 0 if abs(psi[0]) > 0.5 else 1
                out.append(RBSequence(len(out), length, g, p, tuple(keys), expected))
    return out


# ---------------------------------------------------------------------------
# fitting


def survival_model(l, eps_g, eps_m, alpha: float = ALPHA):
    """Average survival probability after ``l`` computational gates."""
    l = np.asarray(l, dtype=float)
    return ((alpha - 1.0) + (1.0 - alpha * eps_m) * (1.0 - alpha * eps_g) ** l) / alpha


def printed_decay(l, eps_g, eps_m, alpha: float = ALPHA):
    """The complementary form ``1 - survival_model``, which starts near zero."""
    return 1.0 - survival_model(l, eps_g, eps_m, alpha)


@dataclass(frozen=True)
class RBFit:
    eps_g: float
    eps_m: float
    eps_g_err: float
    eps_m_err: float
    covariance: np.ndarray
    residual_rms: float


def fit_rb_decay(lengths, fidelities, sigma=None, alpha: float = ALPHA) -> RBFit:
    """Least-squares fit of :func:`survival_model` for ``(eps_g, eps_m)``."""
    lengths = np.asarray(lengths, dtype=float)
    fidelities = np.asarray(fidelities, dtype=float)
    if len(np.unique(lengths)) < 4:
        raise ValueError("need at least four distinct lengths to fit")
    if sigma is not None:
        sigma = np.asarray(sigma, dtype=float)
        if np.any(sigma <= 0):
            sigma = None
    # start from the log-linear slope of the decaying part
    excess = np.clip(alpha * fidelities - (alpha - 1.0), 1e-6, None)
    slope = np.polyfit(lengths, np.log(excess), 1)[0]
    g0 = float(np.clip((1.0 - math.exp(slope)) / alpha, 1e-6, 0.4))
    m0 = float(np.clip((1.0 - excess[0] / (1 - alpha * g0) ** lengths[0]) / alpha, 1e-6, 0.4))

    def model(l, g, m):
        return survival_model(l, g, m, alpha)

    try:
        popt, pcov = optimize.curve_fit(
            model, lengths, fidelities, p0=(g0, m0), sigma=sigma, absolute_sigma=sigma is not None,
            bounds=([0.0, -1.0], [1.0 / alpha, 1.0 / alpha]), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=10000,
        )
    except (RuntimeError, ValueError) as exc:
        resid = fidelities - model(lengths, g0, m0)
        raise FitError(f"RB fit did not converge ({exc}); rms residual at start {np.sqrt(np.mean(resid**2)):.3g}") from exc
    resid = fidelities - model(lengths, *popt)
    pcov = np.where(np.isfinite(pcov), pcov, np.inf)
    return RBFit(
        float(popt[0]), float(popt[1]), float(math.sqrt(pcov[0, 0])), float(math.sqrt(pcov[1, 1])), pcov,
        float(np.sqrt(np.mean(resid**2))),
    )


# ---------------------------------------------------------------------------
# execution


@dataclass(frozen=True)
class RBResult:
    gateset: str
    lengths: np.ndarray
    mean: np.ndarray
    sem: np.ndarray
    survival: np.ndarray  # per sequence, in generation order
    fit: RBFit
    config: RBConfig
    noise: NoiseModel

    @property
    def eps_g(self) -> float:
        return self.fit.eps_g

    @property
    def eps_m(self) -> float:
        return self.fit.eps_m

    def to_dict(self) -> dict:
        return {
            "gateset": self.gateset,
            "lengths": [int(v) for v in self.lengths],
            "mean_fidelity": [float(v) for v in self.mean],
            "sem": [float(v) for v in self.sem],
            "eps_g": self.fit.eps_g,
            "eps_g_err": self.fit.eps_g_err,
            "eps_m": self.fit.eps_m,
            "eps_m_err": self.fit.eps_m_err,
            "covariance": [[float(v) for v in row] for row in self.fit.covariance],
            "residual_rms": self.fit.residual_rms,
            "config": self.config.to_dict(),
            "noise": self.noise.describe(),
        }


def _sequence_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, 1, index]))


def run_rb(gateset: str, noise: NoiseModel | None = None, config: RBConfig | None = None,
           backend: str | None = None) -> RBResult:
    """Simulate every sequence at pulse level and fit the decay.

    Sequence ``i`` draws its noise and shot outcomes from its own stream
    ``(seed, i)``, so results do not depend on evaluation order, and both
    gate sets see the same noise draws for the same seed.
    """
    config = RBConfig() if config is None else config
    noise = NoiseModel() if noise is None else noise
    gates = GateSet.build(gateset, config)
    sequences = generate_rb_sequences(config, gateset)
    kernel = _kernels.select(backend)
    all_keys = sorted(gates.pulses)
    key_index = {k: i for i, k in enumerate(all_keys)}
    fixed = gates.unitaries(all_keys, NOISELESS, config.substeps) if noise.is_noiseless else None
    survival = np.empty(len(sequences))
    for seq in sequences:
        rng = _sequence_rng(config.seed, seq.index)
        sample = sample_noise(noise, rng)
        if fixed is None:
            used = sorted(set(seq.keys))
            local = {k: i for i, k in enumerate(used)}
            table = gates.unitaries(used, sample, config.substeps)
            idx = np.array([local[k] for k in seq.keys])
        else:
            table = fixed
            idx = np.array([key_index[k] for k in seq.keys])
        psi = kernel.chain(table, idx)[:, 0]
        p = min(1.0, max(0.0, float(abs(psi[seq.expected]) ** 2)))
        if config.shots:
            p = rng.binomial(config.shots, p) / config.shots
        survival[seq.index] = p
    lengths = np.array(config.lengths)
    by_length = np.array([s.length for s in sequences])
    mean = np.array([survival[by_length == l].mean() for l in lengths])
    n = config.n_sequences * config.n_pauli
    sem = np.array([survival[by_length == l].std(ddof=1) / math.sqrt(n) if n > 1 else 0.0 for l in lengths])
    fit = fit_rb_decay(lengths, mean)
    return RBResult(gateset, lengths, mean, sem, survival, fit, config, noise)


@dataclass(frozen=True)
class GatesetComparison:
    seeds: tuple[int, ...]
    eps_sagqg: np.ndarray
    eps_dynamic: np.ndarray
    p_value: float

    @property
    def sagqg_better(self) -> bool:
        return bool(self.p_value < 0.05 and np.mean(self.eps_sagqg) < np.mean(self.eps_dynamic))


def compare_gatesets(noise: NoiseModel, seeds, config: RBConfig | None = None) -> GatesetComparison:
    """Paired one-sided test of ``eps_g(sagqg) < eps_g(dynamic)`` over seeds."""
    config = RBConfig() if config is None else config
    seeds = tuple(int(s) for s in seeds)
    if len(seeds) < 2:
        raise ValueError("need at least two seeds for a paired test")
    sag, dyn = [], []
    for s in seeds:
        cfg = RBConfig(**{**config.to_dict(), "seed": s})
        sag.append(run_rb("sagqg", noise, cfg).eps_g)
        dyn.append(run_rb("dynamic", noise, cfg).eps_g)
    sag, dyn = np.array(sag), np.array(dyn)
    diff = dyn - sag
    if np.all(diff == diff[0]):
        p = 0.0 if diff[0] > 0 else 1.0
    else:
        p = float(stats.ttest_rel(dyn, sag, alternative="greater").pvalue)
    return GatesetComparison(seeds, sag, dyn, p)
