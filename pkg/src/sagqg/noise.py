"""Quasi-static drive errors.

A :class:`NoiseModel` describes Gaussian spreads of slow errors. One draw,
a :class:`NoiseSample`, is held fixed for a whole experiment shot (one RB
sequence, one tomography setting) and applied to every pulse in it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import DEFAULT_SUBSTEPS, gate_unitary
from .operators import I2
from .schedule import TWO_PI, GateSpec, build_schedule


@dataclass(frozen=True)
class NoiseModel:
    """Spreads of the quasi-static error channels.

    ``detuning_sigma`` is in MHz, ``amplitude_sigma`` and ``timing_sigma``
    are relative. ``rabi_clip`` (MHz) caps the played Rabi frequency and is
    deterministic.
    """

    detuning_sigma: float = 0.0
    amplitude_sigma: float = 0.0
    timing_sigma: float = 0.0
    rabi_clip: float | None = None

    def __post_init__(self):
        for name in ("detuning_sigma", "amplitude_sigma", "timing_sigma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if self.rabi_clip is not None and not self.rabi_clip > 0:
            raise ValueError(f"rabi_clip must be positive, got {self.rabi_clip!r}")

    @classmethod
    def from_t2star(cls, t2star_us: float, **kwargs) -> "NoiseModel":
        """Detuning spread ``sqrt(2) / (2 pi T2*)`` of Gaussian dephasing with time constant ``T2*``."""
        if not t2star_us > 0:
            raise ValueError("T2* must be positive")
        return cls(detuning_sigma=math.sqrt(2.0) / (TWO_PI * t2star_us), **kwargs)

    _KEYS = {"detuning": "detuning_sigma", "amplitude": "amplitude_sigma", "timing": "timing_sigma", "clip": "rabi_clip"}

    @classmethod
    def parse(cls, text: str | None) -> "NoiseModel":
        """Parse ``"detuning:0.05,amplitude:0.01,timing:0,clip:7"``; empty or ``none`` means noiseless."""
        if text is None or text.strip().lower() in ("", "none", "0"):
            return cls()
        kwargs = {}
        for item in text.split(","):
            key, sep, value = item.partition(":")
            key = key.strip().lower()
            if not sep or key not in cls._KEYS:
                raise ValueError(f"bad noise term {item!r}; expected one of {sorted(cls._KEYS)} as key:value")
            kwargs[cls._KEYS[key]] = float(value)
        return cls(**kwargs)

    def describe(self) -> str:
        parts = [
            f"detuning:{self.detuning_sigma:.12g}",
            f"amplitude:{self.amplitude_sigma:.12g}",
            f"timing:{self.timing_sigma:.12g}",
        ]
        if self.rabi_clip is not None:
            parts.append(f"clip:{self.rabi_clip:.12g}")
        return ",".join(parts)

    @property
    def is_noiseless(self) -> bool:
        return self.detuning_sigma == 0 and self.amplitude_sigma == 0 and self.timing_sigma == 0 and self.rabi_clip is None


@dataclass(frozen=True)
class NoiseSample:
    """One realisation: detuning offset (MHz), relative amplitude and timing errors."""

    detuning: float = 0.0
    amplitude: float = 0.0
    timing: float = 0.0
    rabi_clip: float | None = None

    def apply(self, schedule):
        """Return ``schedule`` as played under this realisation."""
        if 1.0 + self.timing <= 0:
            raise ValueError(f"timing error {self.timing} makes the pulse duration non-positive")
        return schedule.with_distortion(
            detuning_offset=schedule.detuning_offset + self.detuning,
            amplitude_scale=schedule.amplitude_scale * (1.0 + self.amplitude),
            time_scale=schedule.time_scale * (1.0 + self.timing),
            rabi_clip=self.rabi_clip if self.rabi_clip is not None else schedule.rabi_clip,
        )


NOISELESS = NoiseSample()


def sample_noise(model: NoiseModel, rng: np.random.Generator) -> NoiseSample:
    """Draw one realisation of ``model``.

    Three standard normals are always consumed, so streams stay aligned
    between models that differ only in their spreads.
    """
    z = rng.standard_normal(3)
    return NoiseSample(
        detuning=float(model.detuning_sigma * z[0]),
        amplitude=float(model.amplitude_sigma * z[1]),
        timing=float(model.timing_sigma * z[2]),
        rabi_clip=model.rabi_clip,
    )


def as_pulses(gate) -> tuple:
    """Normalise a gate description to a tuple of schedules played in order."""
    if isinstance(gate, GateSpec):
        return (build_schedule(gate),)
    if isinstance(gate, (list, tuple)):
        out = []
        for g in gate:
            out.extend(as_pulses(g))
        return tuple(out)
    if hasattr(gate, "played_fields"):
        return (gate,)
    raise TypeError(f"cannot interpret {type(gate).__name__} as a pulse sequence")


def realized_unitary(gate, sample: NoiseSample = NOISELESS, substeps: int = DEFAULT_SUBSTEPS,
                     backend: str | None = None) -> np.ndarray:
    """Propagator of a gate (unitary, spec, schedule or sequence) under one noise realisation.

    A plain matrix is taken as an ideal, noise-free gate.
    """
    if isinstance(gate, np.ndarray):
        return np.asarray(gate, dtype=np.complex128)
    u = I2.copy()
    for pulse in as_pulses(gate):
        u = gate_unitary(sample.apply(pulse), substeps, backend) @ u
    return u
