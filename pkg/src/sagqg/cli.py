"""Command-line front end.

Every subcommand writes its artifacts into ``--out`` (default: the current
directory). Parameter precedence is command-line flag, then ``--config``
JSON file, then built-in defaults. The seed falls back to ``SAGQG_SEED``.

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or invalid
configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .artifacts import metadata, write_csv, write_json
from .schedule import (
    DEFAULT_DELTA_0,
    DEFAULT_OMEGA_0,
    GateFamily,
    GateSpec,
    InvalidSpecError,
    build_schedule,
    schedule_table,
)

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


# Defaults per subcommand. Keys double as config-file keys and flag dests.
_SPEC_DEFAULTS = {"gamma": None, "axis_angle": None, "omega0": DEFAULT_OMEGA_0, "delta0": DEFAULT_DELTA_0, "tau": None}
DEFAULTS = {
    "schedule": {"gate": None, "points": 64, **_SPEC_DEFAULTS},
    "trajectory": {"gate": None, "samples": 201, "initial": "0", **_SPEC_DEFAULTS},
    "qpt": {"gate": None, "shots": 0, "noise": "none", "project_cp": False, "omega0": DEFAULT_OMEGA_0,
            "delta0": DEFAULT_DELTA_0, "tau": None},
    "rb": {"gateset": "both", "noise": "none", "n_sequences": 4, "n_pauli": 8,
           "lengths": "2,4,6,8,10,14,18,22,26,30,34,40,48", "shots": 1000, "omega0": DEFAULT_OMEGA_0,
           "delta0": DEFAULT_DELTA_0, "tau": None, "dynamic_rabi": 7.0},
    "gamma-sweep": {"family": "phase", "n_gamma": 33, "axis_angle": 0.0, "omega0": DEFAULT_OMEGA_0,
                    "delta0": DEFAULT_DELTA_0, "tau": None},
    "tau-min-map": {"omega_max": 7.0, "omega0_min": 0.5, "omega0_max": 3.5, "delta0_min": 0.5, "delta0_max": 8.0,
                    "resolution": 64, "points": 4096},
    "fidelity-vs-tau": {"params": "A", "omega0": None, "delta0": None, "omega_max": 7.0, "n_tau": 41,
                        "tau_lo": None, "tau_hi": None},
}
_SEEDED = {"qpt", "rb"}

_INITIAL_STATES = {
    "0": (1, 0),
    "1": (0, 1),
    "+": (1 / math.sqrt(2), 1 / math.sqrt(2)),
    "-": (1 / math.sqrt(2), -1 / math.sqrt(2)),
    "+i": (1 / math.sqrt(2), 1j / math.sqrt(2)),
    "-i": (1 / math.sqrt(2), -1j / math.sqrt(2)),
}
SPEC_GATES = ("pauli-x", "pauli-y", "pauli-z", "phase", "flip")


def _add_spec_args(p):
    p.add_argument("--gate", choices=SPEC_GATES, help="gate to synthesise")
    p.add_argument("--gamma", type=float, help="geometric phase (rad); overrides the phase offsets")
    p.add_argument("--axis-angle", type=float, help="azimuth of a flip gate's axis (rad)")
    _add_drive_args(p)


def _add_drive_args(p):
    p.add_argument("--omega0", type=float, help="Rabi amplitude parameter (MHz)")
    p.add_argument("--delta0", type=float, help="detuning amplitude parameter (MHz)")
    p.add_argument("--tau", type=float, help="segment length (us); default 0.8/(2 omega0)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with parameter values")
    common.add_argument("--out", type=Path, help="output directory (default: current directory)")
    common.add_argument("--seed", type=int, help="master seed (falls back to $SAGQG_SEED, then 0)")
    common.add_argument("--backend", choices=("numba", "numpy"), help="propagation kernels")

    parser = argparse.ArgumentParser(prog="sagqg", description="Superadiabatic geometric gate simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", parents=[common], help="sampled drive waveforms")
    _add_spec_args(p)
    p.add_argument("--points", type=int, help="samples per segment")

    p = sub.add_parser("trajectory", parents=[common], help="Bloch trajectory and stroboscopic readout")
    _add_spec_args(p)
    p.add_argument("--samples", type=int, help="number of uniformly spaced samples")
    p.add_argument("--initial", choices=sorted(_INITIAL_STATES), help="initial state")

    p = sub.add_parser("qpt", parents=[common], help="process tomography of a gate")
    p.add_argument("--gate", choices=("identity", "pauli-x", "pauli-y", "pauli-z", "hadamard"))
    p.add_argument("--shots", type=int, help="shots per setting; 0 records exact populations")
    p.add_argument("--noise", help="e.g. detuning:0.05,amplitude:0.01,timing:0,clip:7")
    p.add_argument("--project-cp", action="store_true", default=None, help="clip chi to the CP cone")
    _add_drive_args(p)

    p = sub.add_parser("rb", parents=[common], help="randomized benchmarking")
    p.add_argument("--gateset", choices=("sagqg", "dynamic", "both"))
    p.add_argument("--noise", help="e.g. detuning:0.053")
    p.add_argument("--n-sequences", type=int)
    p.add_argument("--n-pauli", type=int)
    p.add_argument("--lengths", help="comma-separated sequence lengths")
    p.add_argument("--shots", type=int)
    p.add_argument("--dynamic-rabi", type=float, help="Rabi frequency of the rectangular pulses (MHz)")
    _add_drive_args(p)

    p = sub.add_parser("gamma-sweep", parents=[common], help="readout population against gamma")
    p.add_argument("--family", choices=("phase", "flip"))
    p.add_argument("--n-gamma", type=int)
    p.add_argument("--axis-angle", type=float)
    _add_drive_args(p)

    p = sub.add_parser("tau-min-map", parents=[common], help="minimal segment length over (omega0, delta0)")
    p.add_argument("--omega-max", type=float)
    p.add_argument("--omega0-min", type=float)
    p.add_argument("--omega0-max", type=float)
    p.add_argument("--delta0-min", type=float)
    p.add_argument("--delta0-max", type=float)
    p.add_argument("--resolution", type=int)
    p.add_argument("--points", type=int, help="samples per segment for the peak search")

    p = sub.add_parser("fidelity-vs-tau", parents=[common], help="fidelity of a capped Pauli-X against tau")
    p.add_argument("--params", choices=("A", "B", "C"))
    p.add_argument("--omega0", type=float)
    p.add_argument("--delta0", type=float)
    p.add_argument("--omega-max", type=float)
    p.add_argument("--n-tau", type=int)
    p.add_argument("--tau-lo", type=float)
    p.add_argument("--tau-hi", type=float)
    return parser


def resolve_config(args: argparse.Namespace, environ=os.environ) -> dict:
    """Merge defaults, config file and flags for ``args.command``."""
    defaults = DEFAULTS[args.command]
    merged = dict(defaults)
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except ValueError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        loaded = loaded.get(args.command, loaded) if isinstance(loaded.get(args.command), dict) else loaded
        for key, value in loaded.items():
            norm = key.replace("-", "_")
            if norm == "seed":
                continue
            if norm not in defaults:
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            merged[norm] = value
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if args.command in _SEEDED:
        merged["seed"] = _resolve_seed(args, environ)
    return merged


def _resolve_seed(args, environ) -> int:
    seed = args.seed
    if seed is None and args.config is not None:
        try:
            seed = json.loads(Path(args.config).read_text()).get("seed")
        except (OSError, ValueError, AttributeError):
            seed = None
    if seed is None and environ.get("SAGQG_SEED"):
        try:
            seed = int(environ["SAGQG_SEED"])
        except ValueError:
            raise UsageError(f"SAGQG_SEED must be an integer, got {environ['SAGQG_SEED']!r}") from None
    seed = 0 if seed is None else int(seed)
    if not 0 <= seed < 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    return seed


def make_spec(cfg: dict) -> GateSpec:
    gate = cfg.get("gate")
    if gate is None:
        raise UsageError("--gate is required")
    kw = {"omega_0": cfg["omega0"], "delta_0": cfg["delta0"], "tau": cfg["tau"]}
    gamma = cfg.get("gamma")
    axis = cfg.get("axis_angle")
    if gate == "pauli-z":
        return GateSpec.phase_gate(math.pi / 2 if gamma is None else gamma, **kw)
    if gate in ("pauli-x", "pauli-y"):
        default_axis = 0.0 if gate == "pauli-x" else math.pi / 2
        return GateSpec.flip_gate(math.pi / 2 if gamma is None else gamma, default_axis if axis is None else axis, **kw)
    if gamma is None:
        raise UsageError(f"--gamma is required for --gate {gate}")
    if gate == "phase":
        return GateSpec.phase_gate(gamma, **kw)
    return GateSpec.flip_gate(gamma, 0.0 if axis is None else axis, **kw)


# ---------------------------------------------------------------------------
# commands


def cmd_schedule(cfg, out):
    spec = make_spec(cfg)
    table = schedule_table(build_schedule(spec), int(cfg["points"]))
    meta = metadata("schedule", cfg, gamma_rad=spec.gamma, total_time_us=spec.total_time)
    return [write_csv(out / "schedule.csv", table, meta)]


def cmd_trajectory(cfg, out):
    from .experiments import trajectory_experiment

    spec = make_spec(cfg)
    psi0 = np.array(_INITIAL_STATES[cfg["initial"]], dtype=np.complex128)
    traj = trajectory_experiment(spec, int(cfg["samples"]), psi0)
    meta = metadata("trajectory", cfg, gamma_rad=spec.gamma)
    return [
        write_csv(out / "trajectory_bloch.csv", traj.bloch_table(), meta),
        write_csv(out / "trajectory_states.csv", traj.state_table(), meta),
    ]


def _noise(cfg):
    from .noise import NoiseModel

    return NoiseModel.parse(cfg["noise"])


def cmd_qpt(cfg, out):
    from .tomography import run_qpt

    if cfg["gate"] is None:
        raise UsageError("--gate is required")
    report = run_qpt(
        cfg["gate"], _noise(cfg), int(cfg["shots"]), cfg["seed"], bool(cfg["project_cp"]),
        omega_0=cfg["omega0"], delta_0=cfg["delta0"], tau=cfg["tau"],
    )
    return [write_json(out / "qpt.json", report.to_dict(), metadata("qpt", cfg))]


def cmd_rb(cfg, out):
    from .benchmarking import RBConfig, run_rb

    try:
        lengths = tuple(int(v) for v in str(cfg["lengths"]).split(",")) if isinstance(cfg["lengths"], str) \
            else tuple(int(v) for v in cfg["lengths"])
    except ValueError:
        raise UsageError(f"bad --lengths {cfg['lengths']!r}") from None
    rb_cfg = RBConfig(
        n_sequences=int(cfg["n_sequences"]), n_pauli=int(cfg["n_pauli"]), lengths=lengths, shots=int(cfg["shots"]),
        seed=cfg["seed"], omega_0=cfg["omega0"], delta_0=cfg["delta0"], tau=cfg["tau"],
        dynamic_rabi=cfg["dynamic_rabi"],
    )
    noise = _noise(cfg)
    sets = ("sagqg", "dynamic") if cfg["gateset"] == "both" else (cfg["gateset"],)
    written = []
    for name in sets:
        result = run_rb(name, noise, rb_cfg)
        meta = metadata("rb", cfg, gateset=name)
        written.append(write_json(out / f"rb_{name}.json", result.to_dict(), meta))
        written.append(write_csv(out / f"rb_{name}.csv",
                                 {"length": result.lengths, "mean_fidelity": result.mean, "sem": result.sem}, meta))
    return written


def cmd_gamma_sweep(cfg, out):
    from .experiments import default_gamma_values, gamma_sweep

    sweep = gamma_sweep(
        None, default_gamma_values(int(cfg["n_gamma"])), GateFamily(cfg["family"]), float(cfg["axis_angle"]),
        omega_0=cfg["omega0"], delta_0=cfg["delta0"], tau=cfg["tau"],
    )
    rows = list(sweep.rows())
    cols = {"gamma_rad": [r[0] for r in rows], "state_index": [r[1] for r in rows], "p0": [r[2] for r in rows]}
    meta = metadata("gamma-sweep", cfg, states="0: |0>; 1: (|0>+|1>)/sqrt2; 2: (|0>-|1>)/sqrt2; 3: (|0>+i|1>)/sqrt2",
                    readout="(pi/2) about -y")
    return [write_csv(out / "gamma_sweep.csv", cols, meta)]


def cmd_tau_min_map(cfg, out):
    from .experiments import SweepGrid, tau_min_map

    grid = SweepGrid(
        (cfg["omega0_min"], cfg["omega0_max"]), (cfg["delta0_min"], cfg["delta0_max"]), int(cfg["resolution"]),
        cfg["omega_max"],
    )
    result = tau_min_map(grid, points_per_segment=int(cfg["points"]))
    rows = list(result.rows())
    cols = {"omega0_MHz": [r[0] for r in rows], "delta0_MHz": [r[1] for r in rows], "tau_min_us": [r[2] for r in rows]}
    w, d, t = result.argmin()
    meta = metadata("tau-min-map", cfg)
    summary = {"argmin_omega0_MHz": w, "argmin_delta0_MHz": d, "tau_min_us": t, "gate_time_us": 4 * t}
    return [write_csv(out / "tau_min_map.csv", cols, meta), write_json(out / "tau_min_map.json", summary, meta)]


def cmd_fidelity_vs_tau(cfg, out):
    from .experiments import PARAMETER_SETS, default_tau_values, fidelity_vs_tau

    if (cfg["omega0"] is None) != (cfg["delta0"] is None):
        raise UsageError("--omega0 and --delta0 must be given together")
    params = (cfg["omega0"], cfg["delta0"]) if cfg["omega0"] is not None else PARAMETER_SETS[cfg["params"]]
    n = int(cfg["n_tau"])
    if n < 2:
        raise UsageError("--n-tau must be >= 2")
    taus = default_tau_values(*params, cfg["omega_max"], n)
    if cfg["tau_lo"] is not None or cfg["tau_hi"] is not None:
        lo = taus[0] if cfg["tau_lo"] is None else cfg["tau_lo"]
        hi = taus[-1] if cfg["tau_hi"] is None else cfg["tau_hi"]
        if not 0 < lo < hi:
            raise UsageError("need 0 < tau-lo < tau-hi")
        taus = np.linspace(lo, hi, n)
    curve = fidelity_vs_tau(params, taus, cfg["omega_max"])
    meta = metadata("fidelity-vs-tau", cfg, omega0_MHz=params[0], delta0_MHz=params[1], tau_min_us=curve.tau_min,
                    t_pi_us=curve.t_pi, model="omega_S hard-clipped at omega_max (stand-in for the drive limit)")
    return [write_csv(out / "fidelity_vs_tau.csv", {"tau_us": curve.tau, "fidelity": curve.fidelity}, meta)]


COMMANDS = {
    "schedule": cmd_schedule,
    "trajectory": cmd_trajectory,
    "qpt": cmd_qpt,
    "rb": cmd_rb,
    "gamma-sweep": cmd_gamma_sweep,
    "tau-min-map": cmd_tau_min_map,
    "fidelity-vs-tau": cmd_fidelity_vs_tau,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.backend is not None:
            _kernels.backend = _kernels.select(args.backend)
        cfg = resolve_config(args)
        out = Path(".") if args.out is None else args.out
        out.mkdir(parents=True, exist_ok=True)
        for path in COMMANDS[args.command](cfg, out):
            print(path)
    except (UsageError, InvalidSpecError, ValueError, KeyError) as exc:
        print(f"sagqg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ArithmeticError, RuntimeError) as exc:
        print(f"sagqg {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
