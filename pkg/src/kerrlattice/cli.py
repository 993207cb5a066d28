"""Command-line entry point.

Subcommands take a JSON configuration file (schema-validated, unknown keys
rejected) and write CSV results plus a ``*.config.json`` sidecar recording
the fully resolved configuration for provenance:

- ``run``     one trajectory: evolve, classify, write samples
- ``sweep``   grid sweep via the sweep runner
- ``oracle``  exact chain steady state: occupations and g2 tables
- ``wigner``  asymptotic phase-space distributions per sublattice
- ``circuit`` lumped-element mapping, printed as JSON

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 inconclusive classification.
"""

from __future__ import annotations

import argparse
import dataclasses
import enum
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import __version__
from .circuit import CancellationTarget, CircuitParams, derive, solve_cancellation
from .dynamics import (
    AsymmetricCoherent,
    ClassifierControls,
    FockOccupation,
    IntegratorControls,
    Phase,
    SeedSpec,
    SymmetricVacuum,
    Trajectory,
    classify,
    evolve,
    evolve_auto,
)
from .errors import ConfigError, InconclusiveError, KerrLatticeError, NumericalError
from .lattice import (
    Geometry,
    LatticeSpec,
    SteadyStateMethod,
    g2_table,
    occupation,
    steady_state,
)
from .model import ModelParams
from .observables import wigner
from .sweep import AxisSpec, SweepSpec, run_sweep

__all__ = ["main"]

# --------------------------------------------------------------------------
# JSON schemas (additionalProperties: false everywhere: unknown keys reject)

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_COMPLEX = {
    "oneOf": [
        _NUM,
        {
            "type": "object",
            "properties": {"real": _NUM, "imag": _NUM},
            "required": ["real", "imag"],
            "additionalProperties": False,
        },
    ]
}

_MODEL = {
    "type": "object",
    "properties": {
        "delta": _NUM,
        "omega": _NUM,
        "zJ": _NUM,
        "U": _NUM,
        "zV": _NUM,
        "kappa": _POS,
        "t_ch": _NUM,
        "hard_core": {"type": "boolean"},
        "n_max": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

_SEED = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"kind": {"const": "SymmetricVacuum"}},
            "required": ["kind"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "AsymmetricCoherent"},
                "alpha_A": _COMPLEX,
                "alpha_B": _COMPLEX,
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "FockOccupation"},
                "n_A0": _NONNEG,
                "n_B0": _NONNEG,
            },
            "required": ["kind", "n_A0", "n_B0"],
            "additionalProperties": False,
        },
    ]
}

_INTEGRATOR = {
    "type": "object",
    "properties": {
        "dt": _POS,
        "sample_dt": _POS,
        "backend": {"enum": ["auto", "numba", "numpy"]},
        "tol_trace": _POS,
        "tol_herm": _POS,
        "tol_eig": _POS,
        "max_halvings": {"type": "integer", "minimum": 0},
        "min_dt": _POS,
        "abort_top_pop": _NONNEG,
    },
    "additionalProperties": False,
}

_CLASSIFIER = {
    "type": "object",
    "properties": {
        "t_transient": _POS,
        "t_window": _POS,
        "eps_stationary": _POS,
        "eps_crystal": _POS,
        "return_tol": _POS,
        "min_cycle_amplitude": _NONNEG,
    },
    "additionalProperties": False,
}

_AXIS = {
    "type": "object",
    "properties": {
        "name": {
            "enum": ["delta", "omega", "zJ", "U", "zV", "t_ch", "n_A0", "n_B0"]
        },
        "start": _NUM,
        "stop": _NUM,
        "n_points": {"type": "integer", "minimum": 2},
    },
    "required": ["name", "start", "stop", "n_points"],
    "additionalProperties": False,
}

_LATTICE = {
    "type": "object",
    "properties": {
        "n_sites": {"type": "integer", "minimum": 1},
        "n_max": {"type": "integer", "minimum": 1},
        "geometry": {"enum": ["open_chain", "periodic_chain"]},
        "dim_cap": {"type": "integer", "minimum": 2},
    },
    "required": ["n_sites", "n_max"],
    "additionalProperties": False,
}

_GRID = {
    "type": "object",
    "properties": {
        "x_min": _NUM,
        "x_max": _NUM,
        "p_min": _NUM,
        "p_max": _NUM,
        "n_points": {"type": "integer", "minimum": 2},
    },
    "additionalProperties": False,
}

_CIRCUIT = {
    "type": "object",
    "properties": {
        "C": _POS,
        "L": _POS,
        "C_J": _POS,
        "E_J": _POS,
        "z": {"type": "integer", "minimum": 1},
    },
    "required": ["C", "L"],
    "additionalProperties": False,
}

MODE_SCHEMAS = {
    "run": {
        "type": "object",
        "properties": {
            "mode": {"const": "run"},
            "params": _MODEL,
            "seed": _SEED,
            "t_final": _POS,
            "integrator": _INTEGRATOR,
            "classifier": _CLASSIFIER,
            "output": {"type": "string"},
        },
        "required": ["mode", "params"],
        "additionalProperties": False,
    },
    "sweep": {
        "type": "object",
        "properties": {
            "mode": {"const": "sweep"},
            "base": _MODEL,
            "axis1": _AXIS,
            "axis2": _AXIS,
            "seed": _SEED,
            "t_final": _POS,
            "integrator": _INTEGRATOR,
            "classifier": _CLASSIFIER,
            "output": {"type": "string"},
        },
        "required": ["mode", "base", "axis1", "output"],
        "additionalProperties": False,
    },
    "oracle": {
        "type": "object",
        "properties": {
            "mode": {"const": "oracle"},
            "lattice": _LATTICE,
            "params": _MODEL,
            "method": {"enum": ["null_space", "long_time"]},
            "tol": _POS,
            "output": {"type": "string"},
        },
        "required": ["mode", "lattice", "params", "output"],
        "additionalProperties": False,
    },
    "wigner": {
        "type": "object",
        "properties": {
            "mode": {"const": "wigner"},
            "params": _MODEL,
            "seed": _SEED,
            "t_final": _POS,
            "integrator": _INTEGRATOR,
            "classifier": _CLASSIFIER,
            "grid": _GRID,
            "n_phases": {"type": "integer", "minimum": 1},
            "output": {"type": "string"},
        },
        "required": ["mode", "params", "output"],
        "additionalProperties": False,
    },
    "circuit": {
        "type": "object",
        "properties": {
            "mode": {"const": "circuit"},
            "circuit": _CIRCUIT,
            "solve": {
                "type": "object",
                "properties": {"target": {"enum": ["E_J", "C_J"]}},
                "required": ["target"],
                "additionalProperties": False,
            },
            "acknowledge_sign_convention": {"type": "boolean"},
            "kappa_hz": _POS,
        },
        "required": ["mode", "circuit"],
        "additionalProperties": False,
    },
}

#: Bulk coordination number used to convert z-scaled couplings to bare
#: per-bond ones for the exact chains.
CHAIN_COORDINATION = 2


# --------------------------------------------------------------------------
# config loading and object construction


def load_config(path: Path, mode: str) -> dict:
    try:
        raw = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict) or cfg.get("mode") != mode:
        raise ConfigError(
            f"config mode {cfg.get('mode')!r} does not match subcommand {mode!r}"
        )
    try:
        jsonschema.validate(cfg, MODE_SCHEMAS[mode])
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation: {exc.message}") from exc
    return cfg


def _as_complex(value) -> complex:
    if isinstance(value, dict):
        return complex(value["real"], value["imag"])
    return complex(value)


def _seed_from(cfg: Optional[dict]) -> SeedSpec:
    if cfg is None:
        return SymmetricVacuum()
    kind = cfg["kind"]
    if kind == "SymmetricVacuum":
        return SymmetricVacuum()
    if kind == "AsymmetricCoherent":
        kwargs = {}
        if "alpha_A" in cfg:
            kwargs["alpha_A"] = _as_complex(cfg["alpha_A"])
        if "alpha_B" in cfg:
            kwargs["alpha_B"] = _as_complex(cfg["alpha_B"])
        return AsymmetricCoherent(**kwargs)
    return FockOccupation(n_A0=cfg["n_A0"], n_B0=cfg["n_B0"])


def _params_from(cfg: dict) -> ModelParams:
    return ModelParams(**cfg)


def _integrator_from(cfg: Optional[dict]) -> IntegratorControls:
    return IntegratorControls(**(cfg or {}))


def _classifier_from(cfg: Optional[dict]) -> ClassifierControls:
    return ClassifierControls(**(cfg or {}))


def _dataclass_json(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _dataclass_json(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _dataclass_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_dataclass_json(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, complex):
        return {"real": obj.real, "imag": obj.imag}
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _write_sidecar(out_file: Path, resolved: dict) -> None:
    sidecar = out_file.with_name(out_file.stem + ".config.json")
    sidecar.write_text(
        json.dumps(
            {"version": __version__, "resolved": _dataclass_json(resolved)},
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )


def _emit(payload: dict) -> None:
    print(json.dumps(_dataclass_json(payload), sort_keys=True))


# --------------------------------------------------------------------------
# subcommands


def _trajectory_csv(traj: Trajectory) -> str:
    header = "t,re_a_A,im_a_A,re_a_B,im_a_B,n_A,n_B,residual_A,residual_B"
    cols = [
        traj.times,
        traj.a_A.real,
        traj.a_A.imag,
        traj.a_B.real,
        traj.a_B.imag,
        traj.n_A,
        traj.n_B,
        traj.residual_A,
        traj.residual_B,
    ]
    lines = [header]
    for k in range(len(traj.times)):
        lines.append(",".join(repr(float(c[k])) for c in cols))
    return "\n".join(lines) + "\n"


def _cmd_run(cfg: dict, outdir: Path, workers: Optional[int]) -> int:
    params = _params_from(cfg["params"])
    seed = _seed_from(cfg.get("seed"))
    t_final = cfg.get("t_final", 300.0)
    integrator = _integrator_from(cfg.get("integrator"))
    classifier = _classifier_from(cfg.get("classifier"))

    traj, n_used = evolve_auto(params, seed, t_final, integrator)
    out_file = outdir / cfg.get("output", "trajectory.csv")
    out_file.write_text(_trajectory_csv(traj))
    _write_sidecar(
        out_file,
        {
            "mode": "run",
            "params": params,
            "seed": seed,
            "t_final": t_final,
            "integrator": integrator,
            "classifier": classifier,
            "n_max_used": n_used,
        },
    )
    label = classify(traj, classifier)  # may raise InconclusiveError (exit 4)
    _emit(
        {
            "phase": label.kind.value,
            "delta_n": label.delta_n,
            "period": label.period,
            "n_max_used": n_used,
            "output": str(out_file),
        }
    )
    return 0


def _cmd_sweep(cfg: dict, outdir: Path, workers: Optional[int]) -> int:
    axis2 = cfg.get("axis2")
    spec = SweepSpec(
        base=_params_from(cfg["base"]),
        axis1=AxisSpec(**cfg["axis1"]),
        axis2=AxisSpec(**axis2) if axis2 else None,
        seed=_seed_from(cfg.get("seed")),
        t_final=cfg.get("t_final", 300.0),
        integrator=_integrator_from(cfg.get("integrator")),
        classifier=_classifier_from(cfg.get("classifier")),
        output_path=outdir / cfg["output"],
        workers=workers,
    )
    table = run_sweep(spec)
    counts = {}
    for row in table.rows:
        counts[row.phase] = counts.get(row.phase, 0) + 1
    _emit({"rows": len(table.rows), "phases": counts, "output": cfg["output"]})
    return 0


def _cmd_oracle(cfg: dict, outdir: Path, workers: Optional[int]) -> int:
    lat = dict(cfg["lattice"])
    if "geometry" in lat:
        lat["geometry"] = Geometry(lat["geometry"])
    spec = LatticeSpec(**lat)
    scaled = _params_from(cfg["params"])
    # the exact chain takes bare per-bond couplings; configs carry the
    # z-scaled ones used everywhere else, so convert here and record both
    z = CHAIN_COORDINATION
    bare = replace(scaled, zJ=scaled.zJ / z, zV=scaled.zV / z, t_ch=scaled.t_ch / z)
    method = SteadyStateMethod(cfg.get("method", "long_time"))
    state = steady_state(spec, bare, method, tol=cfg.get("tol", 1e-8))

    stem = outdir / cfg["output"]
    occ_file = stem.with_name(stem.stem + "_occupations.csv")
    occ_lines = ["site,n"] + [
        f"{i},{occupation(state, i)!r}" for i in range(spec.n_sites)
    ]
    occ_file.write_text("\n".join(occ_lines) + "\n")

    g2_file = stem.with_name(stem.stem + "_g2.csv")
    g2_lines = ["i,j,r,g2"] + [
        f"{i},{j},{r},{val!r}" for i, j, r, val in g2_table(state)
    ]
    g2_file.write_text("\n".join(g2_lines) + "\n")

    _write_sidecar(
        occ_file,
        {
            "mode": "oracle",
            "lattice": lat,
            "coordination_z": z,
            "params_z_scaled": scaled,
            "params_bare": bare,
            "method": method.value,
        },
    )
    _emit(
        {
            "occupations": str(occ_file),
            "g2": str(g2_file),
            "dim": spec.dim,
            "method": method.value,
        }
    )
    return 0


def _wigner_axes(cfg: Optional[dict]) -> tuple[np.ndarray, np.ndarray]:
    cfg = cfg or {}
    n = cfg.get("n_points", 81)
    xs = np.linspace(cfg.get("x_min", -4.0), cfg.get("x_max", 4.0), n)
    ps = np.linspace(cfg.get("p_min", -4.0), cfg.get("p_max", 4.0), n)
    return xs, ps


def _cmd_wigner(cfg: dict, outdir: Path, workers: Optional[int]) -> int:
    params = _params_from(cfg["params"])
    seed = _seed_from(cfg.get("seed"))
    t_final = cfg.get("t_final", 300.0)
    integrator = _integrator_from(cfg.get("integrator"))
    classifier = _classifier_from(cfg.get("classifier"))
    xs, ps = _wigner_axes(cfg.get("grid"))

    traj, n_used = evolve_auto(params, seed, t_final, integrator)
    label = classify(traj, classifier)

    # snapshots: the asymptotic state, plus (for a limit cycle) equally
    # spaced phases across one period
    states = [traj.final]
    if label.kind is Phase.OSCILLATING:
        fixed = params.with_n_max(n_used)
        n_phases = cfg.get("n_phases", 4)
        state = traj.final
        for _ in range(n_phases - 1):
            state = evolve(
                state, fixed, state.t + label.period / n_phases, integrator
            ).final
            states.append(state)

    stem = outdir / cfg["output"]
    files = []
    for k, state in enumerate(states):
        for tag, rho in (("A", state.rho_A), ("B", state.rho_B)):
            grid = wigner(rho, xs, ps)
            f = stem.with_name(f"{stem.stem}_{tag}_phase{k}.csv")
            grid.to_csv(f)
            files.append(str(f))

    _write_sidecar(
        stem.with_name(stem.stem + "_A_phase0.csv"),
        {
            "mode": "wigner",
            "params": params,
            "seed": seed,
            "t_final": t_final,
            "integrator": integrator,
            "classifier": classifier,
            "n_max_used": n_used,
            "phase": label.kind.value,
            "period": label.period,
        },
    )
    _emit(
        {
            "phase": label.kind.value,
            "delta_n": label.delta_n,
            "period": label.period,
            "files": files,
        }
    )
    return 0


def _cmd_circuit(cfg: dict, outdir: Path, workers: Optional[int]) -> int:
    circ_cfg = dict(cfg["circuit"])
    if "solve" in cfg:
        target = CancellationTarget(cfg["solve"]["target"])
        known = {k: circ_cfg.get(k) for k in ("C_J", "E_J")}
        if known.get(target.value) is not None:
            raise ConfigError(
                f"solving for {target.value}, but the circuit block fixes it"
            )
        circuit = solve_cancellation(
            circ_cfg["C"],
            circ_cfg["L"],
            circ_cfg.get("z", 2),
            target,
            C_J=known["C_J"] if target is CancellationTarget.E_J else None,
            E_J=known["E_J"] if target is CancellationTarget.C_J else None,
        )
    else:
        missing = [k for k in ("C_J", "E_J") if k not in circ_cfg]
        if missing:
            raise ConfigError(
                f"circuit block must fix {missing} (or use a 'solve' block)"
            )
        circuit = CircuitParams(**circ_cfg)

    derived = derive(circuit)
    payload = {
        "circuit": circuit,
        "derived": derived,
        "frequency_hz": derived.frequency,
    }

    kappa_hz = cfg.get("kappa_hz")
    if kappa_hz is not None:
        if cfg.get("acknowledge_sign_convention"):
            payload["model_params"] = {
                "U": derived.U / kappa_hz,
                "zV": circuit.z * derived.V / kappa_hz,
                "t_ch": circuit.z * derived.t_ch / kappa_hz,
                "note": (
                    "signed values; the derived interactions are attractive "
                    "(negative U, V)"
                ),
            }
        else:
            payload["model_params"] = None
            payload["note"] = (
                "set acknowledge_sign_convention: true to emit model "
                "parameters (derived U, V are negative)"
            )
    _emit(payload)
    return 0


COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "wigner": _cmd_wigner,
    "circuit": _cmd_circuit,
}


def _fail(exc: Exception, code: int) -> int:
    sys.stderr.write(
        json.dumps(
            {
                "error": type(exc).__name__,
                "message": str(exc),
                "exit_code": code,
                **(
                    {"diagnostics": _dataclass_json(exc.diagnostics)}
                    if hasattr(exc, "diagnostics")
                    else {}
                ),
            },
            sort_keys=True,
        )
        + "\n"
    )
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrlattice",
        description="Driven-dissipative Kerr-lattice simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"{name} mode (JSON-configured)")
        p.add_argument("config", type=Path, help="path to the JSON config")
        p.add_argument(
            "-o",
            "--output-dir",
            type=Path,
            default=Path("."),
            help="directory for result files (default: current directory)",
        )
        p.add_argument(
            "-w",
            "--workers",
            type=int,
            default=None,
            help="worker processes for sweeps (default: env/cpu count)",
        )
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command)
        outdir = args.output_dir
        if not outdir.is_dir():
            raise ConfigError(f"output directory {outdir} does not exist")
        return COMMANDS[args.command](cfg, outdir, args.workers)
    except ConfigError as exc:
        return _fail(exc, 2)
    except InconclusiveError as exc:
        return _fail(exc, 4)
    except NumericalError as exc:
        return _fail(exc, 3)
    except KerrLatticeError as exc:  # pragma: no cover - safety net
        return _fail(exc, 3)


if __name__ == "__main__":
    sys.exit(main())
