"""JSON experiment configuration and the bundled figure presets."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .circuit import CircuitSpec, freeze_params, random_clements, single_phase_circuit
from .errors import ConfigError

SCHEMA_VERSION = 1

_number_list = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_int_list = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "modes", "replicas", "squeezing", "circuit", "sigma"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "modes": {"type": "integer", "minimum": 1},
        "replicas": {"type": "integer", "minimum": 1},
        "squeezing": {
            "oneOf": [
                {"type": "number"},
                _number_list,
                {"type": "object", "patternProperties": {"^[0-9]+$": _number_list},
                 "additionalProperties": False},
            ]
        },
        "input_phases": {
            "oneOf": [
                _number_list,
                {"type": "object", "patternProperties": {"^[0-9]+$": _number_list},
                 "additionalProperties": False},
            ]
        },
        "circuit": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["preset"],
                    "additionalProperties": False,
                    "properties": {
                        "preset": {"const": "clements"},
                        "seed": {"type": "integer", "minimum": 0},
                        "frozen": {"type": "integer", "minimum": 0},
                    },
                },
                {
                    "type": "object",
                    "required": ["gates"],
                    "additionalProperties": False,
                    "properties": {
                        "gates": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "required": ["type"],
                                "properties": {
                                    "type": {"enum": ["squeeze", "phase", "beamsplitter"]},
                                    "mode": {"type": "integer", "minimum": 0},
                                    "i": {"type": "integer", "minimum": 0},
                                    "j": {"type": "integer", "minimum": 0},
                                    "r": {"type": "number"},
                                    "phi": {"type": "number"},
                                    "theta": {"type": "number"},
                                    "noisy": {"type": "boolean"},
                                },
                            },
                        }
                    },
                },
            ]
        },
        "sigma": {
            "oneOf": [
                {"type": "number", "minimum": 0},
                {
                    "type": "object",
                    "required": ["from", "to", "steps"],
                    "additionalProperties": False,
                    "properties": {
                        "from": {"type": "number", "minimum": 0},
                        "to": {"type": "number", "minimum": 0},
                        "steps": {"type": "integer", "minimum": 2},
                    },
                },
            ]
        },
        "samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "weighting": {"enum": ["herald", "uniform"]},
        "cutoff": {"type": "integer", "minimum": 1},
        "output": {"type": "string"},
        "record_samples": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sigma": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                "n": _int_list,
                "N": _int_list,
            },
        },
    },
}


@dataclass
class ExperimentConfig:
    modes: int
    replicas: int
    squeezing: object
    circuit: dict
    sigma: object
    samples: int = 10_000
    seed: int = 0
    weighting: str = "herald"
    cutoff: int | None = None
    output: str | None = None
    input_phases: object = None
    record_samples: list = field(default_factory=list)
    grid: dict = field(default_factory=dict)

    def sigmas(self) -> list[float]:
        if "sigma" in self.grid:
            return [float(s) for s in self.grid["sigma"]]
        if isinstance(self.sigma, dict):
            return [float(s) for s in np.linspace(self.sigma["from"], self.sigma["to"], self.sigma["steps"])]
        return [float(self.sigma)]

    def mode_counts(self) -> list[int]:
        return list(self.grid.get("N", [self.modes]))

    def replica_counts(self) -> list[int]:
        return list(self.grid.get("n", [self.replicas]))

    def squeezing_for(self, N: int) -> tuple:
        return _per_mode(self.squeezing, N, "squeezing")

    def input_phases_for(self, N: int):
        if self.input_phases is None:
            return None
        return _per_mode(self.input_phases, N, "input_phases")

    def target_for(self, N: int) -> CircuitSpec:
        if "gates" in self.circuit:
            try:
                spec = CircuitSpec.from_dict({"modes": N, "gates": self.circuit["gates"]})
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"circuit.gates: {exc}") from exc
            return spec
        rng = np.random.default_rng(self.circuit.get("seed", 0))
        if N == 1:
            # a one-mode mesh has no free parameters; use one noisy phase instead
            spec = single_phase_circuit(float(rng.uniform(0.0, 2 * np.pi)))
        else:
            spec = random_clements(N, rng)
        frozen = self.circuit.get("frozen", 0)
        if frozen:
            if frozen > spec.noisy_param_count:
                raise ConfigError(f"circuit.frozen: {frozen} exceeds {spec.noisy_param_count} noisy params")
            spec = freeze_params(spec, frozen)
        return spec

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "modes": self.modes,
            "replicas": self.replicas,
            "squeezing": self.squeezing,
            "circuit": self.circuit,
            "sigma": self.sigma,
            "samples": self.samples,
            "seed": self.seed,
            "weighting": self.weighting,
        }
        for key in ("cutoff", "output", "input_phases"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        if self.record_samples:
            out["record_samples"] = self.record_samples
        if self.grid:
            out["grid"] = self.grid
        return out


def _per_mode(value, N: int, name: str) -> tuple:
    if isinstance(value, dict):
        if str(N) not in value:
            raise ConfigError(f"{name}: no entry for N={N}")
        value = value[str(N)]
    if isinstance(value, (int, float)):
        return (float(value),) * N
    if len(value) != N:
        raise ConfigError(f"{name}: expected {N} values, got {len(value)}")
    return tuple(float(v) for v in value)


def _format_path(path) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def parse_config(data: dict) -> ExperimentConfig:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"field {_format_path(e.absolute_path)}: {e.message}" for e in errors]
        raise ConfigError("invalid config:\n  " + "\n  ".join(lines))
    cfg = ExperimentConfig(
        modes=data["modes"],
        replicas=data["replicas"],
        squeezing=data["squeezing"],
        circuit=data["circuit"],
        sigma=data["sigma"],
        samples=data.get("samples", 10_000),
        seed=data.get("seed", 0),
        weighting=data.get("weighting", "herald"),
        cutoff=data.get("cutoff"),
        output=data.get("output"),
        input_phases=data.get("input_phases"),
        record_samples=list(data.get("record_samples", [])),
        grid=dict(data.get("grid", {})),
    )
    for n in cfg.replica_counts():
        if n & (n - 1):
            raise ConfigError(f"field replicas: n={n} is not a power of two")
    for N in cfg.mode_counts():
        cfg.squeezing_for(N)
        cfg.input_phases_for(N)
    if "gates" in cfg.circuit and len(cfg.mode_counts()) > 1:
        raise ConfigError("field circuit.gates: an explicit gate list cannot be swept over N")
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config(data)


HALF_PI = math.pi / 2

# Circuit seeds and Monte-Carlo sample counts below are free choices; the
# squeezing and noise ranges are what define each preset.
PRESETS = {
    "fig-fid2mode": [
        {"kind": "run", "name": "r0.5-0.7", "config": {
            "modes": 2, "replicas": 1, "squeezing": [0.5, 0.7], "input_phases": [0.0, HALF_PI],
            "circuit": {"preset": "clements", "seed": 2024},
            "sigma": {"from": 0.0, "to": 0.1, "steps": 11}, "samples": 10_000, "seed": 1,
            "grid": {"n": [1, 2, 4, 8]}}},
        {"kind": "run", "name": "r0.2-0.805", "config": {
            "modes": 2, "replicas": 1, "squeezing": [0.2, 0.805], "input_phases": [0.0, HALF_PI],
            "circuit": {"preset": "clements", "seed": 2024},
            "sigma": {"from": 0.0, "to": 0.1, "steps": 11}, "samples": 10_000, "seed": 1,
            "grid": {"n": [1, 2, 4, 8]}}},
        {"kind": "run", "name": "prob-r0.7-0.7", "config": {
            "modes": 2, "replicas": 2, "squeezing": [0.7, 0.7], "input_phases": [0.0, HALF_PI],
            "circuit": {"preset": "clements", "seed": 2024},
            "sigma": {"from": 0.0, "to": 0.1, "steps": 11}, "samples": 10_000, "seed": 1}},
    ],
    "fig-345modes": [
        {"kind": "run", "name": "N3", "config": {
            "modes": 3, "replicas": 1, "squeezing": [0.5, 0.6, 0.7],
            "circuit": {"preset": "clements", "seed": 3},
            "sigma": {"from": 0.0, "to": 0.1, "steps": 11}, "samples": 10_000, "seed": 1,
            "grid": {"n": [1, 2, 4]}}},
        {"kind": "run", "name": "N4", "config": {
            "modes": 4, "replicas": 1, "squeezing": [0.3, 0.4, 0.5, 0.6],
            "circuit": {"preset": "clements", "seed": 4},
            "sigma": {"from": 0.0, "to": 0.1, "steps": 11}, "samples": 10_000, "seed": 1,
            "grid": {"n": [1, 2]}}},
        {"kind": "run", "name": "N5", "config": {
            "modes": 5, "replicas": 1, "squeezing": [0.3, 0.4, 0.5, 0.6, 0.7],
            "circuit": {"preset": "clements", "seed": 5},
            "sigma": {"from": 0.0, "to": 0.1, "steps": 11}, "samples": 10_000, "seed": 1,
            "grid": {"n": [1, 2]}}},
    ],
    "fig-10mode": [
        {"kind": "run", "name": "N10", "config": {
            "modes": 10, "replicas": 1, "squeezing": 0.1,
            "circuit": {"preset": "clements", "seed": 10},
            "sigma": {"from": 0.0, "to": 0.01, "steps": 6}, "samples": 2_000, "seed": 1,
            "grid": {"n": [1, 2]}}},
        {"kind": "powerlaw", "name": "powerlaw-N10",
         "params": {"modes": [10], "n": [1, 2], "sigma_from": 0.0, "sigma_to": 0.01, "steps": 6,
                    "r_base": 0.1}},
    ],
    "fig-powerlaw-agreement": [
        {"kind": "run", "name": "N5-k24", "config": {
            "modes": 5, "replicas": 1, "squeezing": 0.1,
            "circuit": {"preset": "clements", "seed": 8},
            "sigma": {"from": 0.0, "to": 0.02, "steps": 5}, "samples": 5_000, "seed": 1,
            "grid": {"n": [1, 2]}}},
        {"kind": "run", "name": "N5-k19", "config": {
            "modes": 5, "replicas": 1, "squeezing": 0.1,
            "circuit": {"preset": "clements", "seed": 8, "frozen": 5},
            "sigma": {"from": 0.0, "to": 0.02, "steps": 5}, "samples": 5_000, "seed": 1,
            "grid": {"n": [1, 2]}}},
        {"kind": "powerlaw", "name": "powerlaw-k24",
         "params": {"k": [24], "n": [1, 2], "sigma_from": 0.0, "sigma_to": 0.02, "steps": 5,
                    "r_base": 0.1}},
        {"kind": "powerlaw", "name": "powerlaw-k19",
         "params": {"k": [19], "n": [1, 2], "sigma_from": 0.0, "sigma_to": 0.02, "steps": 5,
                    "r_base": 0.1}},
    ],
    "fig-216mode": [
        {"kind": "powerlaw", "name": "powerlaw-large",
         "params": {"modes": [50, 100, 150, 216], "n": [1, 2, 4], "sigma_from": 0.0,
                    "sigma_to": 0.05, "steps": 11, "r_base": 0.1}},
    ],
    "fig-enhancement": [
        {"kind": "powerlaw", "name": "enhancement",
         "params": {"modes": [2, 3, 5, 10], "n": [1, 2, 4], "sigma_from": 0.0,
                    "sigma_to": 0.1, "steps": 11, "r_base": 0.1}},
    ],
}


def preset_jobs(preset_id: str) -> list[dict]:
    if preset_id not in PRESETS:
        raise ConfigError(f"unknown preset {preset_id!r}; choose from {', '.join(sorted(PRESETS))}")
    jobs = copy.deepcopy(PRESETS[preset_id])
    for job in jobs:
        if job["kind"] == "run":
            job["config"]["schema_version"] = SCHEMA_VERSION
    return jobs
