"""Linear-optical circuits as gate lists, Clements meshes and parameter noise."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .errors import DimensionError
from .gaussian import beamsplitter_transform, embed, phase_transform, squeeze_transform


@dataclass(frozen=True)
class Squeeze:
    mode: int
    r: float
    noisy: bool = field(default=False, init=False)


@dataclass(frozen=True)
class Phase:
    mode: int
    phi: float
    noisy: bool = True


@dataclass(frozen=True)
class BeamSplitter:
    i: int
    j: int
    theta: float
    noisy: bool = True

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("beamsplitter needs two distinct modes")


Gate = Union[Squeeze, Phase, BeamSplitter]


def _gate_modes(gate: Gate) -> tuple[int, ...]:
    if isinstance(gate, BeamSplitter):
        return (gate.i, gate.j)
    return (gate.mode,)


@dataclass(frozen=True)
class CircuitSpec:
    """An ordered gate list on ``modes`` modes; the first gate acts first."""

    modes: int
    gates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for gate in self.gates:
            if any(not 0 <= m < self.modes for m in _gate_modes(gate)):
                raise DimensionError(f"{gate} does not fit a {self.modes}-mode circuit")

    @property
    def noisy_param_count(self) -> int:
        return sum(1 for g in self.gates if g.noisy)

    @property
    def passive(self) -> bool:
        return not any(isinstance(g, Squeeze) for g in self.gates)

    def to_dict(self) -> dict:
        out = []
        for g in self.gates:
            if isinstance(g, Squeeze):
                out.append({"type": "squeeze", "mode": g.mode, "r": g.r})
            elif isinstance(g, Phase):
                out.append({"type": "phase", "mode": g.mode, "phi": g.phi, "noisy": g.noisy})
            else:
                out.append(
                    {"type": "beamsplitter", "i": g.i, "j": g.j, "theta": g.theta, "noisy": g.noisy}
                )
        return {"modes": self.modes, "gates": out}

    @classmethod
    def from_dict(cls, data: dict) -> "CircuitSpec":
        gates = []
        for g in data["gates"]:
            kind = g["type"]
            if kind == "squeeze":
                gates.append(Squeeze(g["mode"], float(g["r"])))
            elif kind == "phase":
                gates.append(Phase(g["mode"], float(g["phi"]), bool(g.get("noisy", True))))
            elif kind == "beamsplitter":
                gates.append(
                    BeamSplitter(g["i"], g["j"], float(g["theta"]), bool(g.get("noisy", True)))
                )
            else:
                raise ValueError(f"unknown gate type {kind!r}")
        return cls(int(data["modes"]), tuple(gates))


@dataclass(frozen=True)
class NoiseModel:
    """Additive zero-mean Gaussian noise of standard deviation ``sigma`` (radians)."""

    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")

    @property
    def variance(self) -> float:
        return self.sigma**2


def mesh_size(N: int) -> int:
    return N * (N - 1) // 2


def clements_mesh(N: int, thetas, phis, output_phases) -> CircuitSpec:
    """Rectangular mesh of nearest-neighbour beamsplitters.

    Column ``c`` holds the pairs ``(i, i+1)`` with ``i = c mod 2, c mod 2 + 2,
    ...``; each beamsplitter is preceded by a phase shifter on its upper mode.
    Output phases follow on modes ``0..N-2``. The last mode's output phase is
    the unobservable global reference and is fixed to zero (noise-free), so the
    mesh has ``N**2 - 1`` noisy parameters.
    """
    thetas = list(np.atleast_1d(np.asarray(thetas, dtype=float)))
    phis = list(np.atleast_1d(np.asarray(phis, dtype=float)))
    output_phases = list(np.atleast_1d(np.asarray(output_phases, dtype=float)))
    m = mesh_size(N)
    if len(thetas) != m or len(phis) != m:
        raise ValueError(f"{N}-mode mesh needs {m} thetas and {m} phis")
    if len(output_phases) == N:
        if output_phases[-1] != 0.0:
            raise ValueError("the last output phase is the global reference and must be 0")
        output_phases = output_phases[:-1]
    if len(output_phases) != N - 1:
        raise ValueError(f"{N}-mode mesh needs {N} output phases (last fixed to 0)")

    gates: list[Gate] = []
    k = 0
    for col in range(N):
        for i in range(col % 2, N - 1, 2):
            gates.append(Phase(i, phis[k]))
            gates.append(BeamSplitter(i, i + 1, thetas[k]))
            k += 1
    for mode, phi in enumerate(output_phases):
        gates.append(Phase(mode, phi))
    gates.append(Phase(N - 1, 0.0, noisy=False))
    return CircuitSpec(N, tuple(gates))


def random_clements(N: int, rng: np.random.Generator) -> CircuitSpec:
    """Mesh with theta ~ U[0, pi/2] and phi ~ U[0, 2 pi) drawn from ``rng``."""
    m = mesh_size(N)
    thetas = rng.uniform(0.0, np.pi / 2, m)
    phis = rng.uniform(0.0, 2 * np.pi, m)
    out = rng.uniform(0.0, 2 * np.pi, N - 1)
    return clements_mesh(N, thetas, phis, out)


def single_phase_circuit(phi: float = 0.0) -> CircuitSpec:
    """One noisy phase shifter on one mode: the single-mode base case."""
    return CircuitSpec(1, (Phase(0, phi),))


def count_noisy_params(circuit: CircuitSpec) -> int:
    return circuit.noisy_param_count


def freeze_params(circuit: CircuitSpec, count: int) -> CircuitSpec:
    """Clear the noisy flag of the last ``count`` noisy parameters."""
    if not 0 <= count <= circuit.noisy_param_count:
        raise ValueError(f"cannot freeze {count} of {circuit.noisy_param_count} noisy params")
    gates = list(circuit.gates)
    remaining = count
    for idx in range(len(gates) - 1, -1, -1):
        if remaining == 0:
            break
        if gates[idx].noisy:
            gates[idx] = replace(gates[idx], noisy=False)
            remaining -= 1
    return CircuitSpec(circuit.modes, tuple(gates))


def apply_noise(circuit: CircuitSpec, deltas) -> CircuitSpec:
    """Add ``deltas`` (one per noisy parameter, gate order) to the noisy angles."""
    deltas = np.asarray(deltas, dtype=float).ravel()
    if deltas.size != circuit.noisy_param_count:
        raise ValueError(f"expected {circuit.noisy_param_count} deltas, got {deltas.size}")
    gates = []
    k = 0
    for g in circuit.gates:
        if g.noisy:
            if isinstance(g, Phase):
                g = replace(g, phi=g.phi + float(deltas[k]))
            else:
                g = replace(g, theta=g.theta + float(deltas[k]))
            k += 1
        gates.append(g)
    return CircuitSpec(circuit.modes, tuple(gates))


def draw_deltas(circuit: CircuitSpec, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    return noise.sigma * rng.standard_normal(circuit.noisy_param_count)


def sample_noisy_instance(
    circuit: CircuitSpec, noise: NoiseModel, rng: np.random.Generator
) -> CircuitSpec:
    """Independent noisy copy; draws are consumed in gate order."""
    if noise.sigma == 0:
        return circuit
    return apply_noise(circuit, draw_deltas(circuit, noise, rng))


def gate_transform(gate: Gate, modes: int) -> np.ndarray:
    if isinstance(gate, Squeeze):
        r = np.zeros(modes)
        r[gate.mode] = gate.r
        return squeeze_transform(r)
    if isinstance(gate, Phase):
        return embed(phase_transform(gate.phi), modes, gate.mode)
    return beamsplitter_transform(gate.i, gate.j, gate.theta, modes)


def compile_to_symplectic(
    circuit: CircuitSpec, total_modes: int | None = None, offset: int = 0
) -> np.ndarray:
    """Product of the gate transforms, embedded at ``offset`` in ``total_modes``."""
    if total_modes is None:
        total_modes = circuit.modes
    if offset < 0 or offset + circuit.modes > total_modes:
        raise DimensionError(
            f"{circuit.modes}-mode circuit at offset {offset} exceeds {total_modes} modes"
        )
    S = np.eye(2 * circuit.modes)
    for gate in circuit.gates:
        S = gate_transform(gate, circuit.modes) @ S
    return embed(S, total_modes, offset)


def compile_batch(circuit: CircuitSpec, deltas: np.ndarray) -> np.ndarray:
    """Compile many noisy instances at once.

    ``deltas`` has shape ``(B, k)`` with ``k`` the noisy parameter count; the
    result has shape ``(B, 2N, 2N)`` and row ``b`` equals
    ``compile_to_symplectic(apply_noise(circuit, deltas[b]))``.
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.ndim != 2 or deltas.shape[1] != circuit.noisy_param_count:
        raise ValueError(f"deltas must have shape (B, {circuit.noisy_param_count})")
    B = deltas.shape[0]
    T = np.broadcast_to(np.eye(2 * circuit.modes), (B, 2 * circuit.modes, 2 * circuit.modes)).copy()
    k = 0
    for g in circuit.gates:
        if isinstance(g, Squeeze):
            T[:, 2 * g.mode, :] *= np.exp(-g.r)
            T[:, 2 * g.mode + 1, :] *= np.exp(g.r)
            continue
        base = g.phi if isinstance(g, Phase) else g.theta
        if g.noisy:
            angle = base + deltas[:, k]
            k += 1
        else:
            angle = np.full(B, base)
        c = np.cos(angle)[:, None]
        s = np.sin(angle)[:, None]
        if isinstance(g, Phase):
            x, p = T[:, 2 * g.mode, :].copy(), T[:, 2 * g.mode + 1, :].copy()
            T[:, 2 * g.mode, :] = c * x + s * p
            T[:, 2 * g.mode + 1, :] = -s * x + c * p
        else:
            for q in (0, 1):
                ri, rj = T[:, 2 * g.i + q, :].copy(), T[:, 2 * g.j + q, :].copy()
                T[:, 2 * g.i + q, :] = c * ri + s * rj
                T[:, 2 * g.j + q, :] = -s * ri + c * rj
    return T
