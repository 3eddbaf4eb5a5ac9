"""Brute-force truncated Fock-space simulator used as an independent oracle.

States are complex tensors of shape ``(c+1,) * M``. Gates are applied by
exponentiating their generators: the squeezer in a padded single-mode space,
the beamsplitter exactly inside each total-photon-number block. Weight pushed
above the cutoff is discarded and recorded, never renormalised away.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .circuit import BeamSplitter, CircuitSpec, Phase, Squeeze, apply_noise
from .errors import OracleBoundsError, TruncationError

DEFAULT_CUTOFF = 14
DEFAULT_MAX_LEAKAGE = 1e-6
MAX_AMPLITUDES = 600_000
SQUEEZE_PAD = 24


@dataclass(frozen=True)
class TruncationReport:
    operation: str
    norm_before: float
    norm_after: float

    @property
    def leakage(self) -> float:
        return max(self.norm_before - self.norm_after, 0.0)


@dataclass
class FockState:
    amplitudes: np.ndarray
    reports: list = field(default_factory=list)

    @property
    def modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0] - 1

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def leakage(self) -> float:
        return sum(r.leakage for r in self.reports)

    def copy(self) -> "FockState":
        return FockState(self.amplitudes.copy(), list(self.reports))


def vacuum(modes: int, cutoff: int = DEFAULT_CUTOFF) -> FockState:
    if (cutoff + 1) ** modes > MAX_AMPLITUDES:
        raise OracleBoundsError(
            f"{modes} modes at cutoff {cutoff} need {(cutoff + 1) ** modes} amplitudes"
        )
    amps = np.zeros((cutoff + 1,) * modes, dtype=complex)
    amps[(0,) * modes] = 1.0
    return FockState(amps)


def _annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1)


@lru_cache(maxsize=256)
def _squeeze_matrix(r: float, dim: int) -> np.ndarray:
    a = _annihilation(dim)
    a2 = a @ a
    return expm(0.5 * r * (a2 - a2.T))


def _apply_single_mode(amps: np.ndarray, mode: int, mat: np.ndarray) -> np.ndarray:
    moved = np.moveaxis(amps, mode, -1)
    return np.moveaxis(moved @ mat.T, -1, mode)


def _record(state: FockState, new_amps: np.ndarray, label: str, max_leakage: float) -> FockState:
    before = state.norm()
    after = float(np.sum(np.abs(new_amps) ** 2))
    report = TruncationReport(label, before, after)
    if report.leakage > max_leakage:
        raise TruncationError(
            f"{label}: truncation discards {report.leakage:.3g} (> {max_leakage:.3g}); raise the cutoff",
            report,
        )
    return FockState(new_amps, state.reports + [report])


def fock_squeeze(
    state: FockState, mode: int, r: float, max_leakage: float = DEFAULT_MAX_LEAKAGE
) -> FockState:
    """Apply ``exp((r/2)(a^2 - a^dag^2))`` to ``mode``.

    The generator is exponentiated in a space padded well beyond the cutoff,
    then projected back; the discarded weight is the truncation leakage.
    """
    if r == 0:
        return state.copy()
    c = state.cutoff
    dim = 2 * c + SQUEEZE_PAD
    U = _squeeze_matrix(float(r), dim)[: c + 1, : c + 1]
    return _record(state, _apply_single_mode(state.amplitudes, mode, U), f"squeeze(mode={mode}, r={r:g})", max_leakage)


def fock_phase(state: FockState, mode: int, phi: float) -> FockState:
    """Multiply the ``k``-photon amplitudes of ``mode`` by ``exp(-i phi k)``."""
    k = np.arange(state.cutoff + 1)
    shape = [1] * state.modes
    shape[mode] = -1
    return FockState(state.amplitudes * np.exp(-1j * phi * k).reshape(shape), list(state.reports))


@lru_cache(maxsize=64)
def _bs_block_generators(cutoff: int) -> tuple:
    """Generator of ``a_i^dag a_j - a_i a_j^dag`` on each total-number block.

    Block ``T`` spans ``|a, T-a>`` for ``a = 0..T`` (complete, so exponentiation
    is exact); ``T`` runs up to ``2 cutoff``.
    """
    gens = []
    for T in range(2 * cutoff + 1):
        G = np.zeros((T + 1, T + 1))
        for a in range(T + 1):
            b = T - a
            if b > 0:  # a_i^dag a_j |a, b> = sqrt((a+1) b) |a+1, b-1>
                G[a + 1, a] += np.sqrt((a + 1) * b)
            if a > 0:  # a_i a_j^dag |a, b> = sqrt(a (b+1)) |a-1, b+1>
                G[a - 1, a] -= np.sqrt(a * (b + 1))
        gens.append(G)
    return tuple(gens)


def fock_beamsplitter(
    state: FockState, i: int, j: int, theta: float, max_leakage: float = DEFAULT_MAX_LEAKAGE
) -> FockState:
    """Apply ``exp(theta (a_i^dag a_j - a_i a_j^dag))``."""
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    c = state.cutoff
    psi = np.moveaxis(state.amplitudes, (i, j), (-2, -1))
    out = np.zeros_like(psi)
    for T, G in enumerate(_bs_block_generators(c)):
        a = np.arange(max(0, T - c), min(c, T) + 1)
        U = expm(theta * G)
        vec = psi[..., a, T - a]  # components inside the truncation
        full = np.einsum("ka,...a->...k", U[:, a], vec)
        out[..., a, T - a] = full[..., a]
    new = np.moveaxis(out, (-2, -1), (i, j))
    return _record(state, new, f"beamsplitter({i},{j}, theta={theta:g})", max_leakage)


def apply_circuit(
    state: FockState, circuit: CircuitSpec, offset: int = 0, max_leakage: float = DEFAULT_MAX_LEAKAGE
) -> FockState:
    for g in circuit.gates:
        if isinstance(g, Squeeze):
            state = fock_squeeze(state, offset + g.mode, g.r, max_leakage)
        elif isinstance(g, Phase):
            state = fock_phase(state, offset + g.mode, g.phi)
        else:
            state = fock_beamsplitter(state, offset + g.i, offset + g.j, g.theta, max_leakage)
    return state


def project_vacuum(state: FockState, ancilla) -> tuple[FockState, float]:
    """Keep the zero-photon slice of every ancilla mode and renormalise.

    Returns the kept-mode state and the herald probability (squared norm of
    the slice).
    """
    ancilla = set(int(a) for a in ancilla)
    index = tuple(0 if m in ancilla else slice(None) for m in range(state.modes))
    sl = state.amplitudes[index]
    P = float(np.sum(np.abs(sl) ** 2))
    if P < 1e-15:
        raise ValueError("vacuum herald has vanishing probability")
    return FockState(sl / np.sqrt(P), list(state.reports)), P


def state_fidelity(psi0: FockState, psi1: FockState) -> float:
    if psi0.amplitudes.shape != psi1.amplitudes.shape:
        raise ValueError("state shapes differ")
    return float(abs(np.vdot(psi0.amplitudes, psi1.amplitudes)) ** 2)


def _ladder_moments(state: FockState):
    """Return (<a_k>, <a_k a_l>, <a_k^dag a_l>) normalised by the state norm."""
    psi = state.amplitudes
    M, c = state.modes, state.cutoff
    sq = np.sqrt(np.arange(1, c + 1))

    def lower(arr, k):
        # (a_k psi)[.., m, ..] = sqrt(m+1) psi[.., m+1, ..]
        moved = np.moveaxis(arr, k, -1)
        res = np.zeros_like(moved)
        res[..., :-1] = moved[..., 1:] * sq
        return np.moveaxis(res, -1, k)

    norm = state.norm()
    lowered = [lower(psi, k) for k in range(M)]
    first = np.array([np.vdot(psi, lowered[k]) for k in range(M)]) / norm
    aa = np.empty((M, M), dtype=complex)
    ada = np.empty((M, M), dtype=complex)
    for k in range(M):
        for l in range(M):
            aa[k, l] = np.vdot(psi, lower(lowered[l], k))
            ada[k, l] = np.vdot(lowered[k], lowered[l])
    return first, aa / norm, ada / norm


def first_moments(state: FockState) -> np.ndarray:
    """Quadrature means ``(<x_1>, <p_1>, ...)`` with ``x = a + a^dag``."""
    first, _, _ = _ladder_moments(state)
    out = np.empty(2 * state.modes)
    out[0::2] = 2 * first.real
    out[1::2] = 2 * first.imag
    return out


def covariance(state: FockState) -> np.ndarray:
    """Symmetrised quadrature covariance (vacuum = identity)."""
    first, aa, ada = _ladder_moments(state)
    M = state.modes
    delta = np.eye(M)
    # <a_k a_l^dag> = <a_l^dag a_k> + delta_kl
    a_adag = ada.T + delta
    # x = a + a^dag, p = -i (a - a^dag); the symmetrised second moments
    xx = aa + aa.conj() + ada + a_adag
    pp = -(aa + aa.conj()) + ada + a_adag
    # <{x_k, p_l}>/2 with x_k p_l = -i (a_k + a_k^dag)(a_l - a_l^dag)
    xp = -1j * (aa - a_adag + ada - aa.conj())
    V = np.empty((2 * M, 2 * M))
    mu = first_moments(state)
    V[0::2, 0::2] = xx.real
    V[1::2, 1::2] = pp.real
    V[0::2, 1::2] = xp.real
    V[1::2, 0::2] = V[0::2, 1::2].T
    return V - np.outer(mu, mu)


def _assert_two_mode_passive(circuit: CircuitSpec):
    if circuit.modes != 2 or not circuit.passive:
        raise ValueError("closed form needs a passive two-mode circuit")


def mode_transfer(circuit: CircuitSpec) -> np.ndarray:
    """Matrix ``W`` with ``U a_k^dag U^dag = sum_j W[j, k] a_j^dag``."""
    W = np.eye(circuit.modes, dtype=complex)
    for g in circuit.gates:
        G = np.eye(circuit.modes, dtype=complex)
        if isinstance(g, Phase):
            G[g.mode, g.mode] = np.exp(-1j * g.phi)
        elif isinstance(g, BeamSplitter):
            c, s = np.cos(g.theta), np.sin(g.theta)
            # a_i^dag -> c a_i^dag - s a_j^dag ; a_j^dag -> s a_i^dag + c a_j^dag
            G[g.i, g.i], G[g.j, g.i] = c, -s
            G[g.i, g.j], G[g.j, g.j] = s, c
        else:
            raise ValueError("mode transfer is defined for passive gates only")
        W = G @ W
    return W


def bogoliubov_state(r: float, circuit: CircuitSpec, cutoff: int = 16) -> FockState:
    """Closed-form output of a passive two-mode circuit on two equal squeezers.

    With ``t = tanh r`` the output is
    ``(cosh r)^-1 exp(-t/2 (A11 a1^dag + A12 a2^dag)^2) exp(-t/2 (A21 a1^dag + A22 a2^dag)^2) |00>``
    where row ``k`` of ``A`` is column ``k`` of :func:`mode_transfer`. Built by
    the finite power series of the exponent in the commuting creation operators.
    """
    _assert_two_mode_passive(circuit)
    W = mode_transfer(circuit)
    A = W.T
    t = np.tanh(r)
    c = cutoff
    # Q(x, y) = -t/2 sum_k (A_k1 x + A_k2 y)^2 as coefficients q[p, q] of x^p y^q
    Q = np.zeros((c + 1, c + 1), dtype=complex)
    for k in range(2):
        Q[2, 0] += A[k, 0] ** 2
        Q[1, 1] += 2 * A[k, 0] * A[k, 1]
        Q[0, 2] += A[k, 1] ** 2
    Q *= -t / 2
    poly = np.zeros_like(Q)
    poly[0, 0] = 1.0
    term = poly.copy()
    for m in range(1, c + 1):
        term = _poly_mul(term, Q, c) / m
        poly = poly + term
    fact = np.array([math.sqrt(math.factorial(k)) for k in range(c + 1)])
    amps = poly * np.outer(fact, fact) / np.cosh(r)
    return FockState(amps)


def _poly_mul(p: np.ndarray, q: np.ndarray, c: int) -> np.ndarray:
    out = np.zeros_like(p)
    for (i, j) in zip(*np.nonzero(q)):
        out[i:, j:] += q[i, j] * p[: c + 1 - i, : c + 1 - j]
    return out


def bogoliubov_output_moments(r: float, circuit: CircuitSpec, cutoff: int = 16) -> np.ndarray:
    """Quadrature covariance of :func:`bogoliubov_state`."""
    return covariance(bogoliubov_state(r, circuit, cutoff))


@dataclass
class OracleResult:
    state: FockState
    probability: float
    fidelity: float
    covariance: np.ndarray
    leakage: float
    cutoff: int


def oracle_run(
    config,
    target: CircuitSpec,
    draws,
    cutoff: int | None = DEFAULT_CUTOFF,
    max_leakage: float = DEFAULT_MAX_LEAKAGE,
) -> OracleResult:
    """Replay one recorded noise draw of the UA pipeline in Fock space.

    ``config`` is a :class:`uasim.protocol.UAConfig`; ``draws`` has shape
    ``(n, k)`` exactly as recorded by the Gaussian pipeline. With
    ``cutoff=None`` the run starts at the default cutoff and retries with a
    larger one whenever the leakage guard fires, until the amplitude budget
    is exhausted.
    """
    if cutoff is not None:
        return _oracle_run(config, target, draws, cutoff, max_leakage)
    c = DEFAULT_CUTOFF
    while True:
        try:
            return _oracle_run(config, target, draws, c, max_leakage)
        except TruncationError:
            if (c + 3) ** config.total_modes > MAX_AMPLITUDES:
                raise
            c += 2


def _oracle_run(config, target, draws, cutoff, max_leakage) -> OracleResult:
    from .protocol import encode_gates

    N, n, M = config.N, config.n, config.total_modes
    draws = np.asarray(draws, dtype=float).reshape(n, target.noisy_param_count)
    state = _prepare(config, M, cutoff, max_leakage)
    enc = encode_gates(N, n)
    for g in enc:
        state = fock_beamsplitter(state, g.i, g.j, g.theta, max_leakage)
    for rep in range(n):
        state = apply_circuit(state, apply_noise(target, draws[rep]), rep * N, max_leakage)
    for g in reversed(enc):
        state = fock_beamsplitter(state, g.i, g.j, -g.theta, max_leakage)
    if n > 1:
        out, P = project_vacuum(state, config.ancilla)
    else:
        norm = state.norm()
        out, P = FockState(state.amplitudes / np.sqrt(norm), list(state.reports)), norm
    ideal = apply_circuit(_prepare(config, N, cutoff, max_leakage), target, 0, max_leakage)
    ideal = FockState(ideal.amplitudes / np.sqrt(ideal.norm()), ideal.reports)
    return OracleResult(out, P, state_fidelity(ideal, out), covariance(out), state.leakage, cutoff)


def _prepare(config, modes: int, cutoff: int, max_leakage: float) -> FockState:
    state = vacuum(modes, cutoff)
    for mode, r in enumerate(config.squeezing):
        state = fock_squeeze(state, mode, r, max_leakage)
    if config.input_phases is not None:
        for mode, phi in enumerate(config.input_phases):
            state = fock_phase(state, mode, phi)
    return state
