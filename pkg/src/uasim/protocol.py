"""Unitary-averaging encode / noisy replicas / decode / vacuum-herald pipeline.

Mode layout: replica ``k`` occupies modes ``[k N, (k+1) N)``. Replica 0 carries
the squeezed input and is the one kept after heralding; the other
``N (n - 1)`` modes are ancillas heralded in vacuum.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .circuit import BeamSplitter, CircuitSpec, NoiseModel, compile_batch, compile_to_symplectic
from .errors import DimensionError, NumericalError
from .gaussian import (
    apply_transform,
    beamsplitter_transform,
    condition_on_vacuum,
    embed,
    gaussian_fidelity,
    herald_probability_approx,
    phase_transform,
    quadrature_indices,
    squeeze_transform,
)

ENCODE_ANGLE = np.pi / 4
WEIGHTINGS = ("herald", "uniform")
# tolerance for the noiseless pipeline to count as the exact identity
NOISELESS_TOL = 1e-10


@dataclass(frozen=True)
class UAConfig:
    N: int
    n: int
    squeezing: tuple
    input_phases: tuple | None = None
    weighting: str = "herald"

    def __post_init__(self):
        object.__setattr__(self, "squeezing", tuple(float(r) for r in self.squeezing))
        if self.input_phases is not None:
            object.__setattr__(self, "input_phases", tuple(float(p) for p in self.input_phases))
            if len(self.input_phases) != self.N:
                raise ValueError("input_phases must have one entry per signal mode")
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if self.n < 1 or self.n & (self.n - 1):
            raise ValueError(f"replica count n={self.n} must be a power of two")
        if len(self.squeezing) != self.N:
            raise ValueError(f"need {self.N} squeezing values, got {len(self.squeezing)}")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"weighting must be one of {WEIGHTINGS}")

    @property
    def total_modes(self) -> int:
        return self.N * self.n

    @property
    def ancilla(self) -> list[int]:
        return list(range(self.N, self.total_modes))


def _check_power_of_two(n: int):
    if n < 1 or n & (n - 1):
        raise ValueError(f"replica count n={n} must be a power of two")


def encode_gates(N: int, n: int) -> list[BeamSplitter]:
    """50:50 beamsplitter tree spreading each signal mode over ``n`` replicas."""
    _check_power_of_two(n)
    gates = []
    stride = N
    while stride < N * n:
        for block in range(0, N * n, 2 * stride):
            for off in range(stride):
                gates.append(BeamSplitter(block + off, block + off + stride, ENCODE_ANGLE, noisy=False))
        stride *= 2
    return gates


def encode_network(N: int, n: int) -> np.ndarray:
    M = N * n
    S = np.eye(2 * M)
    for g in encode_gates(N, n):
        S = beamsplitter_transform(g.i, g.j, g.theta, M) @ S
    return S


def decode_network(N: int, n: int) -> np.ndarray:
    return encode_network(N, n).T


def signal_preparation(config: UAConfig) -> np.ndarray:
    """Symplectic map preparing the squeezed (and optionally phased) signal modes."""
    S = squeeze_transform(config.squeezing)
    if config.input_phases is not None:
        S = phase_transform(config.input_phases) @ S
    return S


def prepare_input(config: UAConfig) -> np.ndarray:
    S = embed(signal_preparation(config), config.total_modes, 0)
    return S @ S.T


def ideal_output(config: UAConfig, target: CircuitSpec) -> np.ndarray:
    """Noiseless target acting on the prepared signal modes (pure)."""
    if target.modes != config.N:
        raise DimensionError(f"target has {target.modes} modes, config has N={config.N}")
    S = compile_to_symplectic(target) @ signal_preparation(config)
    return S @ S.T


def sample_draws(seed: int, index: int, n: int, k: int, sigma: float) -> np.ndarray:
    """Noise draw of sample ``index``: shape ``(n, k)``, replica-major."""
    rng = np.random.default_rng([int(seed), int(index)])
    return sigma * rng.standard_normal((n, k))


@dataclass
class SampleResult:
    covariance: np.ndarray
    exact_p: float
    approx_p: float
    draws: np.ndarray


@dataclass
class EnsembleResult:
    mixture_cov: np.ndarray
    ideal_cov: np.ndarray
    fidelity: float
    fidelity_stderr: float
    exact_p: float
    exact_p_stderr: float
    approx_p: float
    approx_p_stderr: float
    samples: int
    seed: int | None
    method: str = "montecarlo"

    @property
    def infidelity(self) -> float:
        return 1.0 - self.fidelity


class Pipeline:
    """Precomputed pieces of the UA pipeline for one (config, target) pair."""

    def __init__(self, config: UAConfig, target: CircuitSpec):
        if target.modes != config.N:
            raise DimensionError(f"target has {target.modes} modes, config has N={config.N}")
        self.config = config
        self.target = target
        self.k = target.noisy_param_count
        E = encode_network(config.N, config.n)
        self.decode = E.T
        self.v_encoded = apply_transform(E, prepare_input(config))
        self.v_ideal = ideal_output(config, target)

    def evaluate(self, draws: np.ndarray):
        """Run a batch of draws ``(B, n, k)``; return (covs, exact_p, approx_p)."""
        cfg = self.config
        N, n, M = cfg.N, cfg.n, cfg.total_modes
        B = draws.shape[0]
        T_rep = compile_batch(self.target, draws.reshape(B * n, self.k)).reshape(B, n, 2 * N, 2 * N)
        T = np.zeros((B, 2 * M, 2 * M))
        for rep in range(n):
            sl = slice(2 * N * rep, 2 * N * (rep + 1))
            T[:, sl, sl] = T_rep[:, rep]
        V = apply_transform(self.decode @ T, self.v_encoded)
        if n == 1:
            return V, np.ones(B), np.ones(B)
        ai = quadrature_indices(cfg.ancilla)
        approx = herald_probability_approx(V[:, ai[:, None], ai])
        covs, exact = condition_on_vacuum(V, cfg.ancilla)
        return covs, np.asarray(exact), np.asarray(approx)


def run_single_sample(
    config: UAConfig,
    target: CircuitSpec,
    noise: NoiseModel,
    rng: np.random.Generator | None = None,
    draws: np.ndarray | None = None,
) -> SampleResult:
    """Push one noise realisation through the UA pipeline up to the herald.

    Pass either a generator (draws are taken replica by replica, in gate
    order) or a recorded ``draws`` array of shape ``(n, k)``.
    """
    pipe = Pipeline(config, target)
    if draws is None:
        if rng is None:
            raise ValueError("need an rng or a recorded draw")
        draws = noise.sigma * rng.standard_normal((config.n, pipe.k))
    draws = np.asarray(draws, dtype=float).reshape(config.n, pipe.k)
    covs, exact, approx = pipe.evaluate(draws[None])
    return SampleResult(covs[0], float(exact[0]), float(approx[0]), draws)


@dataclass
class _Partial:
    weighted_cov: np.ndarray
    weight: float
    exact: np.ndarray
    approx: np.ndarray


def _finalize(pipe: Pipeline, partials, samples, seed, sigma, method="montecarlo"):
    weighted = partials[0].weighted_cov.copy()
    weight = partials[0].weight
    for part in partials[1:]:
        weighted += part.weighted_cov
        weight += part.weight
    if not weight > 0:
        raise NumericalError("total herald weight vanished")
    V1 = weighted / weight
    F = gaussian_fidelity(pipe.v_ideal, V1)
    exact = np.concatenate([p.exact for p in partials])
    approx = np.concatenate([p.approx for p in partials])
    nb = len(partials)
    if nb > 1:
        fb = [gaussian_fidelity(pipe.v_ideal, p.weighted_cov / p.weight) for p in partials]
        f_err = float(np.std(fb, ddof=1) / math.sqrt(nb))
        e_err = float(np.std([p.exact.mean() for p in partials], ddof=1) / math.sqrt(nb))
        a_err = float(np.std([p.approx.mean() for p in partials], ddof=1) / math.sqrt(nb))
    else:
        f_err = e_err = a_err = 0.0
    p_exact, p_approx = float(exact.mean()), float(approx.mean())
    if sigma == 0:
        F, p_exact, p_approx = _snap_noiseless(F, p_exact, p_approx)
        f_err = e_err = a_err = 0.0
    return EnsembleResult(
        mixture_cov=V1,
        ideal_cov=pipe.v_ideal,
        fidelity=F,
        fidelity_stderr=f_err,
        exact_p=p_exact,
        exact_p_stderr=e_err,
        approx_p=p_approx,
        approx_p_stderr=a_err,
        samples=samples,
        seed=seed,
        method=method,
    )


def _snap_noiseless(*values):
    # noiseless UA is the identity; anything beyond rounding is a bug
    worst = max(abs(1 - v) for v in values)
    if worst > NOISELESS_TOL:
        raise NumericalError(f"noiseless pipeline deviates from identity by {worst:.3g}")
    return tuple(1.0 for _ in values)


def _weights(config: UAConfig, exact: np.ndarray) -> np.ndarray:
    return exact if config.weighting == "herald" else np.ones_like(exact)


def run_ensemble(
    config: UAConfig,
    target: CircuitSpec,
    noise: NoiseModel,
    samples: int,
    seed: int,
    threads: int = 1,
    batch_size: int | None = None,
) -> EnsembleResult:
    """Monte-Carlo average over ``samples`` independent noise realisations.

    Sample ``s`` draws from a generator seeded by ``(seed, s)``. Samples are
    grouped into batches of ``ceil(sqrt(samples))`` (these are also the
    batch-means groups for standard errors); batch partial sums are reduced
    in batch order, so results do not depend on ``threads``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    pipe = Pipeline(config, target)
    size = batch_size or math.ceil(math.sqrt(samples))
    starts = list(range(0, samples, size))

    def work(start):
        idx = range(start, min(start + size, samples))
        draws = np.stack([sample_draws(seed, s, config.n, pipe.k, noise.sigma) for s in idx])
        covs, exact, approx = pipe.evaluate(draws)
        w = _weights(config, exact)
        return _Partial(np.einsum("b,bij->ij", w, covs), float(w.sum()), exact, approx)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(work, starts))
    else:
        partials = [work(s) for s in starts]
    return _finalize(pipe, partials, samples, seed, noise.sigma)


QUADRATURE_MAX_POINTS = 100_000


def quadrature_degree(dims: int, max_points: int = QUADRATURE_MAX_POINTS) -> int:
    """Largest node count per dimension (3..10) that keeps the grid bounded."""
    if dims == 0:
        return 1
    d = 10
    while d > 3 and d**dims > max_points:
        d -= 1
    if d**dims > max_points:
        raise ValueError(f"{dims} noisy parameters are too many for tensor quadrature")
    return d


def integrate_ensemble(
    config: UAConfig,
    target: CircuitSpec,
    noise: NoiseModel,
    degree: int | None = None,
) -> EnsembleResult:
    """Deterministic ensemble average by tensor Gauss-Hermite quadrature.

    Integrates the same mixture as :func:`run_ensemble` over all ``n k``
    independent Gaussian angles. Only feasible for a handful of noisy
    parameters; standard errors are reported as zero.
    """
    pipe = Pipeline(config, target)
    dims = config.n * pipe.k
    degree = degree or quadrature_degree(dims)
    nodes, w1 = hermegauss(degree)
    w1 = w1 / w1.sum()
    grid = np.array(list(itertools.product(range(degree), repeat=dims)), dtype=int).reshape(-1, dims)
    draws = noise.sigma * nodes[grid]
    qw = np.prod(w1[grid], axis=1)
    partials = []
    step = 4096
    for start in range(0, len(grid), step):
        sl = slice(start, start + step)
        covs, exact, approx = pipe.evaluate(draws[sl].reshape(-1, config.n, pipe.k))
        w = qw[sl] * _weights(config, exact)
        # probabilities are stored pre-weighted so that sum() gives the integral
        partials.append(_Partial(np.einsum("b,bij->ij", w, covs), float(w.sum()),
                                 qw[sl] * exact, qw[sl] * approx))
    weighted = sum(p.weighted_cov for p in partials)
    weight = sum(p.weight for p in partials)
    V1 = weighted / weight
    F = gaussian_fidelity(pipe.v_ideal, V1)
    p_exact = float(sum(p.exact.sum() for p in partials))
    p_approx = float(sum(p.approx.sum() for p in partials))
    if noise.sigma == 0:
        F, p_exact, p_approx = _snap_noiseless(F, p_exact, p_approx)
    return EnsembleResult(V1, pipe.v_ideal, F, 0.0, p_exact, 0.0, p_approx, 0.0,
                          samples=len(grid), seed=None, method="quadrature")
