"""Single-mode UA closed forms, the power-law extrapolation and enhancement."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import NoiseModel, single_phase_circuit
from .errors import SaturatedEnhancement
from .gaussian import gaussian_fidelity
from .protocol import UAConfig, integrate_ensemble, run_ensemble

MAX_VARIANCE = 0.1
WARN_VARIANCE = 0.05
SERIES_TOL = 1e-14
SERIES_MAX_TERMS = 10_000


def averaged_tanh(r: float, v: float, n: int) -> float:
    """Low-noise average of ``tanh r'`` after UA with ``n`` replicas."""
    if v < 0:
        raise ValueError("variance must be non-negative")
    if v > MAX_VARIANCE:
        raise ValueError(f"variance {v} outside the low-noise regime (<= {MAX_VARIANCE})")
    if v > WARN_VARIANCE:
        warnings.warn(f"variance {v} is not small; the low-noise expansion degrades", stacklevel=2)
    return (1.0 - (v / 2 - v / (2 * n))) * math.tanh(r)


def averaged_cos_phase(v: float, n: int) -> float:
    if v < 0 or n < 1:
        raise ValueError("need v >= 0 and n >= 1")
    return math.cos(math.sqrt(v / n))


@dataclass(frozen=True)
class SingleModeChannelModel:
    """One arm of a two-mode squeezed vacuum sent through an ``n``-fold UA phase channel."""

    r: float
    v: float
    n: int

    def __post_init__(self):
        if self.v < 0:
            raise ValueError("v must be non-negative")
        if self.n < 1:
            raise ValueError("n must be at least 1")

    @property
    def tanh_r_prime(self) -> float:
        return averaged_tanh(self.r, self.v, self.n)

    @property
    def alpha(self) -> float:
        t = math.tanh(self.r)
        return self.tanh_r_prime / t if t else 1.0

    @property
    def r_prime(self) -> float:
        return math.atanh(self.tanh_r_prime)

    @property
    def phi_beta(self) -> float:
        """Effective residual phase, ``sqrt(v / n)``."""
        return math.sqrt(self.v / self.n)

    @property
    def chi_prime(self) -> complex:
        return self.r_prime * complex(math.cos(self.phi_beta), math.sin(self.phi_beta))


def offdiag_series(r_prime: float, phi_beta: float) -> float:
    """Off-diagonal correlation ``2 cosh(r')^-2 sum (N+1) tanh(r')^(2N+1) sin(phi)``."""
    t = math.tanh(r_prime)
    s = math.sin(phi_beta)
    if s == 0.0 or t == 0.0:
        return 0.0
    total = 0.0
    for N in range(SERIES_MAX_TERMS):
        term = (N + 1) * t ** (2 * N + 1)
        total += term
        if term < SERIES_TOL:
            break
    return 2.0 * total * s / math.cosh(r_prime) ** 2


def _two_mode_covariance(t: float, cos_phi: float, offdiag: float = 0.0) -> np.ndarray:
    a = (1 + t * t) / (1 - t * t)
    c = 2 * t / (1 - t * t) * cos_phi
    V = np.zeros((4, 4))
    V[:2, :2] = V[2:, 2:] = a * np.eye(2)
    C = np.array([[-c, offdiag], [offdiag, c]])
    V[:2, 2:] = C
    V[2:, :2] = C.T
    return V


def single_mode_output_covariance(
    model: SingleModeChannelModel, phi_beta: float | None = None
) -> np.ndarray:
    """4x4 covariance of the heralded two-mode output.

    By default the phase-averaged form: correlations scaled by
    ``<cos phi_beta>`` and the off-diagonal term averaged to zero. Given a
    fixed ``phi_beta``, the exact non-averaged form including the
    off-diagonal series is returned instead.
    """
    t = model.tanh_r_prime
    if phi_beta is None:
        return _two_mode_covariance(t, averaged_cos_phase(model.v, model.n))
    return _two_mode_covariance(t, math.cos(phi_beta), offdiag_series(math.atanh(t), phi_beta))


def single_mode_success_prob(model: SingleModeChannelModel) -> float:
    return (math.cosh(model.r_prime) / math.cosh(model.r)) ** 2


def analytic_base_fidelity(n: int, sigma: float, r: float) -> float:
    """Fidelity of the phase-averaged analytic output against its noiseless form."""
    V0 = single_mode_output_covariance(SingleModeChannelModel(r, 0.0, n))
    V1 = single_mode_output_covariance(SingleModeChannelModel(r, sigma**2, n))
    return gaussian_fidelity(V0, V1)


@lru_cache(maxsize=4096)
def base_case(
    n: int,
    sigma: float,
    r_base: float,
    method: str = "quadrature",
    samples: int = 10_000,
    seed: int = 0,
) -> tuple[float, float]:
    """``(F1, P1)``: the N = 1 pipeline on one squeezed mode and one noisy phase.

    ``method="quadrature"`` integrates the noise exactly by Gauss-Hermite
    quadrature; ``"montecarlo"`` uses :func:`run_ensemble`.
    """
    if not 0 <= sigma <= 0.1:
        raise ValueError(f"base case is defined for 0 <= sigma <= 0.1, got {sigma}")
    config = UAConfig(1, n, (r_base,))
    target = single_phase_circuit()
    noise = NoiseModel(sigma)
    if method == "quadrature":
        res = integrate_ensemble(config, target, noise)
    elif method == "montecarlo":
        res = run_ensemble(config, target, noise, samples, seed)
    else:
        raise ValueError(f"unknown method {method!r}")
    return res.fidelity, res.exact_p


def base_fidelity(n: int, sigma: float, r_base: float, **kwargs) -> float:
    return base_case(n, float(sigma), float(r_base), **kwargs)[0]


def base_probability(n: int, sigma: float, r_base: float, **kwargs) -> float:
    return base_case(n, float(sigma), float(r_base), **kwargs)[1]


def noisy_params_for_modes(N: int) -> int:
    """``N**2 - 1``; the power law is only meaningful for ``N >= 2``."""
    if N < 2:
        raise ValueError("power law needs N >= 2 (the exponent vanishes at N = 1)")
    return N * N - 1


def _power(base: float, k: int, name: str) -> float:
    if not 0 < base <= 1:
        raise ValueError(f"{name} must lie in (0, 1], got {base}")
    if k < 0:
        raise ValueError("noisy parameter count must be non-negative")
    return base ** (2 * k)


def power_law_fidelity(F1: float, k: int | None = None, *, N: int | None = None) -> float:
    """``F1 ** (2 k)``; pass ``N`` instead of ``k`` to use ``k = N**2 - 1``."""
    if (k is None) == (N is None):
        raise ValueError("give exactly one of k or N")
    return _power(F1, noisy_params_for_modes(N) if k is None else k, "F1")


def power_law_probability(P1: float, k: int | None = None, *, N: int | None = None) -> float:
    if (k is None) == (N is None):
        raise ValueError("give exactly one of k or N")
    return _power(P1, noisy_params_for_modes(N) if k is None else k, "P1")


@dataclass(frozen=True)
class PowerLawModel:
    F1: float
    P1: float
    k: int

    def __post_init__(self):
        if not (0 < self.F1 <= 1 and 0 < self.P1 <= 1):
            raise ValueError("base values must lie in (0, 1]")
        if self.k < 0:
            raise ValueError("k must be non-negative")

    @classmethod
    def from_base(cls, n: int, sigma: float, r_base: float, k: int, **kwargs) -> "PowerLawModel":
        F1, P1 = base_case(n, float(sigma), float(r_base), **kwargs)
        return cls(F1, P1, k)

    @property
    def fidelity(self) -> float:
        return power_law_fidelity(self.F1, self.k)

    @property
    def probability(self) -> float:
        return power_law_probability(self.P1, self.k)


def enhancement(F_unprotected: float, F_protected: float) -> float:
    """Infidelity ratio ``(1 - F_unprotected) / (1 - F_protected)``."""
    for name, F in (("F_unprotected", F_unprotected), ("F_protected", F_protected)):
        if not 0 <= F <= 1:
            raise ValueError(f"{name}={F} is not a fidelity")
    if F_protected == 1.0:
        raise SaturatedEnhancement("protected fidelity is 1: enhancement saturated")
    return (1.0 - F_unprotected) / (1.0 - F_protected)
