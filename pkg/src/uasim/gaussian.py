"""Quadrature-space linear algebra for zero-mean Gaussian states.

Conventions: interleaved quadratures ``(x1, p1, x2, p2, ...)`` with
``x = a + a^dag`` and ``p = -i (a - a^dag)``, so the vacuum covariance is the
identity. Every function accepts stacked arrays with arbitrary leading batch
dimensions where that is cheap to support (transform application,
conditioning, photon numbers).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError, ApproximationError

SYMMETRY_TOL = 1e-10
PHYSICAL_TOL = 1e-9
PURITY_TOL = 1e-8
PIVOT_TOL = 1e-12


def _modes_of(mat: np.ndarray) -> int:
    dim = mat.shape[-1]
    if mat.shape[-2] != dim or dim % 2:
        raise DimensionError(f"expected a 2M x 2M matrix, got shape {mat.shape[-2:]}")
    return dim // 2


def symplectic_form(modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with ``[[0, 1], [-1, 0]]`` blocks."""
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def quadrature_indices(modes) -> np.ndarray:
    """Row/column indices of the (x, p) pairs of the given modes, in order."""
    modes = np.asarray(list(modes), dtype=int)
    return np.stack([2 * modes, 2 * modes + 1], axis=-1).ravel()


def is_symplectic(S: np.ndarray, tol: float = SYMMETRY_TOL) -> bool:
    omega = symplectic_form(_modes_of(S))
    return bool(np.max(np.abs(S @ omega @ np.swapaxes(S, -1, -2) - omega)) <= tol)


def apply_transform(S: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Return ``S V S^T`` (broadcast over leading dimensions)."""
    if S.shape[-1] != V.shape[-1] or _modes_of(S) != _modes_of(V):
        raise DimensionError(
            f"transform acts on {S.shape[-1] // 2} modes, state has {V.shape[-1] // 2}"
        )
    return S @ V @ np.swapaxes(S, -1, -2)


def squeeze_transform(r) -> np.ndarray:
    """Per-mode squeezing ``diag(e^-r, e^r)``; the x quadrature is squeezed."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if not np.all(np.isfinite(r)):
        raise ValueError("squeezing parameters must be finite")
    diag = np.empty(2 * r.size)
    diag[0::2] = np.exp(-r)
    diag[1::2] = np.exp(r)
    return np.diag(diag)


def _rotation(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, s], [-s, c]])


def phase_transform(phi) -> np.ndarray:
    """Per-mode rotation ``exp(-i phi n)``: block ``[[cos, sin], [-sin, cos]]``."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    S = np.zeros((2 * phi.size, 2 * phi.size))
    for k, angle in enumerate(phi):
        S[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = _rotation(angle)
    return S


def beamsplitter_transform(i: int, j: int, theta: float, modes: int | None = None) -> np.ndarray:
    """Symplectic map of ``exp(theta (a_i^dag a_j - a_i a_j^dag))``.

    Transmissivity is ``cos(theta)**2``. Mode indices are zero-based;
    ``modes`` defaults to the smallest system containing both.
    """
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    if modes is None:
        modes = max(i, j) + 1
    if not (0 <= i < modes and 0 <= j < modes):
        raise DimensionError(f"modes ({i}, {j}) out of range for {modes}-mode system")
    c, s = np.cos(theta), np.sin(theta)
    S = np.eye(2 * modes)
    for q in (0, 1):
        a, b = 2 * i + q, 2 * j + q
        S[a, a] = c
        S[b, b] = c
        S[a, b] = s
        S[b, a] = -s
    return S


def embed(S: np.ndarray, total_modes: int, offset: int = 0) -> np.ndarray:
    """Embed a transform on modes ``[offset, offset + M)`` of a larger system."""
    m = _modes_of(S)
    if offset < 0 or offset + m > total_modes:
        raise DimensionError(f"cannot place {m} modes at offset {offset} of {total_modes}")
    out = np.eye(2 * total_modes)
    sl = slice(2 * offset, 2 * (offset + m))
    out[sl, sl] = S
    return out


def condition_on_vacuum(V: np.ndarray, ancilla) -> tuple[np.ndarray, np.ndarray | float]:
    """Herald the ``ancilla`` modes in vacuum.

    Returns the conditional covariance ``A - C (B + I)^-1 C^T`` on the kept
    modes (in their original order) and the vacuum probability
    ``2^m / sqrt(det(B + I))``. Works on stacked covariance matrices.
    """
    modes = _modes_of(V)
    ancilla = sorted(set(int(a) for a in ancilla))
    if not ancilla:
        raise ValueError("ancilla set must be nonempty")
    if len(ancilla) >= modes or ancilla[0] < 0 or ancilla[-1] >= modes:
        raise DimensionError(f"ancilla {ancilla} must be a strict subset of {modes} modes")
    keep = [k for k in range(modes) if k not in set(ancilla)]
    ki, ai = quadrature_indices(keep), quadrature_indices(ancilla)
    A = V[..., ki[:, None], ki]
    B = V[..., ai[:, None], ai]
    C = V[..., ki[:, None], ai]
    BI = B + np.eye(len(ai))
    try:
        L = np.linalg.cholesky(BI)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("B + I is not positive definite; input is not a physical state") from exc
    pivots = np.diagonal(L, axis1=-2, axis2=-1)
    if np.min(pivots) < np.sqrt(PIVOT_TOL):
        raise NumericalError("B + I is numerically singular")
    # C (B+I)^-1 C^T = (L^-1 C^T)^T (L^-1 C^T)
    X = np.linalg.solve(L, np.swapaxes(C, -1, -2))
    V_out = A - np.swapaxes(X, -1, -2) @ X
    V_out = 0.5 * (V_out + np.swapaxes(V_out, -1, -2))
    sqrt_det = np.prod(pivots, axis=-1)
    prob = 2.0 ** len(ancilla) / sqrt_det
    return V_out, prob


def mean_photon_numbers(V: np.ndarray) -> np.ndarray:
    """Per-mode mean photon number ``(V_xx + V_pp - 2) / 4``."""
    _modes_of(V)
    d = np.diagonal(V, axis1=-2, axis2=-1)
    return (d[..., 0::2] + d[..., 1::2] - 2.0) / 4.0


def herald_probability_approx(V_ancilla: np.ndarray) -> np.ndarray | float:
    """Low-occupation estimate ``prod(1 - nbar_i)`` of the all-vacuum herald."""
    nbar = mean_photon_numbers(V_ancilla)
    if np.any(nbar >= 1.0):
        raise ApproximationError(
            f"mean photon number {np.max(nbar):.3g} >= 1: product approximation invalid"
        )
    return np.prod(1.0 - nbar, axis=-1)


def symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    """Symplectic spectrum (each value once, ascending)."""
    modes = _modes_of(V)
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(modes) @ V))
    return np.sort(ev)[::2]


def gaussian_fidelity(V0: np.ndarray, V1: np.ndarray) -> float:
    """Fidelity ``2^N / sqrt(det(V0 + V1))`` between a pure and an arbitrary state."""
    if V0.shape != V1.shape:
        raise DimensionError(f"shape mismatch {V0.shape} vs {V1.shape}")
    modes = _modes_of(V0)
    if np.max(np.abs(symplectic_eigenvalues(V0) - 1.0)) > PURITY_TOL:
        raise ValueError("reference covariance V0 is not pure")
    sign, logdet = np.linalg.slogdet(V0 + V1)
    if sign <= 0:
        raise NumericalError("V0 + V1 is not positive definite")
    F = float(np.exp(modes * np.log(2.0) - 0.5 * logdet))
    if F > 1.0:
        if F - 1.0 > 1e-9:
            raise NumericalError(f"fidelity {F!r} exceeds 1")
        F = 1.0
    return F


@dataclass(frozen=True)
class PhysicalityReport:
    symmetry_residual: float
    min_eigenvalue: float
    symplectic_eigenvalues: np.ndarray

    @property
    def physical(self) -> bool:
        return self.symmetry_residual <= SYMMETRY_TOL and self.min_eigenvalue >= -PHYSICAL_TOL

    @property
    def pure(self) -> bool:
        return self.physical and bool(
            np.max(np.abs(self.symplectic_eigenvalues - 1.0)) <= PURITY_TOL
        )


def check_physicality(V: np.ndarray) -> PhysicalityReport:
    """Diagnose symmetry, the uncertainty principle ``V + i Omega >= 0`` and purity."""
    modes = _modes_of(V)
    sym = float(np.max(np.abs(V - V.T)))
    herm = 0.5 * (V + V.T) + 1j * symplectic_form(modes)
    min_eig = float(np.min(np.linalg.eigvalsh(herm)))
    return PhysicalityReport(sym, min_eig, symplectic_eigenvalues(V))
