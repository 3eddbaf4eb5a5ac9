import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uasim.errors import ApproximationError, DimensionError, NumericalError
from uasim.gaussian import (
    apply_transform,
    beamsplitter_transform,
    check_physicality,
    condition_on_vacuum,
    embed,
    gaussian_fidelity,
    herald_probability_approx,
    is_symplectic,
    mean_photon_numbers,
    phase_transform,
    quadrature_indices,
    squeeze_transform,
    symplectic_eigenvalues,
    symplectic_form,
)

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
squeezings = st.floats(-1.5, 1.5, allow_nan=False)


def tmsv(r):
    """Two-mode squeezed vacuum built from two opposite squeezers and a 50:50 splitter."""
    S = beamsplitter_transform(0, 1, math.pi / 4, 2) @ squeeze_transform([r, -r])
    return S @ S.T


def test_symplectic_form_interleaved():
    O = symplectic_form(2)
    assert O.shape == (4, 4)
    assert O[0, 1] == 1 and O[1, 0] == -1 and O[2, 3] == 1
    np.testing.assert_array_equal(O @ O, -np.eye(4))


def test_quadrature_indices():
    np.testing.assert_array_equal(quadrature_indices([0, 2]), [0, 1, 4, 5])


@given(r=squeezings, phi=angles, theta=angles)
def test_elementary_gates_are_symplectic(r, phi, theta):
    assert is_symplectic(squeeze_transform(r))
    assert is_symplectic(phase_transform(phi))
    assert is_symplectic(beamsplitter_transform(0, 1, theta, 2))


def test_random_gate_stacks_symplectic():
    rng = np.random.default_rng(7)
    O = symplectic_form(4)
    worst = 0.0
    for _ in range(1000):
        S = np.eye(8)
        for _ in range(12):
            kind = rng.integers(3)
            if kind == 0:
                g = embed(squeeze_transform(rng.uniform(-1, 1)), 4, int(rng.integers(4)))
            elif kind == 1:
                g = embed(phase_transform(rng.uniform(0, 2 * np.pi)), 4, int(rng.integers(4)))
            else:
                i, j = rng.choice(4, 2, replace=False)
                g = beamsplitter_transform(int(i), int(j), rng.uniform(0, np.pi), 4)
            S = g @ S
        worst = max(worst, np.max(np.abs(S @ O @ S.T - O)))
    assert worst <= 1e-10


def test_phase_and_beamsplitter_conventions():
    c, s = math.cos(0.3), math.sin(0.3)
    np.testing.assert_allclose(phase_transform(0.3), [[c, s], [-s, c]])
    B = beamsplitter_transform(0, 1, 0.3, 2)
    np.testing.assert_allclose(B[0], [c, 0, s, 0])
    np.testing.assert_allclose(B[2], [-s, 0, c, 0])


def test_beamsplitter_rejects_same_mode():
    with pytest.raises(ValueError):
        beamsplitter_transform(1, 1, 0.1, 3)


def test_embed_bounds():
    with pytest.raises(DimensionError):
        embed(np.eye(4), 2, 1)


def test_apply_transform_broadcasts():
    S = np.stack([squeeze_transform(r) for r in (0.1, 0.2)])
    out = apply_transform(S, np.eye(2))
    np.testing.assert_allclose(out[1], np.diag([math.exp(-0.4), math.exp(0.4)]))


@given(r=st.floats(0.0, 1.2))
def test_conditioning_tmsv_idler_on_vacuum(r):
    # heralding one arm of a TMSV on vacuum leaves vacuum with P = 1 / cosh^2 r
    V_out, P = condition_on_vacuum(tmsv(r), [1])
    np.testing.assert_allclose(V_out, np.eye(2), atol=1e-10)
    assert P == pytest.approx(1 / math.cosh(r) ** 2, rel=1e-12)


def test_conditioning_batched_matches_loop():
    Vs = np.stack([tmsv(r) for r in (0.2, 0.5, 0.9)])
    outs, Ps = condition_on_vacuum(Vs, [0])
    for b, r in enumerate((0.2, 0.5, 0.9)):
        o, p = condition_on_vacuum(tmsv(r), [0])
        np.testing.assert_allclose(outs[b], o)
        assert Ps[b] == pytest.approx(p)


def test_conditioning_rejects_unphysical_ancilla():
    V = np.eye(4)
    V[2:, 2:] = -np.eye(2)
    with pytest.raises(NumericalError):
        condition_on_vacuum(V, [1])


@given(r=st.floats(0.0, 2.0))
def test_squeezed_vacuum_photon_number_and_fidelity(r):
    V = squeeze_transform(r) @ squeeze_transform(r).T
    assert mean_photon_numbers(V)[0] == pytest.approx(math.sinh(r) ** 2, abs=1e-12)
    # |<0|S(r)|0>|^2 = 1 / cosh r
    assert gaussian_fidelity(np.eye(2), V) == pytest.approx(1 / math.cosh(r), rel=1e-10)


def test_fidelity_identical_states_is_one():
    V = tmsv(0.6)
    assert gaussian_fidelity(V, V) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_requires_pure_reference():
    with pytest.raises(ValueError):
        gaussian_fidelity(2 * np.eye(2), np.eye(2))


def test_herald_probability_approx():
    V = squeeze_transform(0.4) @ squeeze_transform(0.4).T
    assert herald_probability_approx(V) == pytest.approx(1 - math.sinh(0.4) ** 2)
    big = squeeze_transform(1.0) @ squeeze_transform(1.0).T
    with pytest.raises(ApproximationError):
        herald_probability_approx(big)


def test_symplectic_eigenvalues_of_thermal_state():
    np.testing.assert_allclose(symplectic_eigenvalues(np.diag([3.0, 3.0, 1.0, 1.0])), [1.0, 3.0])


def test_physicality_report():
    rep = check_physicality(tmsv(0.5))
    assert rep.physical and rep.pure
    rep = check_physicality(0.5 * np.eye(2))
    assert not rep.physical
    mixed = check_physicality(2 * np.eye(2))
    assert mixed.physical and not mixed.pure
