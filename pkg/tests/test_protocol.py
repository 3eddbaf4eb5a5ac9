import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uasim.circuit import NoiseModel, random_clements, single_phase_circuit
from uasim.errors import DimensionError
from uasim.gaussian import check_physicality, gaussian_fidelity
from uasim.protocol import (
    Pipeline,
    UAConfig,
    decode_network,
    encode_gates,
    encode_network,
    ideal_output,
    integrate_ensemble,
    prepare_input,
    quadrature_degree,
    run_ensemble,
    run_single_sample,
    sample_draws,
)


def two_mode(n, r=(0.5, 0.7), phases=None):
    return UAConfig(2, n, r, phases), random_clements(2, np.random.default_rng(5))


def dephased_squeezed_fidelity(r, sigma):
    # closed form: squeezed vacuum averaged over a Gaussian phase of width sigma
    u, w = math.exp(-2 * r), math.exp(2 * r)
    c2 = (1 + math.exp(-2 * sigma**2)) / 2
    V1 = np.diag([c2 * u + (1 - c2) * w, (1 - c2) * u + c2 * w])
    return gaussian_fidelity(np.diag([u, w]), V1)


def test_config_validation():
    with pytest.raises(ValueError):
        UAConfig(2, 3, (0.1, 0.2))
    with pytest.raises(ValueError):
        UAConfig(2, 2, (0.1,))
    with pytest.raises(ValueError):
        UAConfig(1, 2, (0.1,), weighting="bogus")
    cfg = UAConfig(2, 4, (0.1, 0.2))
    assert cfg.total_modes == 8
    assert cfg.ancilla == list(range(2, 8))


@given(N=st.integers(1, 4), log_n=st.integers(0, 3))
def test_decode_inverts_encode(N, log_n):
    n = 2**log_n
    E = encode_network(N, n)
    np.testing.assert_allclose(decode_network(N, n) @ E, np.eye(2 * N * n), atol=1e-12)


def test_encode_tree_shape():
    gates = encode_gates(2, 4)
    # butterfly: log2(n) stages of N * n / 2 splitters each
    assert len(gates) == 2 * 2 * 2
    assert all(g.theta == pytest.approx(math.pi / 4) for g in gates)
    assert [(g.i, g.j) for g in gates] == [(0, 2), (1, 3), (4, 6), (5, 7), (0, 4), (1, 5), (2, 6), (3, 7)]


def test_encode_spreads_signal_evenly():
    E = encode_network(1, 4)
    # x quadrature of mode 0 lands with amplitude 1/2 on every replica
    np.testing.assert_allclose(np.abs(E[0::2, 0]), 0.5, atol=1e-12)


def test_ideal_output_dimension_check():
    with pytest.raises(DimensionError):
        ideal_output(UAConfig(3, 1, (0.1,) * 3), single_phase_circuit())


def test_prepare_input_is_squeezed_plus_vacua():
    V = prepare_input(UAConfig(1, 2, (0.3,)))
    np.testing.assert_allclose(np.diag(V), [math.exp(-0.6), math.exp(0.6), 1, 1])


def test_sample_draws_match_sequential_generator():
    d = sample_draws(42, 3, 2, 5, 0.1)
    rng = np.random.default_rng([42, 3])
    seq = np.stack([0.1 * rng.standard_normal(5) for _ in range(2)])
    np.testing.assert_array_equal(d, seq)
    assert not np.array_equal(d, sample_draws(42, 4, 2, 5, 0.1))


def test_sample_draws_independent_across_indices():
    d = np.stack([sample_draws(0, s, 1, 2, 1.0)[0] for s in range(5000)])
    corr = np.corrcoef(d[:-1, 0], d[1:, 0])[0, 1]
    assert abs(corr) < 0.05


@given(N=st.integers(1, 3), log_n=st.integers(0, 2), r=st.floats(0.0, 0.9), seed=st.integers(0, 99))
def test_noiseless_is_exactly_identity(N, log_n, r, seed):
    cfg = UAConfig(N, 2**log_n, (r,) * N)
    target = random_clements(N, np.random.default_rng(seed)) if N > 1 else single_phase_circuit(0.3)
    res = run_ensemble(cfg, target, NoiseModel(0.0), 4, seed)
    assert res.fidelity == 1.0 and res.exact_p == 1.0 and res.approx_p == 1.0


def test_heralded_states_stay_pure():
    cfg, target = two_mode(4)
    res = run_single_sample(cfg, target, NoiseModel(0.1), rng=np.random.default_rng(0))
    assert check_physicality(res.covariance).pure
    assert 0 < res.exact_p <= 1


def test_single_sample_replay_matches_generator():
    cfg, target = two_mode(2)
    a = run_single_sample(cfg, target, NoiseModel(0.05), rng=np.random.default_rng(1))
    b = run_single_sample(cfg, target, NoiseModel(0.05), draws=a.draws)
    np.testing.assert_array_equal(a.covariance, b.covariance)
    with pytest.raises(ValueError):
        run_single_sample(cfg, target, NoiseModel(0.05))


def test_pipeline_batch_equals_single_samples():
    cfg, target = two_mode(2)
    pipe = Pipeline(cfg, target)
    draws = np.stack([sample_draws(9, s, 2, 3, 0.08) for s in range(4)])
    covs, exact, _ = pipe.evaluate(draws)
    for s in range(4):
        one = run_single_sample(cfg, target, NoiseModel(0.08), draws=draws[s])
        np.testing.assert_allclose(covs[s], one.covariance, atol=1e-13)
        assert exact[s] == pytest.approx(one.exact_p, abs=1e-14)


@pytest.mark.parametrize("r,sigma", [(0.5, 0.1), (0.8, 0.05), (0.1, 0.03)])
def test_unprotected_single_mode_matches_closed_form(r, sigma):
    cfg = UAConfig(1, 1, (r,))
    res = integrate_ensemble(cfg, single_phase_circuit(), NoiseModel(sigma))
    assert res.fidelity == pytest.approx(dephased_squeezed_fidelity(r, sigma), abs=1e-12)
    mc = run_ensemble(cfg, single_phase_circuit(), NoiseModel(sigma), 10_000, 3)
    assert abs(mc.fidelity - res.fidelity) <= 4 * mc.fidelity_stderr + 1e-12


def test_quadrature_agrees_with_monte_carlo_when_heralded():
    cfg = UAConfig(1, 2, (0.5,))
    quad = integrate_ensemble(cfg, single_phase_circuit(), NoiseModel(0.1))
    mc = run_ensemble(cfg, single_phase_circuit(), NoiseModel(0.1), 10_000, 11)
    assert abs(mc.fidelity - quad.fidelity) <= 4 * mc.fidelity_stderr
    assert abs(mc.exact_p - quad.exact_p) <= 4 * mc.exact_p_stderr
    # frozen regression value of the quadrature result
    assert quad.fidelity == pytest.approx(0.993271388, abs=1e-8)
    assert quad.exact_p == pytest.approx(0.998666954, abs=1e-8)


def test_quadrature_degree_bounds():
    assert quadrature_degree(0) == 1
    assert quadrature_degree(2) == 10
    assert quadrature_degree(5) == 10
    assert 3 <= quadrature_degree(8) < 10
    with pytest.raises(ValueError):
        quadrature_degree(20)


def test_thread_count_does_not_change_results():
    cfg, target = two_mode(2)
    a = run_ensemble(cfg, target, NoiseModel(0.08), 1000, 5, threads=1)
    b = run_ensemble(cfg, target, NoiseModel(0.08), 1000, 5, threads=4)
    np.testing.assert_array_equal(a.mixture_cov, b.mixture_cov)
    assert (a.fidelity, a.fidelity_stderr, a.exact_p) == (b.fidelity, b.fidelity_stderr, b.exact_p)


def test_replicas_reduce_infidelity():
    cfg1, target = two_mode(1)
    F = [run_ensemble(UAConfig(2, n, (0.5, 0.7)), target, NoiseModel(0.08), 4000, 2).fidelity
         for n in (1, 2, 4)]
    assert F[0] < F[1] < F[2] < 1


def _slope(cfg, target):
    sigmas = np.array([0.005, 0.01, 0.02, 0.04])
    infid = [1 - run_ensemble(cfg, target, NoiseModel(s), 2000, 17).fidelity for s in sigmas]
    return np.polyfit(np.log(sigmas), np.log(infid), 1)[0]


@pytest.mark.parametrize("n", [1, 2])
def test_small_noise_infidelity_is_quadratic(n):
    cfg, target = two_mode(n)
    assert 1.8 <= _slope(cfg, target) <= 2.2


def test_uniform_weighting_differs_slightly():
    target = single_phase_circuit()
    h = integrate_ensemble(UAConfig(1, 2, (0.7,)), target, NoiseModel(0.1))
    u = integrate_ensemble(UAConfig(1, 2, (0.7,), weighting="uniform"), target, NoiseModel(0.1))
    assert h.fidelity != u.fidelity
    assert abs(h.fidelity - u.fidelity) < 1e-3
