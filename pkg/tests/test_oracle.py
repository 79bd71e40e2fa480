from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.hermite_e import hermeval

from antisym.activations import get_activation
from antisym.envelope import make_rng, sample_envelope
from antisym.network import init_network
from antisym.oracle import (
    antisymmetrize_hidden,
    antisymmetrize_network,
    antisymmetrize_neurons,
    brute_antisymmetrize,
    estimate_mean,
    exp_norm_closed_form,
    expected_norm_over_outputs,
    mc_norm_sq,
    slater_exponential,
)
from antisym.permutations import CapacityError

RELU, TANH, EXP = (get_activation(k) for k in ("relu", "tanh", "exp"))


def _swap(x, i, j):
    y = np.array(x, copy=True)
    y[..., [i, j], :] = y[..., [j, i], :]
    return y


def test_single_particle_is_identity():
    f = lambda X: np.sin(X[:, 0, 0]) + X[:, 0, 1]  # noqa: E731
    x = np.array([[0.3, -1.2]])
    assert brute_antisymmetrize(f, x).value == pytest.approx(f(x[None])[0])


def test_two_particles_first_coordinate():
    out = brute_antisymmetrize(lambda X: X[:, 0, 0], np.array([[1.5], [0.25]]))
    assert out.value == pytest.approx((1.5 - 0.25) / math.sqrt(2))
    assert out.n_permutations == 2


def test_symmetric_function_vanishes():
    x = make_rng(1).normal(size=(3, 2))
    f = lambda X: np.sum(X**2, axis=(1, 2))  # noqa: E731
    assert abs(brute_antisymmetrize(f, x).value) < 1e-12 * float(np.sum(x**2))


def test_linear_monomial_vanishes_for_three_particles():
    x = np.array([[0.7], [-1.1], [2.0]])
    assert abs(brute_antisymmetrize(lambda X: X[:, 0, 0], x).value) < 1e-14


@pytest.mark.parametrize("n", range(3, 9))
@pytest.mark.parametrize("d", [1, 3])
def test_low_degree_monomials_vanish(n, d):
    rng = make_rng(40, n, d)
    x = rng.normal(size=(n, d))
    for _ in range(3):
        # random exponents with total degree n - 2 spread over particles and coordinates
        exps = np.zeros((n, d), dtype=int)
        for _ in range(n - 2):
            exps[rng.integers(n), rng.integers(d)] += 1
        f = lambda X, e=exps: np.prod(X**e, axis=(1, 2))  # noqa: E731
        assert abs(brute_antisymmetrize(f, x).value) < 1e-12


def test_degree_n_minus_one_survives():
    # the Vandermonde-type monomial x_2 x_3^2 is the lowest degree that survives for n = 3
    x = np.array([[0.1], [0.5], [-0.8]])
    val = brute_antisymmetrize(lambda X: X[:, 1, 0] * X[:, 2, 0] ** 2, x).value
    vdm = np.prod([x[j, 0] - x[i, 0] for i in range(3) for j in range(i + 1, 3)])
    assert val == pytest.approx(vdm / math.sqrt(6))


@pytest.mark.parametrize("n", range(2, 7))
def test_antisymmetry_of_all_evaluators(n):
    rng = make_rng(41, n)
    d = 2
    w = rng.normal(size=(n, d))
    x = rng.normal(size=(n, d))
    f = lambda X: np.tanh(np.einsum("id,sid->s", w, X)) * np.exp(-X[:, 0, 0])  # noqa: E731
    for i in range(n - 1):
        y = _swap(x, i, i + 1)
        a = brute_antisymmetrize(f, x).value
        assert brute_antisymmetrize(f, y).value == pytest.approx(-a, rel=1e-10)
        s = slater_exponential(w, 0.7, x)
        assert slater_exponential(w, 0.7, y) == pytest.approx(-s, rel=1e-10)
        b = antisymmetrize_neurons(TANH, w[None], np.stack([x, y]))
        assert b[1, 0] == pytest.approx(-b[0, 0], rel=1e-10)


@pytest.mark.parametrize("n", range(2, 6))
def test_antisymmetrizing_twice_scales_by_sqrt_factorial(n):
    rng = make_rng(42, n)
    w = rng.normal(size=(n, 1))
    x = rng.normal(size=(n, 1))
    f = lambda X: np.exp(np.einsum("id,sid->s", w, X))  # noqa: E731
    inner = lambda X: np.array([brute_antisymmetrize(f, xx).value.real for xx in X])  # noqa: E731
    twice = brute_antisymmetrize(inner, x).value
    assert twice == pytest.approx(math.sqrt(math.factorial(n)) * brute_antisymmetrize(f, x).value, rel=1e-10)


def test_slater_small_cases():
    w = np.array([[0.3, -0.4]])
    x = np.array([[1.0, 2.0]])
    assert slater_exponential(w, 1.5, x) == pytest.approx(np.exp(1.5j * (0.3 - 0.8)))
    w2 = np.array([[0.2], [-0.5]])
    x2 = np.array([[0.7], [1.3]])
    direct = (np.exp(1j * (0.2 * 0.7 - 0.5 * 1.3)) - np.exp(1j * (0.2 * 1.3 - 0.5 * 0.7))) / math.sqrt(2)
    assert slater_exponential(w2, 1.0, x2) == pytest.approx(direct, abs=1e-12)


def test_slater_batched():
    w = make_rng(3).normal(size=(4, 2))
    X = sample_envelope(4, 2, 6, 0)
    vals = slater_exponential(w, 0.9, X)
    assert vals.shape == (6,)
    assert vals[2] == pytest.approx(slater_exponential(w, 0.9, X[2]))


def test_cap_enforced():
    with pytest.raises(CapacityError):
        brute_antisymmetrize(lambda X: X[:, 0, 0], np.zeros((13, 1)))


def test_mc_norm_constant_and_moment():
    one = mc_norm_sq(lambda X: np.ones(len(X)), 2, 2, 100, 0)
    assert one.mean == 1.0 and one.ci90_low == one.ci90_high == 1.0
    est = mc_norm_sq(lambda X: X[:, 0, 0], 1, 1, 100_000, 1)
    assert est.ci90_low <= 1.0 <= est.ci90_high


def test_hermite_slater_is_normalized():
    # He_k / sqrt(k!) are orthonormal under the Gaussian weight, so the antisymmetrized
    # product of three distinct ones has unit norm
    def product(X):
        return np.prod([hermeval(X[:, i, 0], np.eye(3)[i]) / math.sqrt(math.factorial(i)) for i in range(3)], axis=0)

    g = lambda X: np.array([brute_antisymmetrize(product, x).value.real for x in X])  # noqa: E731
    est = mc_norm_sq(g, 3, 1, 40_000, 7)
    assert est.ci90_low - est.stderr <= 1.0 <= est.ci90_high + est.stderr


def test_estimate_mean_interval_methods():
    vals = make_rng(5).exponential(size=500)
    for method in ("normal", "bootstrap"):
        est = estimate_mean(vals, ci=method, seed=1)
        assert est.ci90_low <= est.mean <= est.ci90_high
    with pytest.raises(ValueError):
        estimate_mean(vals, ci="jackknife")


@given(st.lists(st.floats(0, 1e6), min_size=2, max_size=50))
def test_interval_brackets_mean(values):
    est = estimate_mean(np.array(values))
    assert est.ci90_low <= est.mean + 1e-9 * abs(est.mean) and est.mean <= est.ci90_high + 1e-9 * abs(est.mean)


def test_exp_closed_form_single_particle():
    assert exp_norm_closed_form(np.array([[0.6]])) == pytest.approx(math.exp(2 * 0.36))
    X = sample_envelope(1, 1, 1_000_000, 3)
    est = mc_norm_sq(lambda X: np.exp(0.6 * X[:, 0, 0]), 1, 1, 1_000_000, 3)
    assert est.ci90_low - est.stderr < math.exp(0.72) < est.ci90_high + est.stderr
    del X


def test_exp_closed_form_two_particles_analytic():
    w = np.array([[0.4], [-0.3]])
    # E|A exp(w.x)|^2 = E[exp(2 w1 x1 + 2 w2 x2)] - E[exp((w1 + w2)(x1 + x2))]
    expected = math.exp(2 * (0.16 + 0.09)) - math.exp((0.4 - 0.3) ** 2)
    assert exp_norm_closed_form(w) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("n", range(2, 7))
def test_exp_closed_form_against_brute_force(n):
    rng = make_rng(43, n)
    w = rng.normal(0, math.sqrt(1 / (3 * n)), (n, 3))
    est = mc_norm_sq(lambda X: antisymmetrize_neurons(EXP, w[None], X)[:, 0], n, 3, 20_000, n)
    exact = exp_norm_closed_form(w)
    # exp tails are heavy; allow four standard errors
    assert abs(est.mean - exact) < 4 * est.stderr


def test_exp_closed_form_degenerate_and_log():
    w = np.array([[0.3, 0.1], [0.3, 0.1], [0.0, 0.5]])
    assert exp_norm_closed_form(w) == pytest.approx(0.0, abs=1e-12)
    v = make_rng(8).normal(size=(4, 2))
    assert exp_norm_closed_form(v, log=True) == pytest.approx(math.log(exp_norm_closed_form(v)))


def test_exp_closed_form_ill_conditioned_uses_extended_precision():
    w = np.array([[1e-4], [2e-4], [3e-4]])
    val = exp_norm_closed_form(w)
    # Gram of exp(w_i w_j) is nearly singular; the exact value is tiny but positive
    assert 0 < val < 1e-20


def test_expected_norm_over_outputs_identities():
    w = make_rng(9).normal(0, 0.3, (1, 3, 2))
    norm = lambda wb: exp_norm_closed_form(wb)  # noqa: E731
    assert expected_norm_over_outputs(w, EXP, c_init=2.0) == pytest.approx(2.0 * norm(w[0]))
    dup = np.concatenate([w, w])
    assert expected_norm_over_outputs(dup, EXP, c_init=2.0) == pytest.approx(2.0 * norm(w[0]))
    with pytest.raises(ValueError):
        expected_norm_over_outputs(w[:, :2], RELU)


def test_expected_norm_over_outputs_against_sampled_output_weights():
    n, d, m = 4, 3, 5
    params = init_network(n, d, m, c_init=2, seed=13)
    X = sample_envelope(n, d, 4000, 2)
    H = antisymmetrize_hidden(params, TANH, X)
    per_neuron = np.mean(H**2, axis=0)
    analytic = 2.0 / m * per_neuron.sum()
    a = make_rng(14).normal(0, math.sqrt(2.0 / m), (1000, m))
    sampled = np.mean((H @ a.T) ** 2, axis=0)
    est = estimate_mean(sampled)
    assert est.ci90_low - est.stderr <= analytic <= est.ci90_high + est.stderr
    lookup = {tuple(wb.ravel()): v for wb, v in zip(params.blocks(), per_neuron)}
    via_api = expected_norm_over_outputs(params.W, TANH, n, d, neuron_norm=lambda wb: lookup[tuple(wb.ravel())])
    assert via_api == pytest.approx(analytic)


def test_network_is_combination_of_hidden_units():
    params = init_network(3, 2, 4, seed=1)
    X = sample_envelope(3, 2, 5, 0)
    direct = antisymmetrize_network(params, RELU, X)
    f = lambda Y: np.maximum(Y.reshape(len(Y), -1) @ params.W.T, 0) @ params.a  # noqa: E731
    assert direct[1] == pytest.approx(brute_antisymmetrize(f, X[1]).value.real, rel=1e-12)


@pytest.mark.parametrize("n", range(2, 8))
def test_slater_matches_brute_force_on_term_scale(n):
    # In one dimension the antisymmetrized plane wave is often far below its unit-modulus
    # terms, so agreement is measured on the scale of the terms rather than of the result.
    rng = make_rng(44, n)
    for _ in range(20):
        w = rng.normal(size=(n, 1))
        theta = rng.uniform(-3, 3)
        x = rng.normal(size=(n, 1))
        f = lambda X, w=w, th=theta: np.exp(1j * th * np.einsum("id,sid->s", w, X))  # noqa: E731
        assert abs(brute_antisymmetrize(f, x).value - slater_exponential(w, theta, x)) < 1e-12
