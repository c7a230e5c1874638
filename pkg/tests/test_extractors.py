import numpy as np
import pytest
from hypothesis import given, strategies as st

from clonebench.bits import all_bitstrings, from_int, inner
from clonebench.extractors import (IpPredictor, build_biased_predictor, coefficient_on_input, error_set,
                                   gl_extract_local, gl_extract_simultaneous, gl_local_circuit,
                                   gl_local_distribution, gl_simultaneous_distribution, mode_entangled_fixture,
                                   product_fixture, register_state, simultaneous_prediction_probability)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_perfect_predictor_extracts_with_certainty(n):
    x = from_int(2**n - 2, n)
    pred = build_biased_predictor(x, 0.5, 0)
    assert pred.accuracy(pred.default_state, x) == 1.0
    assert gl_local_distribution(pred, pred.default_state)[int(x, 2)] == pytest.approx(1.0, abs=1e-12)
    assert gl_extract_local(pred, pred.default_state, seed=1) == x


def test_accuracy_enumeration():
    x = "101"
    pred = build_biased_predictor(x, 0.25, 3)
    hits = sum(pred.correct_probability(pred.default_state, "", r, x) for r in all_bitstrings(3))
    assert hits == pytest.approx(6.0)  # 3/4 of the 8 values of r
    coin = build_biased_predictor(x, 0.0, 3)
    assert coin.accuracy(coin.default_state, x) == pytest.approx(0.5)


def test_error_set_size_must_be_integral():
    assert len(error_set(3, 0.25, 0)) == 2
    with pytest.raises(ValueError):
        error_set(3, 0.3, 0)
    with pytest.raises(ValueError):
        error_set(3, 0.7, 0)


@given(st.integers(2, 4), st.sampled_from([0.0, 0.125, 0.25, 0.375, 0.5]), st.integers(0, 10**6))
def test_local_success_is_four_eps_squared(n, eps, seed):
    if ((0.5 - eps) * 2**n) % 1:
        return
    x = from_int(seed % 2**n, n)
    pred = build_biased_predictor(x, eps, seed)
    dist = gl_local_distribution(pred, pred.default_state)
    assert dist.sum() == pytest.approx(1.0, abs=1e-12)
    assert dist[int(x, 2)] == pytest.approx(4 * eps**2, abs=1e-12)


def test_dense_circuit_agrees(rng):
    x = "011"
    pred = build_biased_predictor(x, 0.25, rng)
    assert np.allclose(gl_local_circuit(pred, pred.default_state), gl_local_distribution(pred, pred.default_state),
                       atol=1e-12)


def test_sampled_local_extraction():
    x = "1101"
    pred = build_biased_predictor(x, 0.25, 11)
    outs = gl_extract_local(pred, pred.default_state, seed=4, size=10_000)
    p = np.mean([o == x for o in outs])
    se = np.sqrt(p * (1 - p) / 10_000)
    assert p >= 0.25 - 4 * se


def test_product_of_perfect_predictors():
    fx = product_fixture("110", 0.5, 0.5, 2)
    joint = gl_simultaneous_distribution(fx.pred_b, fx.pred_c, fx.state)
    assert joint[6, 6] == pytest.approx(1.0, abs=1e-12)
    assert simultaneous_prediction_probability(fx.pred_b, fx.pred_c, fx.state, "110") == pytest.approx(1.0)


def test_perfect_and_coin_have_no_guarantee():
    fx = product_fixture("110", 0.5, 0.0, 2)
    assert fx.eps == pytest.approx(0.0)
    joint = gl_simultaneous_distribution(fx.pred_b, fx.pred_c, fx.state)
    assert joint.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("eps", [0.125, 0.25])
@pytest.mark.parametrize("n", [3, 4])
def test_mode_entangled_fixture(n, eps):
    x = from_int(5, n)
    fx = mode_entangled_fixture(x, eps, 1)
    adv = simultaneous_prediction_probability(fx.pred_b, fx.pred_c, fx.state, x) - 0.5
    assert adv == pytest.approx(eps, abs=1e-12)
    joint = gl_simultaneous_distribution(fx.pred_b, fx.pred_c, fx.state)
    assert joint.sum() == pytest.approx(1.0, abs=1e-12)
    assert joint[int(x, 2), int(x, 2)] == pytest.approx(fx.mode_weight, abs=1e-12)
    assert joint[int(x, 2), int(x, 2)] >= 4 * eps**2
    pairs = gl_extract_simultaneous(fx.pred_b, fx.pred_c, fx.state, seed=3, size=10_000)
    p = np.mean([a == x and b == x for a, b in pairs])
    assert p >= 4 * eps**2 - 4 * np.sqrt(p * (1 - p) / 10_000)


def test_coefficient_on_input_matches_probability():
    fx = mode_entangled_fixture("101", 0.25, 0)
    c = coefficient_on_input(fx.pred_b, fx.pred_c, fx.state, "101")
    assert abs(c.imag) < 1e-12
    assert c.real == pytest.approx(fx.mode_weight, abs=1e-12)


def test_predictor_validation():
    u = {("", r): np.eye(4) * 2 for r in all_bitstrings(1)}
    with pytest.raises(ValueError):
        IpPredictor(1, 2, u)
    table = {("", r): [inner(r, w) for w in all_bitstrings(2)] for r in all_bitstrings(2)}
    p = IpPredictor.from_bit_table(2, table, 4, default_state=register_state("10"))
    assert p.accuracy(p.default_state, "10") == 1.0
