import numpy as np
import pytest

from clonebench.qcore import Povm, random_povm, random_state
from clonebench.spectral import (exact_acceptance, exact_joint_acceptance, nonlocal_valest, schedule_length,
                                 valest, valest_batch, valest_circuit, valest_with_block_measurement)

ANS = ["0", "1"]


def _instance(rng, dp=2):
    resp = {r: random_povm(dp, ANS, rng) for r in range(2)}
    return (lambda a, r: a == str(r)), resp, random_state(dp, rng).amplitudes


def test_schedule_length():
    assert schedule_length(0.5) == 32
    assert schedule_length(0.2) == 200


def test_accept_everything_and_nothing(rng):
    _, resp, st = _instance(rng)
    assert np.all(valest_batch(lambda a, r: True, resp, st, 0.3, 1, runs=100).estimates == 1.0)
    assert np.all(valest_batch(lambda a, r: False, resp, st, 0.3, 1, runs=100).estimates == 0.0)


def test_half_acceptance_is_unbiased(rng):
    coin = {0: Povm([np.eye(2) / 2, np.eye(2) / 2], ANS), 1: Povm([np.eye(2) / 2, np.eye(2) / 2], ANS)}
    ver = lambda a, r: a == str(r)
    st = random_state(2, rng).amplitudes
    assert exact_acceptance(ver, coin, st) == pytest.approx(0.5)
    b = valest_batch(ver, coin, st, 0.2, 5, runs=10_000)
    assert abs(b.mean - 0.5) <= 3 * b.stderr


def test_random_instance_unbiased(rng):
    ver, resp, st = _instance(rng, 3)
    b = valest_batch(ver, resp, st, 0.25, 9, runs=5000)
    assert abs(b.mean - exact_acceptance(ver, resp, st)) <= 3 * b.stderr
    assert b.overflow == 0


def test_mixed_state_input(rng):
    ver, resp, _ = _instance(rng)
    rho = np.diag([0.3, 0.7]).astype(complex)
    b = valest_batch(ver, resp, rho, 0.3, 2, runs=5000)
    assert abs(b.mean - exact_acceptance(ver, resp, rho)) <= 3 * b.stderr


def test_almost_projective(rng):
    ver, resp, st = _instance(rng)
    eps = 0.1
    b = valest_batch(ver, resp, st, eps, 4, runs=3000, repeat=True)
    far = np.mean(np.abs(b.estimates - b.repeats) >= eps)
    assert far <= eps + 3 * np.sqrt(eps * (1 - eps) / 3000)


def test_single_run_transcript(rng):
    ver, resp, st = _instance(rng)
    out = valest(ver, resp, st, 0.5, 3)
    assert out.transcript[0] == 1
    assert len(out.transcript) >= 1 + schedule_length(0.5)
    assert abs(np.linalg.norm(out.residual) - 1) < 1e-9
    assert 0 <= out.estimate <= 1


def test_circuit_projectors(rng):
    ver, resp, _ = _instance(rng, 3)
    c = valest_circuit(ver, resp)
    for p in (c.proj_a, c.proj_b):
        assert np.allclose(p @ p, p, atol=1e-9)
    assert c.full_dim == 2 * 3 * 2


def test_nonlocal_product_of_ones(rng):
    _, resp, _ = _instance(rng)
    st = np.kron(random_state(2, rng).amplitudes, random_state(2, rng).amplitudes)
    nl = nonlocal_valest(lambda a, r: True, resp, resp, st, 0.4, 1, runs=50)
    assert np.all(nl.products == 1.0)


def test_nonlocal_entangled_unbiased(rng):
    vb, rb, _ = _instance(rng)
    vc, rc, _ = _instance(rng)
    st = random_state(4, rng).amplitudes
    exact = exact_joint_acceptance((vb, vc), rb, rc, st)
    nl = nonlocal_valest((vb, vc), rb, rc, st, 0.4, 6, runs=6000)
    assert abs(nl.mean_product - exact) <= 3 * nl.stderr


def test_block_measurement_commutes_in_distribution(rng):
    from scipy import stats

    ver, resp, st = _instance(rng)
    lb, eb = valest_with_block_measurement(ver, resp, st, 0.3, "before", 1, runs=3000)
    la, ea = valest_with_block_measurement(ver, resp, st, 0.3, "after", 2, runs=3000)
    assert stats.ks_2samp(eb, ea).pvalue > 1e-3
    n = max(lb.max(), la.max()) + 1
    assert np.abs(np.bincount(lb, minlength=n) / 3000 - np.bincount(la, minlength=n) / 3000).max() < 0.05
    with pytest.raises(ValueError):
        valest_with_block_measurement(ver, resp, st, 0.3, "during", 1)
