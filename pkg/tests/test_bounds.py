import numpy as np
import pytest
from hypothesis import given, strategies as st

from clonebench import adversaries as adv
from clonebench.bounds import (check_classical_ind_dep, check_ind_dep, check_tfkw_perm, cube_loss_check,
                               default_permutations, moe_cd_bound, triv_sandwich_check)
from clonebench.games import ChallengeExtension, ExperimentConfig, make_game, with_token_noise
from clonebench.seesaw import multistart
from clonebench.suites import random_ind_dep_instance

seeds = st.integers(0, 2**32 - 1)


def test_moe_bound_values():
    assert moe_cd_bound(1) == pytest.approx(0.9204482076, abs=1e-9)
    assert moe_cd_bound(4) == pytest.approx(0.7177897, abs=1e-6)
    vals = [moe_cd_bound(k) for k in range(1, 12)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert np.allclose(np.array(vals[1:]) / vals[:-1], vals[0])
    with pytest.raises(ValueError):
        moe_cd_bound(0)


def test_ind_dep_identity_instance():
    rep = check_ind_dep([np.eye(2)] * 3, [np.eye(2)] * 3, np.eye(4)[0], np.eye(3) / 3)
    assert rep.main.lhs == pytest.approx(1.0)
    assert rep.weights.p_ind == pytest.approx(1.0)
    assert rep.passed


def test_ind_dep_diagonal_instance():
    ops = [np.diag(np.eye(8)[r]) for r in range(8)]
    state = np.zeros(64)
    state[[9 * i for i in range(8)]] = 1 / np.sqrt(8)
    rep = check_ind_dep(ops, ops, state, np.eye(8) / 8)
    assert rep.main.lhs == pytest.approx(1 / 8)
    assert rep.main.extra["p_ind"] == pytest.approx(1 / 64)
    assert rep.main.rhs == pytest.approx(1.5)


@given(seeds)
def test_ind_dep_random(seed):
    b, c, rho, t = random_ind_dep_instance(np.random.default_rng(seed))
    rep = check_ind_dep(b, c, rho, t)
    assert rep.passed
    assert rep.weights.p_ind == pytest.approx(rep.main.extra["p_ind"], abs=1e-9)


def test_ind_dep_rejects_bad_inputs():
    with pytest.raises(ValueError):
        check_ind_dep([np.eye(2) * 2], [np.eye(2)], np.eye(4)[0], np.ones((1, 1)))
    with pytest.raises(ValueError):
        check_ind_dep([np.eye(2)] * 2, [np.eye(2)] * 2, np.eye(4)[0], np.array([[0.5, 0.5], [0, 0]]))


def test_classical_examples():
    rep = check_classical_ind_dep(np.ones(4), np.ones(4), np.eye(4) / 4)
    assert rep.lhs == pytest.approx(1) and rep.rhs == pytest.approx(1)
    c = 0.37
    rep = check_classical_ind_dep(np.full(5, c), np.full(5, c), np.eye(5) / 5)
    assert rep.extra["delta"] == pytest.approx(c**2) and rep.rhs == pytest.approx(c**2)
    with pytest.raises(ValueError):
        check_classical_ind_dep([0.5, 0.5], [0.5, 0.5], np.array([[0.5, 0.0], [0.25, 0.25]]))


@given(st.integers(1, 16), seeds)
def test_classical_random(n, seed):
    g = np.random.default_rng(seed)
    perm_mix = sum(w * np.eye(n)[g.permutation(n)] for w in g.dirichlet(np.ones(3))) / n
    assert check_classical_ind_dep(g.random(n), g.random(n), perm_mix).passed


def test_tfkw_examples():
    a = np.diag([0.3, 0.7])
    rep = check_tfkw_perm([a])
    assert rep.lhs == pytest.approx(rep.rhs)
    p = np.diag([1.0, 0.0])
    rep = check_tfkw_perm([p, np.eye(2) - p])
    assert rep.lhs == pytest.approx(1.0) and rep.rhs == pytest.approx(1.0)
    assert rep.extra["terms"] == pytest.approx([1.0, 0.0])


def test_tfkw_rejects_bad_permutations():
    with pytest.raises(ValueError):
        check_tfkw_perm([np.eye(2)] * 3, [np.arange(3)] * 3)
    with pytest.raises(ValueError):
        check_tfkw_perm([np.diag([1.0, -1.0])])


def test_default_permutations_orthogonal():
    for n in (1, 3, 4, 6, 8):
        perms = np.stack(default_permutations(n))
        for i in range(n):
            assert sorted(perms[:, i]) == list(range(n))


@given(st.integers(1, 8), st.integers(1, 16), seeds)
def test_tfkw_random(n, d, seed):
    g = np.random.default_rng(seed)
    ops = []
    for _ in range(n):
        x = g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))
        ops.append(x @ x.conj().T)
    assert check_tfkw_perm(ops).passed


def test_cube_loss_examples():
    assert cube_loss_check(0.0, 0.0).passed
    g = make_game("bb84", 2)
    s = adv.trivial_strategy(g, "C")
    v = adv.evaluate_exact(ExperimentConfig(g), s)
    rep = cube_loss_check(v, v, 0.25)
    assert rep.passed and rep.extra["dropped_term"] == 0.25


@pytest.mark.parametrize("lam", [1, 2])
def test_cube_loss_seesaw_family(lam):
    g = make_game("sde", lam)
    cfg_ind = ExperimentConfig(g)
    cfg_id = ExperimentConfig(g, extension=ChallengeExtension.identical())
    _, runs = multistart(cfg_id, 3, lam, dims=(2, 2), max_iters=10)
    for r in runs:
        rep = cube_loss_check(adv.evaluate_exact(cfg_id, r.strategy), adv.evaluate_exact(cfg_ind, r.strategy), 0.5)
        assert rep.passed


def test_sandwich_perfect_correctness_collapses():
    rep = triv_sandwich_check(ExperimentConfig(make_game("bb84", 2)))
    assert rep.delta == pytest.approx(1.0)
    assert rep.lower == pytest.approx(rep.upper)
    assert rep.passed


@pytest.mark.parametrize("p", [0.0, 0.2, 0.5, 1.0])
def test_sandwich_with_noise(p):
    rep = triv_sandwich_check(ExperimentConfig(with_token_noise(make_game("bb84", 1), p)))
    assert rep.passed
    if p == 1.0:
        assert rep.delta == pytest.approx(0.5) and rep.upper_ok


def test_sandwich_only_for_symmetric_search():
    with pytest.raises(ValueError):
        triv_sandwich_check(ExperimentConfig(make_game("bb84-cd", 1)))
