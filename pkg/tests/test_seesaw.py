import numpy as np
import pytest

from clonebench import adversaries as adv
from clonebench.bounds import moe_cd_bound
from clonebench.games import ExperimentConfig, make_game, trivial_success, with_constant_verifier, with_token_noise
from clonebench.qcore import random_povm
from clonebench.seesaw import (MoEObjective, cloning_value, multistart, optimize_povm_block, seesaw_optimize)


def test_bb84_one_qubit_reaches_known_optimum():
    best, runs = multistart(ExperimentConfig(make_game("bb84", 1)), 5, 0, dims=(2, 2))
    assert best.value == pytest.approx(np.cos(np.pi / 8) ** 2, abs=1e-4)
    assert all(r.monotone for r in runs)


def test_moe_lambda1_window_and_determinism():
    best, runs = multistart(MoEObjective(1), 20, 7)
    assert 0.75 <= best.value <= moe_cd_bound(1) + 1e-9
    again, _ = multistart(MoEObjective(1), 20, 7)
    assert again.value == best.value
    assert all(r.monotone for r in runs)
    assert adv.evaluate_moe_exact(1, best.strategy) == pytest.approx(best.value, abs=1e-12)


def test_classical_optimum_is_trivial_value():
    """Fully depolarized tokens leave nothing to clone: the optimum is the guessing value."""
    g = with_token_noise(make_game("bb84", 2), 1.0)
    cfg = ExperimentConfig(g)
    best, _ = multistart(cfg, 3, 1, dims=(2, 2))
    assert best.value == pytest.approx(0.25, abs=1e-6)
    assert trivial_success(cfg).value == pytest.approx(best.value, abs=1e-6)


def test_fixed_point_returns_init():
    g = with_constant_verifier(make_game("bb84", 1), True)
    init = adv.trivial_strategy(g, "C")
    res = seesaw_optimize(ExperimentConfig(g), init, max_iters=5)
    assert res.value == pytest.approx(1.0)
    assert res.converged


def test_zero_iterations_returns_init_value(rng):
    cfg = ExperimentConfig(make_game("sde", 1))
    init = adv.random_cloning_strategy(cfg.game, 2, 2, rng)
    res = seesaw_optimize(cfg, init, max_iters=0)
    assert res.value == pytest.approx(cloning_value(cfg, init))
    assert res.trace == [res.value]


def test_povm_block_never_worse(rng):
    for _ in range(10):
        k, d = 3, 3
        ws = np.stack([(lambda a: a @ a.conj().T)(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
                       for _ in range(k)])
        start = random_povm(d, ["0", "1", "2"], rng).elements
        new = optimize_povm_block(ws, start)
        before = float(np.real(np.einsum("kij,kji->", ws, start)))
        after = float(np.real(np.einsum("kij,kji->", ws, new)))
        assert after >= before - 1e-10
        assert np.allclose(new.sum(0), np.eye(d), atol=1e-9)
        assert min(np.linalg.eigvalsh(e).min() for e in new) > -1e-9


def test_moe_seesaw_lambda2_respects_bound():
    best, runs = multistart(MoEObjective(2), 4, 3)
    for r in runs:
        assert r.value <= moe_cd_bound(2) + 1e-9
        assert np.all(np.diff(r.trace) >= -1e-10)
