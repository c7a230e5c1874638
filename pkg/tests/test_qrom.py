import numpy as np
import pytest
from hypothesis import given, strategies as st

from clonebench.qrom import (OracleCircuit, OracleTable, bbbv_check, oracle_unitary, point_weights,
                             puncture_to_fresh, query_weight, random_oracle_circuit, reprogram, run_circuit,
                             subset_hiding_experiment)
from clonebench.suites import bbbv_instances, classical_query_distinguisher

H1 = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def test_oracle_unitary_examples():
    assert np.allclose(oracle_unitary(OracleTable.constant(2, 1)).entries, np.eye(8))
    u = oracle_unitary(OracleTable(1, 1, (1, 0))).entries
    expected = np.zeros((4, 4))
    for x, y in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        h = 1 - x
        expected[2 * x + (y ^ h), 2 * x + y] = 1
    assert np.allclose(u, expected)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 10**6))
def test_oracle_is_involution(m, n, seed):
    u = oracle_unitary(OracleTable.random(m, n, seed)).entries
    assert np.max(np.abs(u @ u - np.eye(u.shape[0]))) <= 1e-12


def test_reprogram_round_trip():
    t = OracleTable.random(3, 2, 5)
    assert reprogram(t, 4, t.table[4]).table == t.table
    assert reprogram(reprogram(t, 4, 3), 4, t.table[4]).table == t.table
    p = puncture_to_fresh(t, 6, 1)
    diff = [i for i in range(8) if p.table[i] != t.table[i]]
    assert diff == [6]
    assert OracleTable.from_hex(p.to_hex()) == p


def _circuit(m, n, init, us, work=1):
    return OracleCircuit(m, n, work, np.asarray(init, dtype=complex), tuple(np.asarray(u, dtype=complex) for u in us))


def test_query_weight_classical_input():
    dim = 2**3
    init = np.zeros(dim)
    init[3 << 1] = 1
    c = _circuit(2, 1, init, [np.eye(dim), np.eye(dim)])
    assert query_weight(c, [0, 1, 2], OracleTable.random(2, 1, 0)) == [0.0]


def test_query_weight_uniform_superposition():
    m = 3
    dim = 2 ** (m + 1)
    init = np.zeros(dim)
    init[[x << 1 for x in range(2**m)]] = 2 ** (-m / 2)
    c = _circuit(m, 1, init, [np.eye(dim), np.eye(dim)])
    assert query_weight(c, [1, 4, 6], OracleTable.random(m, 1, 1))[0] == pytest.approx(3 / 8)


def test_two_query_weights_by_hand():
    """|0>|0> -H-> query, then H again: with the zero oracle the second query sits on x = 0."""
    h = np.kron(H1, np.eye(2))
    c = _circuit(1, 1, [1, 0, 0, 0], [h, h, np.eye(4)])
    w = query_weight(c, [0], OracleTable.constant(1, 1))
    assert w == pytest.approx([0.5, 1.0])
    w1 = query_weight(c, [0], OracleTable(1, 1, (0, 1)))
    assert w1 == pytest.approx([0.5, 0.5])


def test_bbbv_patch_outside_support_is_invisible():
    dim = 8
    init = np.zeros(dim)
    init[0] = 1
    c = _circuit(2, 1, init, [np.eye(dim), np.eye(dim)])
    rep = bbbv_check(c, OracleTable.constant(2, 1), {(0, 3): 1})
    assert rep.lhs == pytest.approx(0.0) and rep.extra["eps"] == 0.0


def test_bbbv_full_weight_patch():
    dim = 4
    init = np.zeros(dim)
    init[2] = 1  # query x = 1, answer 0
    c = _circuit(1, 1, init, [np.eye(dim), np.eye(dim)])
    rep = bbbv_check(c, OracleTable.constant(1, 1), {(0, 1): 1})
    assert rep.lhs == pytest.approx(1.0)
    assert rep.extra["safe_bound"] >= rep.lhs


def test_bbbv_stated_half_eps_fails_on_a_superposition_query():
    w = 0.3
    init = np.zeros(4, dtype=complex)
    init[2] = np.sqrt(w)
    init[0] = np.sqrt(1 - w)
    c = _circuit(1, 1, init, [np.eye(4), np.eye(4)])
    rep = bbbv_check(c, OracleTable.constant(1, 1), {(0, 1): 1})
    assert rep.lhs == pytest.approx(np.sqrt(2 * w - w**2))
    assert rep.rhs == pytest.approx(np.sqrt(w) / 2)
    assert not rep.passed
    assert rep.extra["safe_pass"]


def test_bbbv_safe_bound_on_random_circuits():
    for _, circ, table, patches in bbbv_instances(3, 200):
        assert bbbv_check(circ, table, patches).extra["safe_pass"]


def test_run_circuit_pre_states_count(rng):
    c = random_oracle_circuit(2, 1, 2, 3, rng)
    final, pre = run_circuit(c, OracleTable.random(2, 1, 0))
    assert len(pre) == 3
    assert np.linalg.norm(final) == pytest.approx(1.0)
    assert point_weights(c, pre[0]).sum() == pytest.approx(1.0)


def test_subset_hiding_trivial_cases():
    dim = 2 ** (4 + 1)
    init = np.zeros(dim)
    init[0] = 1
    blind = OracleCircuit(4, 1, 1, init.astype(complex), (np.eye(dim, dtype=complex),), np.zeros(dim))
    res = subset_hiding_experiment(blind, [3], 4, 50, 0)
    assert res.advantage <= res.stderr + 1e-12
    res0 = subset_hiding_experiment(classical_query_distinguisher(4, 1), [3], 0, 5, 0)
    assert res0.advantage == 0.0


def test_subset_hiding_classical_query_counting_bound():
    m = 8
    d = classical_query_distinguisher(m, 7)
    res = subset_hiding_experiment(d, [0], 4, 2000, 1)
    assert res.counting_bound == pytest.approx(4 / 255)
    assert res.advantage <= res.counting_bound + 4 * res.stderr
