import numpy as np
import pytest
from hypothesis import given, strategies as st

from clonebench.qcore import (Channel, DensityMatrix, DimensionError, Operator, Povm, StateVector, apply_channel,
                              check_dim, herm_eig, measure_povm, operator_norm, partial_trace, psd_sqrt,
                              random_channel, random_density, random_povm, random_projector, random_state,
                              random_unitary, tensor)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
seeds = st.integers(0, 2**32 - 1)


def test_tensor_basis_states():
    out = tensor(StateVector(KET0), StateVector(KET1))
    assert np.allclose(out.amplitudes, [0, 1, 0, 0])
    assert out.dims == (2, 2)


def test_tensor_identities():
    i2 = Operator(np.eye(2), "unitary")
    assert np.allclose(tensor(i2, i2).entries, np.eye(4))


def test_tensor_plus_plus_is_uniform():
    out = tensor(StateVector(PLUS), StateVector(PLUS))
    assert np.allclose(out.amplitudes, np.full(4, 0.5))


def test_tensor_mixed_kinds_rejected():
    with pytest.raises(TypeError):
        tensor(StateVector(KET0), DensityMatrix(np.eye(2) / 2))


def test_state_norm_enforced():
    with pytest.raises(ValueError):
        StateVector([1, 1])
    StateVector([0.5, 0], subnormalized=True)
    with pytest.raises(ValueError):
        StateVector([2, 0], subnormalized=True)


def test_density_checks():
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(2))


def test_partial_trace_bell_is_maximally_mixed():
    bell = StateVector(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2)).density()
    assert np.allclose(partial_trace(bell, [0]).entries, np.eye(2) / 2)


def test_partial_trace_basis_state():
    s = StateVector(np.kron(KET0, KET1), (2, 2)).density()
    assert np.allclose(partial_trace(s, [1]).entries, np.outer(KET1, KET1))


@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_partial_trace_of_product(seed, da, db):
    g = np.random.default_rng(seed)
    rho, sigma = random_density(da, g), random_density(db, g)
    prod = DensityMatrix(np.kron(rho, sigma), (da, db))
    assert np.allclose(partial_trace(prod, [0]).entries, rho, atol=1e-10)
    assert np.allclose(partial_trace(prod, [1]).entries, sigma, atol=1e-10)


def test_partial_trace_bad_keep():
    with pytest.raises(ValueError):
        partial_trace(DensityMatrix(np.eye(4) / 4, (2, 2)), [2])


def test_identity_and_depolarizing_channels(rng):
    rho = DensityMatrix(random_density(2, rng))
    assert np.allclose(apply_channel(Channel.identity(2), rho).entries, rho.entries)
    assert np.allclose(apply_channel(Channel.depolarizing(2, 1.0), rho).entries, np.eye(2) / 2)


def test_append_bot_channel_gives_product(rng):
    """Hand the token to C and a one-dimensional |bot> register to B."""
    rho = DensityMatrix(random_density(2, rng))
    ch = Channel(np.eye(2)[None], (2,), (1, 2))
    out = apply_channel(ch, rho)
    assert out.dims == (1, 2)
    assert np.allclose(out.entries, np.kron(np.ones((1, 1)), rho.entries))


def test_channel_not_trace_preserving_rejected():
    with pytest.raises(ValueError):
        Channel([np.eye(2) * 0.5], (2,), (2,))


@given(seeds, st.integers(1, 3), st.integers(1, 4))
def test_random_channel_preserves_trace_and_positivity(seed, din, dout):
    g = np.random.default_rng(seed)
    ch = random_channel(din, dout, g)
    out = ch.apply_matrix(random_density(din, g))
    assert abs(np.trace(out) - 1) < 1e-10
    assert np.linalg.eigvalsh((out + out.conj().T) / 2).min() > -1e-10


def test_povm_examples():
    comp = Povm.from_basis(np.eye(2), ["0", "1"])
    assert measure_povm(comp, StateVector(KET0)).probabilities == pytest.approx({"0": 1.0, "1": 0.0})
    half = Povm([np.eye(2) / 2, np.eye(2) / 2], ["a", "b"])
    assert measure_povm(half, StateVector(PLUS)).probabilities == pytest.approx({"a": 0.5, "b": 0.5})
    had = Povm.from_basis(np.array([[1, 1], [1, -1]]) / np.sqrt(2), ["+", "-"])
    assert measure_povm(had, StateVector(KET0)).probabilities == pytest.approx({"+": 0.5, "-": 0.5})


def test_povm_validation():
    with pytest.raises(ValueError):
        Povm([np.eye(2), np.eye(2)], ["a", "b"])
    with pytest.raises(ValueError):
        Povm([np.eye(2)], ["a", "b"])
    with pytest.raises(ValueError):
        Povm([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])], ["a", "b"])


@given(seeds, st.integers(1, 5), st.integers(1, 4))
def test_povm_probabilities_sum_to_one(seed, d, k):
    g = np.random.default_rng(seed)
    povm = random_povm(d, [str(i) for i in range(k)], g)
    res = measure_povm(povm, DensityMatrix(random_density(d, g)))
    assert sum(res.probabilities.values()) == pytest.approx(1.0, abs=1e-10)
    assert min(res.probabilities.values()) > -1e-12


def test_luders_post_state_projective():
    res = measure_povm(Povm.from_basis(np.eye(2), ["0", "1"]), StateVector(PLUS))
    assert np.allclose(res.post_states["1"].entries, np.diag([0, 1]))


def test_herm_eig_examples():
    w, v = herm_eig(np.diag([0.3, 0.7]))
    assert np.allclose(w, [0.3, 0.7])
    assert np.allclose(np.abs(v), np.eye(2))
    w, v = herm_eig(np.outer(PLUS, PLUS))
    assert np.allclose(w, [0, 1])
    assert abs(abs(np.vdot(v[:, 1], PLUS)) - 1) < 1e-12
    with pytest.raises(ValueError):
        herm_eig(np.array([[0, 1], [0, 0]]))


@given(seeds, st.integers(1, 8))
def test_herm_eig_reconstructs(seed, d):
    g = np.random.default_rng(seed)
    a = g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))
    h = a + a.conj().T
    w, v = herm_eig(h)
    assert np.max(np.abs((v * w) @ v.conj().T - h)) <= 1e-8
    assert np.allclose(v.conj().T @ v, np.eye(d), atol=1e-10)


def test_operator_norm_examples(rng):
    assert operator_norm(np.diag([0.3, 0.7])) == pytest.approx(0.7)
    assert operator_norm(random_unitary(4, rng)) == pytest.approx(1.0)
    a = np.diag([1.0, 0.0])
    b = np.outer(PLUS, PLUS)
    assert operator_norm(psd_sqrt(a) @ psd_sqrt(b)) == pytest.approx(1 / np.sqrt(2))


def test_random_projector_extremes(rng):
    assert np.allclose(random_projector(4, 0, rng).entries, 0)
    assert np.allclose(random_projector(4, 4, rng).entries, np.eye(4))
    with pytest.raises(ValueError):
        random_projector(3, 4, rng)


def test_random_state_norms():
    norms = [np.linalg.norm(random_state(3, s).amplitudes) for s in range(10_000)]
    assert max(abs(n - 1) for n in norms) <= 1e-12


def test_objects_are_immutable():
    s = StateVector(KET0)
    with pytest.raises(AttributeError):
        s.dims = (1,)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_dimension_guard(monkeypatch):
    check_dim(4096)
    with pytest.raises(DimensionError):
        check_dim(4097)
    monkeypatch.setenv("CLONEBENCH_MAX_DIM", "8192")
    check_dim(8192)
    monkeypatch.setenv("CLONEBENCH_MAX_DIM", "16")
    with pytest.raises(DimensionError):
        StateVector(np.eye(32)[0])
    monkeypatch.setenv("CLONEBENCH_MAX_DIM", "lots")
    with pytest.raises(DimensionError):
        check_dim(2)
