import numpy as np
import pytest
from hypothesis import given, strategies as st

from clonebench.qcore import random_contraction, random_projector, random_unitary
from clonebench.spectral import (eigenvector_orthogonality_check, jordan_decompose, symmetric_threshold,
                                 threshold_measure)

seeds = st.integers(0, 2**32 - 1)
PLUS = np.array([1, 1]) / np.sqrt(2)


def _pair(seed, d=None):
    g = np.random.default_rng(seed)
    d = d or int(g.integers(1, 13))
    return (random_projector(d, int(g.integers(0, d + 1)), g).entries,
            random_projector(d, int(g.integers(0, d + 1)), g).entries)


def test_equal_projectors_give_one_dim_blocks(rng):
    p = random_projector(6, 3, rng).entries
    jd = jordan_decompose(p, p)
    assert all(b.dim == 1 for b in jd.blocks)


def test_qubit_pair_single_block():
    jd = jordan_decompose(np.diag([1.0, 0.0]), np.outer(PLUS, PLUS))
    (blk,) = jd.blocks
    assert blk.dim == 2
    assert blk.overlap**2 == pytest.approx(0.5)


def test_commuting_pair_only_one_dim_blocks(rng):
    u = random_unitary(8, rng).entries
    a = u @ np.diag([1, 1, 0, 0, 1, 0, 1, 0]) @ u.conj().T
    b = u @ np.diag([1, 0, 1, 0, 0, 0, 1, 1]) @ u.conj().T
    jd = jordan_decompose(a, b)
    assert all(blk.dim == 1 for blk in jd.blocks)
    assert len(jd.blocks) == 8


@given(seeds)
def test_jordan_reconstruction_and_invariance(seed):
    pa, pb = _pair(seed)
    jd = jordan_decompose(pa, pb)
    assert np.linalg.norm(jd.reconstruct("A") - pa, 2) <= 1e-8
    assert np.linalg.norm(jd.reconstruct("B") - pb, 2) <= 1e-8
    assert jd.completeness_error() <= 1e-8
    assert jd.invariance_error(pa, pb) <= 1e-8
    assert all(0 <= c <= 1 for c in jd.overlaps())


def test_jordan_rejects_non_projectors():
    with pytest.raises(ValueError):
        jordan_decompose(np.diag([0.5, 1]), np.eye(2))


def test_threshold_examples():
    t = threshold_measure(np.diag([0.3, 0.7]), 0.5)
    assert np.allclose(t.high, np.diag([0, 1]))
    t = threshold_measure(np.diag([0.3, 0.7]), 0.9)
    assert np.allclose(t.high, 0)
    s = symmetric_threshold(np.diag([0.5, 0.9]), 0.3)
    assert np.allclose(s.high, np.diag([0, 1]))
    with pytest.raises(ValueError):
        threshold_measure(np.diag([0.3, 1.2]), 0.5)
    with pytest.raises(ValueError):
        threshold_measure(np.diag([0.3, 0.7]), 1.5)


def test_threshold_tie_goes_low():
    t = threshold_measure(np.diag([0.5, 0.8]), 0.5)
    assert np.allclose(t.low, np.diag([1, 0]))
    assert t.ties == (0.5,)


@given(seeds, st.integers(1, 10), st.floats(0.01, 0.99))
def test_threshold_projectors_resolve_identity_and_commute(seed, d, gamma):
    p = random_contraction(d, np.random.default_rng(seed))
    for split in (threshold_measure(p, gamma), symmetric_threshold(p, gamma / 2)):
        assert np.linalg.norm(split.low + split.high - np.eye(d), 2) <= 1e-8
        assert np.linalg.norm(split.high @ split.high - split.high, 2) <= 1e-8
        assert np.linalg.norm(split.high @ p - p @ split.high, 2) <= 1e-8


def test_orthogonality_commuting_half_weight():
    a = np.diag([1.0, 1, 0, 0])
    b = np.diag([1.0, 0, 1, 0])
    rep = eigenvector_orthogonality_check(a, b, 0.5)
    assert rep.passed


@given(seeds)
def test_orthogonality_random_dim8(seed):
    pa, pb = _pair(seed, 8)
    rep = eigenvector_orthogonality_check(pa, pb, 0.3)
    assert rep.passed
    assert rep.checked + rep.skipped == 28


def test_orthogonality_skips_pairs_summing_to_one():
    a = np.diag([1.0, 0.0])
    rep = eigenvector_orthogonality_check(a, a, 0.5)
    assert rep.checked == 0 and rep.skipped == 1
