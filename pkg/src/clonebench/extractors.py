"""Inner-product predictors and the coherent extraction circuit that turns
them into extractors of the hidden string, for one party or for two
non-communicating parties sharing an entangled state."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .bits import all_bitstrings, from_int, inner, to_int
from .qcore import as_rng, check_dim, is_unitary

_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True, eq=False)
class IpPredictor:
    """Unitary family U^{k,r} on a work register W (x) one output qubit (last).

    Measuring the output qubit of U^{k,r}|state> in the computational basis
    is the prediction of <r, x>.  ``default_state`` is the state the
    predictor was built for, if any.
    """

    n: int
    work_dim: int
    unitaries: Mapping  # (key, r) -> (2*work_dim, 2*work_dim)
    keys: tuple = ("",)
    default_state: np.ndarray | None = None

    def __post_init__(self):
        d = 2 * self.work_dim
        check_dim(d, "predictor")
        for key in self.keys:
            for r in all_bitstrings(self.n):
                u = self.unitaries[(key, r)]
                if u.shape != (d, d) or not is_unitary(u):
                    raise ValueError(f"U[{key!r}, {r}] is not a unitary on dim {d}")

    @property
    def dim(self) -> int:
        return 2 * self.work_dim

    def phase_operator(self, key, r) -> np.ndarray:
        """U^dag (I (x) Z) U: kick the predicted bit into a phase and uncompute."""
        u = self.unitaries[(key, r)]
        return u.conj().T @ np.kron(np.eye(self.work_dim), _Z) @ u

    def fourier_operators(self, key="") -> np.ndarray:
        """F[y] = 2^-n sum_r (-1)^{<r,y>} U_r^dag Z U_r, one per outcome y."""
        strings = all_bitstrings(self.n)
        ops = np.stack([self.phase_operator(key, r) for r in strings])
        signs = np.array([[(-1) ** inner(r, y) for r in strings] for y in strings], dtype=float)
        return np.tensordot(signs, ops, axes=1) / 2**self.n

    def correct_probability(self, state: np.ndarray, key, r: str, x: str) -> float:
        u = self.unitaries[(key, r)]
        out = (u @ state).reshape(self.work_dim, 2)
        return float(np.sum(np.abs(out[:, inner(r, x)]) ** 2))

    def accuracy(self, state: np.ndarray, x: str, key="") -> float:
        """Probability over uniform r of predicting <r, x> correctly."""
        strings = all_bitstrings(self.n)
        return float(np.mean([self.correct_probability(state, key, r, x) for r in strings]))

    @classmethod
    def from_bit_table(cls, n: int, table: Mapping, work_dim: int, keys=("",), default_state=None) -> "IpPredictor":
        """Classically controlled predictor: U^{k,r}|w>|q> = |w>|q xor table[k, r][w]>."""
        d = 2 * work_dim
        unitaries = {}
        for key in keys:
            for r in all_bitstrings(n):
                bits = table[(key, r)]
                u = np.zeros((d, d), dtype=complex)
                for w in range(work_dim):
                    f = int(bits[w]) & 1
                    for q in (0, 1):
                        u[2 * w + (q ^ f), 2 * w + q] = 1
                unitaries[(key, r)] = u
        return cls(n, work_dim, unitaries, tuple(keys), default_state)


def error_set(n: int, eps: float, seed) -> frozenset:
    """Seeded subset of {0,1}^n of size (1/2 - eps) 2^n, which must be an integer."""
    if not 0 <= eps <= 0.5:
        raise ValueError("bias must lie in [0, 1/2]")
    size = (0.5 - eps) * 2**n
    if abs(size - round(size)) > 1e-9:
        raise ValueError(f"(1/2 - eps) * 2^n = {size} is not an integer")
    rng = as_rng(seed)
    pick = rng.choice(2**n, size=int(round(size)), replace=False)
    return frozenset(from_int(int(i), n) for i in pick)


def register_state(x: str) -> np.ndarray:
    """|x> on an n-qubit work register with the output qubit in |0>."""
    v = np.zeros(2 ** (len(x) + 1), dtype=complex)
    v[2 * to_int(x)] = 1
    return v


def build_biased_predictor(x: str, eps: float, seed=None) -> IpPredictor:
    """Predictor reading x from a work register and writing <r, x> xor e(r),
    where e marks a seeded error set of size (1/2 - eps) 2^n.  Accuracy on
    |x> is exactly 1/2 + eps."""
    n = len(x)
    errs = error_set(n, eps, seed)
    strings = all_bitstrings(n)
    table = {("", r): [inner(r, w) ^ (r in errs) for w in strings] for r in strings}
    return IpPredictor.from_bit_table(n, table, 2**n, default_state=register_state(x))


def _as_vec(state) -> np.ndarray:
    a = getattr(state, "amplitudes", state)
    return np.asarray(a, dtype=complex)


def gl_local_amplitudes(pred: IpPredictor, state, key="") -> np.ndarray:
    """Unnormalized post-measurement states F[y] |state>, one row per y."""
    v = _as_vec(state)
    if v.shape != (pred.dim,):
        raise ValueError(f"state has dim {v.shape}, predictor acts on {pred.dim}")
    return pred.fourier_operators(key) @ v


def gl_local_distribution(pred: IpPredictor, state, key="") -> np.ndarray:
    amps = gl_local_amplitudes(pred, state, key)
    return np.sum(np.abs(amps) ** 2, axis=1)


def gl_local_circuit(pred: IpPredictor, state, key="") -> np.ndarray:
    """Same distribution computed gate by gate on the full R (x) W (x) Q space
    (Hadamards, controlled U, Z, controlled U^dag, Hadamards).  Small n only."""
    n = pred.n
    strings = all_bitstrings(n)
    d = pred.dim
    check_dim(2**n * d, "extraction circuit")
    h1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    hn = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        hn = np.kron(hn, h1)
    cu = np.zeros((2**n * d,) * 2, dtype=complex)
    for i, r in enumerate(strings):
        cu[i * d:(i + 1) * d, i * d:(i + 1) * d] = pred.unitaries[(key, r)]
    z = np.kron(np.eye(2**n * pred.work_dim), _Z)
    had = np.kron(hn, np.eye(d))
    start = np.kron(np.eye(2**n)[0], _as_vec(state))
    out = had @ cu.conj().T @ z @ cu @ had @ start
    return np.sum(np.abs(out.reshape(2**n, d)) ** 2, axis=1)


def gl_extract_local(pred: IpPredictor, state, key="", seed=None, size: int | None = None):
    """Run the extraction circuit and return the measured string (or ``size`` strings)."""
    p = gl_local_distribution(pred, state, key)
    rng = as_rng(seed)
    idx = rng.choice(p.size, size=size, p=p / p.sum())
    if size is None:
        return from_int(int(idx), pred.n)
    return [from_int(int(i), pred.n) for i in idx]


def gl_simultaneous_distribution(pred_b: IpPredictor, pred_c: IpPredictor, state, keys=("", "")) -> np.ndarray:
    """Joint distribution of (y, z) when both parties run the circuit on their halves."""
    v = _as_vec(state)
    if v.shape != (pred_b.dim * pred_c.dim,):
        raise ValueError("bipartite state does not match the predictors")
    psi = v.reshape(pred_b.dim, pred_c.dim)
    fb = pred_b.fourier_operators(keys[0])
    fc = pred_c.fourier_operators(keys[1])
    amps = np.einsum("yij,jk,zlk->yzil", fb, psi, fc)
    return np.sum(np.abs(amps) ** 2, axis=(2, 3))


def gl_extract_simultaneous(pred_b: IpPredictor, pred_c: IpPredictor, state, keys=("", ""), seed=None,
                            size: int | None = None):
    p = gl_simultaneous_distribution(pred_b, pred_c, state, keys)
    rng = as_rng(seed)
    flat = p.ravel() / p.sum()
    idx = rng.choice(flat.size, size=size, p=flat)
    nc = p.shape[1]
    if size is None:
        return from_int(int(idx) // nc, pred_b.n), from_int(int(idx) % nc, pred_c.n)
    return [(from_int(int(i) // nc, pred_b.n), from_int(int(i) % nc, pred_c.n)) for i in idx]


def coefficient_on_input(pred_b: IpPredictor, pred_c: IpPredictor, state, x: str, keys=("", "")) -> complex:
    """<state| F_B[x] (x) F_C[x] |state>: amplitude of |x>|x>|state> before measurement."""
    v = _as_vec(state)
    psi = v.reshape(pred_b.dim, pred_c.dim)
    fb = pred_b.fourier_operators(keys[0])[to_int(x)]
    fc = pred_c.fourier_operators(keys[1])[to_int(x)]
    return complex(np.vdot(psi, fb @ psi @ fc.T))


def simultaneous_prediction_probability(pred_b: IpPredictor, pred_c: IpPredictor, state, x: str,
                                        keys=("", "")) -> float:
    """Exact Pr[B predicts <r,x> and C predicts <r',x>] for independent uniform r, r'."""
    v = _as_vec(state)
    strings = all_bitstrings(pred_b.n)
    total = 0.0
    for r in strings:
        ub = pred_b.unitaries[(keys[0], r)]
        for rp in strings:
            uc = pred_c.unitaries[(keys[1], rp)]
            out = (np.kron(ub, uc) @ v).reshape(pred_b.work_dim, 2, pred_c.work_dim, 2)
            total += float(np.sum(np.abs(out[:, inner(r, x), :, inner(rp, x)]) ** 2))
    return total / len(strings) ** 2


@dataclass(frozen=True)
class SimultaneousFixture:
    pred_b: IpPredictor
    pred_c: IpPredictor
    state: np.ndarray
    x: str
    eps: float
    mode_weight: float


def mode_entangled_fixture(x: str, eps: float, seed=None) -> SimultaneousFixture:
    """Two predictors sharing sqrt(a)|00> + sqrt(1-a)|11> on mode qubits.

    In mode 0 both predict <r,x> perfectly; in mode 1 each errs on a seeded
    half of the r values.  With a = (1/4 + eps) / (3/4) both are simultaneously
    correct with probability exactly 1/2 + eps.
    """
    if not 0 <= eps <= 0.5:
        raise ValueError("bias must lie in [0, 1/2]")
    n = len(x)
    if n < 1:
        raise ValueError("need at least one bit")
    a = (0.25 + eps) / 0.75
    rng = as_rng(seed)
    strings = all_bitstrings(n)
    preds = []
    for _ in range(2):
        errs = error_set(n, 0.0, rng)
        table = {("", r): [inner(r, x), inner(r, x) ^ (r in errs)] for r in strings}
        preds.append(IpPredictor.from_bit_table(n, table, 2))
    q0 = np.array([1, 0], dtype=complex)
    m0 = np.kron([1, 0], q0)
    m1 = np.kron([0, 1], q0)
    state = np.sqrt(a) * np.kron(m0, m0) + np.sqrt(1 - a) * np.kron(m1, m1)
    return SimultaneousFixture(preds[0], preds[1], state, x, eps, a)


def product_fixture(x: str, eps_b: float, eps_c: float, seed=None) -> SimultaneousFixture:
    """Independent biased predictors on a product of register states."""
    rng = as_rng(seed)
    pb = build_biased_predictor(x, eps_b, rng)
    pc = build_biased_predictor(x, eps_c, rng)
    state = np.kron(pb.default_state, pc.default_state)
    eps = (0.5 + eps_b) * (0.5 + eps_c) - 0.5
    return SimultaneousFixture(pb, pc, state, x, eps, 1.0)
