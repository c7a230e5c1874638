"""Jordan decomposition of projector pairs, threshold measurements and
alternating-projection value estimation (local and non-local)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .qcore import DensityMatrix, Operator, Povm, StateVector, TOL_RECON, TOL_STRUCT, as_rng, check_dim, is_projector, psd_sqrt

TIE_TOL = 1e-12
VALEST_C = 4
CONTINUATION_CAP = 10_000


def _arr(x) -> np.ndarray:
    if isinstance(x, (Operator, DensityMatrix)):
        return x.entries
    return np.asarray(x)


def _orth_complement(basis: np.ndarray, d: int) -> np.ndarray:
    """Orthonormal basis of the complement of the column span of ``basis``."""
    if basis.shape[1] == 0:
        return np.eye(d, dtype=complex)
    u, s, _ = np.linalg.svd(basis, full_matrices=True)
    rank = int(np.sum(s > 1e-9))
    return u[:, rank:]


def _range_basis(p: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((p + p.conj().T) / 2)
    return v[:, w > 0.5]


# ---------------------------------------------------------------------------
# Jordan decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JordanBlock:
    """One invariant subspace.

    Two-dimensional blocks carry ``a1, a0, b1, b0``: orthonormal bases of the
    block adapted to the first (a) and second (b) projector, with a1 in the
    range of the first projector.  One-dimensional blocks carry ``vector`` and
    the pair of rank tags (a, b) in {0,1}^2.
    """

    dim: int
    overlap: float  # |<a1|b1>| for 2-d blocks, tag-derived for 1-d ones
    a1: np.ndarray | None = None
    a0: np.ndarray | None = None
    b1: np.ndarray | None = None
    b0: np.ndarray | None = None
    vector: np.ndarray | None = None
    tags: tuple[int, int] | None = None

    @property
    def basis(self) -> np.ndarray:
        if self.dim == 1:
            return self.vector[:, None]
        return np.stack([self.a1, self.a0], axis=1)

    @property
    def projector(self) -> np.ndarray:
        b = self.basis
        return b @ b.conj().T


@dataclass(frozen=True)
class JordanDecomposition:
    blocks: tuple
    dim: int

    def reconstruct(self, which: str = "A") -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for b in self.blocks:
            if b.dim == 2:
                v = b.a1 if which == "A" else b.b1
                out += np.outer(v, v.conj())
            elif b.tags[0 if which == "A" else 1]:
                out += np.outer(b.vector, b.vector.conj())
        return out

    def block_projectors(self) -> list[np.ndarray]:
        return [b.projector for b in self.blocks]

    def overlaps(self) -> np.ndarray:
        return np.array([b.overlap for b in self.blocks if b.dim == 2])

    def invariance_error(self, pa: np.ndarray, pb: np.ndarray) -> float:
        err = 0.0
        for pj in self.block_projectors():
            for p in (pa, pb):
                err = max(err, float(np.linalg.norm(p @ pj - pj @ p @ pj, 2)))
        return err

    def completeness_error(self) -> float:
        tot = sum(self.block_projectors())
        return float(np.linalg.norm(tot - np.eye(self.dim), 2))


def jordan_decompose(pa, pb, tol: float = 1e-9) -> JordanDecomposition:
    """Split the space into subspaces of dimension <= 2 invariant under both projectors.

    The principal overlaps c_j^2 are the eigenvalues of Pi_B compressed to the
    range of Pi_A.  Degenerate eigenspaces are orthonormalized by ``eigh``;
    any orthonormal choice gives valid blocks because Pi_B maps orthogonal
    vectors of one eigenspace to orthogonal vectors.
    """
    pa, pb = _arr(pa), _arr(pb)
    d = pa.shape[0]
    if pa.shape != pb.shape or pa.shape != (d, d):
        raise ValueError("projectors must be square and of equal size")
    check_dim(d, "Jordan decomposition")
    if d > 256:
        raise ValueError("Jordan decomposition limited to dimension 256")
    if not (is_projector(pa) and is_projector(pb)):
        raise ValueError("jordan_decompose needs two orthogonal projectors")
    ua = _range_basis(pa)
    blocks = []
    used = []
    if ua.shape[1]:
        k = ua.conj().T @ pb @ ua
        c2, vecs = np.linalg.eigh((k + k.conj().T) / 2)
        for c2j, u in zip(c2, vecs.T):
            a1 = ua @ u
            if c2j > 1 - tol:
                blocks.append(JordanBlock(1, 1.0, vector=a1, tags=(1, 1)))
                used.append(a1)
            elif c2j < tol:
                blocks.append(JordanBlock(1, 0.0, vector=a1, tags=(1, 0)))
                used.append(a1)
            else:
                c = math.sqrt(c2j)
                b1 = pb @ a1 / c
                a0 = b1 - c * a1
                a0 /= np.linalg.norm(a0)
                b0 = a1 - (np.vdot(b1, a1)) * b1
                b0 /= np.linalg.norm(b0)
                blocks.append(JordanBlock(2, c, a1=a1, a0=a0, b1=b1, b0=b0))
                used.extend([a1, a0])
    rest = _orth_complement(np.stack(used, axis=1) if used else np.zeros((d, 0)), d)
    if rest.shape[1]:
        # Pi_A vanishes here and Pi_B is block diagonal on this complement
        kb = rest.conj().T @ pb @ rest
        w, vecs = np.linalg.eigh((kb + kb.conj().T) / 2)
        for wj, u in zip(w, vecs.T):
            v = rest @ u
            tag = int(wj > 0.5)
            blocks.append(JordanBlock(1, 0.0, vector=v, tags=(0, tag)))
    return JordanDecomposition(tuple(blocks), d)


# ---------------------------------------------------------------------------
# threshold measurements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdSplit:
    low: np.ndarray
    high: np.ndarray
    ties: tuple = ()  # eigenvalues within TIE_TOL of the threshold (sent to the low side)


def _check_effect(p: np.ndarray):
    w = np.linalg.eigvalsh((p + p.conj().T) / 2)
    if np.linalg.norm(p - p.conj().T) > TOL_STRUCT or w.min() < -TOL_STRUCT or w.max() > 1 + TOL_STRUCT:
        raise ValueError("threshold measurement needs 0 <= P <= I")
    return w


def _spectral_split(p: np.ndarray, score: Callable[[np.ndarray], np.ndarray], gamma: float) -> ThresholdSplit:
    w, v = np.linalg.eigh((p + p.conj().T) / 2)
    s = score(w)
    ties = tuple(float(x) for x, sv in zip(w, s) if abs(sv - gamma) <= TIE_TOL)
    hi = s > gamma + TIE_TOL
    vh, vl = v[:, hi], v[:, ~hi]
    return ThresholdSplit(vl @ vl.conj().T, vh @ vh.conj().T, ties)


def threshold_measure(p, gamma: float) -> ThresholdSplit:
    """Spectral projectors of P onto eigenvalues <= gamma and > gamma."""
    p = _arr(p)
    if not 0 < gamma < 1:
        raise ValueError("threshold must lie in (0, 1)")
    _check_effect(p)
    return _spectral_split(p, lambda w: w, gamma)


def symmetric_threshold(p, gamma: float) -> ThresholdSplit:
    """Spectral projectors onto |lambda - 1/2| <= gamma and > gamma."""
    p = _arr(p)
    if not 0 < gamma < 0.5:
        raise ValueError("symmetric threshold must lie in (0, 1/2)")
    _check_effect(p)
    return _spectral_split(p, lambda w: np.abs(w - 0.5), gamma)


# ---------------------------------------------------------------------------
# value estimation by alternating projections
# ---------------------------------------------------------------------------


def accept_operators(verifier: Callable, responder: Mapping) -> tuple[list, np.ndarray]:
    """Randomness values and the accept operators A_r = sum_a V(a; r) E^r_a."""
    rs = list(responder)
    if not rs:
        raise ValueError("responder family is empty")
    ops = []
    for r in rs:
        povm = responder[r]
        mask = np.array([1.0 if verifier(a, r) else 0.0 for a in povm.labels])
        ops.append(np.tensordot(mask, povm.elements, axes=1))
    return rs, np.stack(ops)


@dataclass(frozen=True)
class ValEstCircuit:
    """The two projectors of the estimator, compressed to the subspace the
    procedure can reach from the starting register.

    Full space: randomness register R (x) state register P (x) one ancilla
    qubit Q.  ``embed`` maps a P-state phi to |+_R>|phi>|0_Q> in the reduced
    coordinates; ``proj_a`` and ``proj_b`` are the compressed projectors.
    """

    proj_a: np.ndarray
    proj_b: np.ndarray
    embed: np.ndarray
    avg_accept: np.ndarray
    full_dim: int


def valest_circuit(verifier: Callable, responder: Mapping) -> ValEstCircuit:
    rs, acc = accept_operators(verifier, responder)
    nr, dp = len(rs), acc.shape[1]
    if dp > 256:
        raise ValueError("value estimation limited to state dimension 256")
    full = nr * dp * 2
    check_dim(full, "value-estimation space")
    q1 = np.diag([0.0, 1.0]).astype(complex)
    rot = np.array([[0, -1], [1, 0]], dtype=complex)
    blocks = []
    for a in acc:
        s_acc = psd_sqrt(a)
        s_rej = psd_sqrt(np.eye(dp) - a)
        u = np.kron(s_rej, np.eye(2)) + np.kron(s_acc, rot)
        blocks.append(u.conj().T @ np.kron(np.eye(dp), q1) @ u)
    proj_a = np.zeros((full, full), dtype=complex)
    for i, b in enumerate(blocks):
        sl = slice(i * 2 * dp, (i + 1) * 2 * dp)
        proj_a[sl, sl] = b
    plus = np.full(nr, 1 / math.sqrt(nr), dtype=complex)
    e0 = np.kron(plus[:, None], np.kron(np.eye(dp), np.array([[1], [0]], dtype=complex)))
    proj_b = e0 @ e0.conj().T
    span = np.concatenate([e0, proj_a @ e0], axis=1)
    u, s, _ = np.linalg.svd(span, full_matrices=False)
    basis = u[:, s > 1e-10]
    pa_k = basis.conj().T @ proj_a @ basis
    pb_k = basis.conj().T @ proj_b @ basis
    return ValEstCircuit((pa_k + pa_k.conj().T) / 2, (pb_k + pb_k.conj().T) / 2, basis.conj().T @ e0,
                         acc.mean(axis=0), full)


def _apply(op: np.ndarray, psi: np.ndarray, axis: int) -> np.ndarray:
    if axis == psi.ndim - 1:
        return psi @ op.T
    if axis == 1 and psi.ndim == 3:
        return op @ psi
    return np.moveaxis(np.tensordot(op, psi, axes=(1, axis)), 0, axis)


def _measure(psi: np.ndarray, proj: np.ndarray, axis: int, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Binary projective measurement on every run; returns (outcomes, post-states)."""
    hit = _apply(proj, psi, axis)
    red = tuple(range(1, psi.ndim))
    p = np.clip(np.sum(np.abs(hit) ** 2, axis=red), 0.0, 1.0)
    out = u < p
    miss = psi - hit
    shape = (-1,) + (1,) * (psi.ndim - 1)
    nh = np.sqrt(np.where(out, p, 1.0)).reshape(shape)
    nm = np.sqrt(np.where(out, 1.0, 1 - p)).reshape(shape)
    nm = np.where(nm > 0, nm, 1.0)
    post = np.where(out.reshape(shape), hit / nh, miss / nm)
    return out, post


def schedule_length(eps: float) -> int:
    """Number of alternating measurements in one estimate: 2 * ceil(C / eps^2)."""
    if not eps > 0:
        raise ValueError("accuracy must be positive")
    return 2 * math.ceil(VALEST_C / eps**2)


def _run_schedule(psi, circ: ValEstCircuit, axis: int, rounds: int, rng, transcript: list | None = None):
    """Alternate A, B, A, B, ... for ``rounds`` measurements starting after a B=1
    outcome, then keep alternating until B returns 1.  Returns the fraction of
    consecutive agreeing outcomes, the post-state, and the overflow mask."""
    n = psi.shape[0]
    prev = np.ones(n, dtype=bool)
    agree = np.zeros(n)
    for t in range(rounds):
        proj = circ.proj_a if t % 2 == 0 else circ.proj_b
        out, psi = _measure(psi, proj, axis, rng.random(n))
        agree += out == prev
        prev = out
        if transcript is not None:
            transcript.append(int(out[0]))
    active = ~prev  # the schedule ends on a B measurement
    steps = 0
    while active.any() and steps < CONTINUATION_CAP:
        idx = np.flatnonzero(active)
        sub = psi[idx]
        _, sub = _measure(sub, circ.proj_a, axis, rng.random(idx.size))
        back, sub = _measure(sub, circ.proj_b, axis, rng.random(idx.size))
        psi[idx] = sub
        active[idx[back]] = False
        steps += 1
    return agree / rounds, psi, active


def _initial_components(state, dp: int, runs: int, rng) -> np.ndarray:
    """Pure P-states per run; a mixed state is unravelled over its eigenbasis."""
    if isinstance(state, StateVector):
        state = state.amplitudes
    if isinstance(state, DensityMatrix):
        rho = state.entries
    else:
        a = np.asarray(state)
        if a.ndim == 1:
            if a.shape[0] != dp:
                raise ValueError(f"state has dim {a.shape[0]}, responder acts on {dp}")
            return np.broadcast_to(a / np.linalg.norm(a), (runs, dp)).copy()
        rho = a
    if rho.shape != (dp, dp):
        raise ValueError(f"state has dim {rho.shape[0]}, responder acts on {dp}")
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.clip(w, 0, None)
    pick = rng.choice(dp, size=runs, p=w / w.sum())
    return v[:, pick].T.copy()


@dataclass(frozen=True)
class ValEstOutcome:
    estimate: float
    residual: np.ndarray
    transcript: tuple


@dataclass(frozen=True)
class ValEstBatch:
    estimates: np.ndarray  # p* per run
    repeats: np.ndarray  # p** per run (second estimate on the residual state), or empty
    residuals: np.ndarray
    overflow: int
    rounds: int

    @property
    def mean(self) -> float:
        return float(self.estimates.mean())

    @property
    def stderr(self) -> float:
        return float(self.estimates.std(ddof=1) / math.sqrt(len(self.estimates))) if len(self.estimates) > 1 else 0.0


def exact_acceptance(verifier: Callable, responder: Mapping, state) -> float:
    """E_r Pr[V(answer; r) = 1] for the given state (the quantity the estimator targets)."""
    _, acc = accept_operators(verifier, responder)
    p = acc.mean(axis=0)
    if isinstance(state, StateVector):
        state = state.amplitudes
    a = state.entries if isinstance(state, DensityMatrix) else np.asarray(state)
    if a.ndim == 1:
        return float(np.real(np.vdot(a, p @ a)) / np.real(np.vdot(a, a)))
    return float(np.real(np.trace(p @ a)))


def valest_batch(verifier: Callable, responder: Mapping, state, eps: float, seed=None, runs: int = 1000,
                 repeat: bool = False) -> ValEstBatch:
    """``runs`` independent executions of the estimator; with ``repeat`` each run
    is immediately followed by a second estimate on its residual state."""
    rng = as_rng(seed)
    circ = valest_circuit(verifier, responder)
    dp = circ.embed.shape[1]
    phis = _initial_components(state, dp, runs, rng)
    psi = phis @ circ.embed.T
    rounds = schedule_length(eps)
    est, psi, over = _run_schedule(psi, circ, 1, rounds, rng)
    rep = np.empty(0)
    if repeat:
        rep, psi, over2 = _run_schedule(psi, circ, 1, rounds, rng)
        over = over | over2
    residual = psi @ circ.embed.conj()
    return ValEstBatch(est, rep, residual, int(over.sum()), rounds)


def valest(verifier: Callable, responder: Mapping, state, eps: float, seed=None) -> ValEstOutcome:
    """One execution: returns p*, the residual P-state and the outcome transcript
    (first entry is the initial B=1 outcome)."""
    rng = as_rng(seed)
    circ = valest_circuit(verifier, responder)
    dp = circ.embed.shape[1]
    psi = _initial_components(state, dp, 1, rng) @ circ.embed.T
    transcript = [1]
    est, psi, over = _run_schedule(psi, circ, 1, schedule_length(eps), rng, transcript)
    if over[0]:
        raise RuntimeError("value estimation did not return to the starting subspace")
    return ValEstOutcome(float(est[0]), psi[0] @ circ.embed.conj(), tuple(transcript))


@dataclass(frozen=True)
class NonlocalValEst:
    p_b: np.ndarray
    p_c: np.ndarray
    overflow: int
    rounds: int

    @property
    def products(self) -> np.ndarray:
        return self.p_b * self.p_c

    @property
    def mean_product(self) -> float:
        return float(self.products.mean())

    @property
    def stderr(self) -> float:
        x = self.products
        return float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0


def _sides(verifier):
    if isinstance(verifier, tuple):
        return verifier
    return verifier, verifier


def exact_joint_acceptance(verifier, responder_b: Mapping, responder_c: Mapping, state) -> float:
    """Tr[(P_B (x) P_C) rho] with P the acceptance averaged over independent randomness."""
    vb, vc = _sides(verifier)
    _, ab = accept_operators(vb, responder_b)
    _, ac = accept_operators(vc, responder_c)
    op = np.kron(ab.mean(axis=0), ac.mean(axis=0))
    a = state.entries if isinstance(state, DensityMatrix) else np.asarray(state)
    if a.ndim == 1:
        return float(np.real(np.vdot(a, op @ a)))
    return float(np.real(np.trace(op @ a)))


def nonlocal_valest(verifier, responder_b: Mapping, responder_c: Mapping, state, eps: float, seed=None,
                    runs: int = 1000) -> NonlocalValEst:
    """Estimator run on each half of a bipartite pure state at accuracy eps/2.

    ``verifier`` is one callable for both sides or a pair (V_B, V_C).
    """
    rng = as_rng(seed)
    vb, vc = _sides(verifier)
    cb = valest_circuit(vb, responder_b)
    cc = valest_circuit(vc, responder_c)
    db, dc = cb.embed.shape[1], cc.embed.shape[1]
    a = state.amplitudes if isinstance(state, StateVector) else np.asarray(state)
    if a.ndim != 1 or a.shape[0] != db * dc:
        raise ValueError("non-local estimation takes a pure bipartite state vector")
    m = (a / np.linalg.norm(a)).reshape(db, dc)
    psi0 = cb.embed @ m @ cc.embed.T
    psi = np.broadcast_to(psi0, (runs,) + psi0.shape).copy()
    rounds = schedule_length(eps / 2)
    pb, psi, ob = _run_schedule(psi, cb, 1, rounds, rng)
    pc, psi, oc = _run_schedule(psi, cc, 2, rounds, rng)
    return NonlocalValEst(pb, pc, int((ob | oc).sum()), rounds)


def valest_with_block_measurement(verifier, responder: Mapping, state, eps: float, order: str, seed=None,
                                  runs: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    """Estimator combined with a projective measurement of the Jordan block of the
    two (compressed) projectors, either before or after the estimate.
    Returns (block labels, estimates)."""
    if order not in ("before", "after"):
        raise ValueError("order must be 'before' or 'after'")
    rng = as_rng(seed)
    circ = valest_circuit(verifier, responder)
    jd = jordan_decompose(circ.proj_a, circ.proj_b)
    projs = np.stack(jd.block_projectors())
    dp = circ.embed.shape[1]
    psi = _initial_components(state, dp, runs, rng) @ circ.embed.T

    def block_measure(psi):
        amps = np.einsum("kij,nj->nki", projs, psi)
        probs = np.sum(np.abs(amps) ** 2, axis=2)
        probs /= probs.sum(axis=1, keepdims=True)
        cum = probs.cumsum(axis=1)
        lab = np.minimum((rng.random((runs, 1)) > cum).sum(axis=1), len(projs) - 1)
        post = amps[np.arange(runs), lab]
        return lab, post / np.linalg.norm(post, axis=1, keepdims=True)

    if order == "before":
        lab, psi = block_measure(psi)
        est, psi, _ = _run_schedule(psi, circ, 1, schedule_length(eps), rng)
    else:
        est, psi, _ = _run_schedule(psi, circ, 1, schedule_length(eps), rng)
        lab, psi = block_measure(psi)
    return lab, est


# ---------------------------------------------------------------------------
# eigenvector orthogonality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrthogonalityReport:
    max_overlap: float
    checked: int
    skipped: int
    tol: float = TOL_RECON

    @property
    def passed(self) -> bool:
        return self.max_overlap <= self.tol


def eigenvector_orthogonality_check(p0, p1, w: float, margin: float = 1e-6) -> OrthogonalityReport:
    """For eigenvectors phi_i, phi_j of w*P0 + (1-w)*P1 whose eigenvalues differ
    and do not sum to 1 (both by more than ``margin``), report the largest
    |<phi_i|P0|phi_j>| and |<phi_i|P1|phi_j>|.  Other pairs are skipped."""
    p0, p1 = _arr(p0), _arr(p1)
    if not (is_projector(p0) and is_projector(p1)):
        raise ValueError("orthogonality check needs projectors")
    if not 0 <= w <= 1:
        raise ValueError("weight must lie in [0, 1]")
    m = w * p0 + (1 - w) * p1
    lam, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    o0 = np.abs(vecs.conj().T @ p0 @ vecs)
    o1 = np.abs(vecs.conj().T @ p1 @ vecs)
    li, lj = np.meshgrid(lam, lam, indexing="ij")
    ok = (np.abs(li - lj) > margin) & (np.abs(li + lj - 1) > margin)
    iu = np.triu(np.ones_like(ok), k=1)
    ok &= iu.astype(bool)
    total = int(iu.sum())
    checked = int(ok.sum())
    worst = float(max(o0[ok].max(initial=0.0), o1[ok].max(initial=0.0)))
    return OrthogonalityReport(worst, checked, total - checked)
