"""Block-coordinate ascent over adversary strategies.

Each block (splitting channel, answer POVMs, and for the entanglement game the
initial state) is updated with the others held fixed.  Updates are gated: a
block update is kept only if the exact value does not drop by more than
``STEP_TOL``, so the value trace is monotone by construction.  No claim of
global optimality is made.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .adversaries import (CloningStrategy, MoEStrategy, _b_accept_ops, evaluate_moe_exact, moe_post_split,
                          random_cloning_strategy, random_moe_strategy)
from .bits import all_bitstrings, conjugate_basis
from .games import ExperimentConfig, _instances, accept_stack, enumeration_size, EXACT_BUDGET, BudgetError
from .qcore import Channel, DensityMatrix, Povm, as_rng, check_dim, psd_inv_sqrt

log = logging.getLogger(__name__)

STEP_TOL = 1e-10
STALL_REL = 1e-12
STALL_STEPS = 5


@dataclass(frozen=True)
class MoEObjective:
    """Entanglement game at ``lam``: referee measures X in H^theta."""

    lam: int


@dataclass
class SeesawResult:
    strategy: object
    value: float
    trace: list
    rejected: list = field(default_factory=list)
    converged: bool = False

    @property
    def monotone(self) -> bool:
        return all(b >= a - STEP_TOL for a, b in zip(self.trace, self.trace[1:]))


# ---------------------------------------------------------------------------
# single-block solvers
# ---------------------------------------------------------------------------


def _povm_value(elems: np.ndarray, ws: np.ndarray) -> float:
    return float(np.real(np.einsum("aij,aji->", elems, ws)))


def _projective_candidates(ws: np.ndarray):
    """Projective POVMs built on eigenbases of the effective operators and
    their pairwise differences: each basis vector goes to its best label."""
    k, d = ws.shape[0], ws.shape[1]
    mats = [ws[a] for a in range(k)]
    mats += [ws[a] - ws[b] for a in range(k) for b in range(a + 1, k)]
    mats.append(sum(ws[a] * (a + 1) for a in range(k)))
    for m in mats:
        _, vecs = np.linalg.eigh((m + m.conj().T) / 2)
        scores = np.real(np.einsum("ia,kij,ja->ak", vecs.conj(), ws, vecs))
        best = np.argmax(scores, axis=1)
        elems = np.zeros((k, d, d), dtype=complex)
        for col, lab in enumerate(best):
            v = vecs[:, col]
            elems[lab] += np.outer(v, v.conj())
        yield elems


def optimize_povm_block(ws: np.ndarray, start: np.ndarray, max_steps: int = 200) -> np.ndarray:
    """Improve the POVM maximizing sum_a Tr[E_a W_a].

    Runs the fixed-point update E_a <- L^-1 W_a E_a W_a L^-1 with
    L = (sum_a W_a E_a W_a)^(1/2) from a slightly smoothed copy of ``start``;
    if it stalls, projective candidates on eigenbases of the effective
    operators are tried as well.  Returns the best of all candidates, never
    worse than ``start``.
    """
    ws = (ws + ws.conj().transpose(0, 2, 1)) / 2
    k, d = ws.shape[0], ws.shape[1]
    best = start
    best_val = _povm_value(start, ws)
    if k == 1:
        return best
    cur = 0.9 * start + 0.1 * np.eye(d)[None] / k
    cur_val = _povm_value(cur, ws)
    stall = 0
    for _ in range(max_steps):
        wew = ws @ cur @ ws
        li = psd_inv_sqrt(wew.sum(axis=0))
        new = li @ wew @ li
        rest = np.eye(d) - new.sum(axis=0)
        rest = (rest + rest.conj().T) / 2
        if np.linalg.norm(rest) > 1e-12:
            a = int(np.argmax(np.real(np.einsum("aij,ji->a", ws, rest))))
            new[a] += rest
        new = (new + new.conj().transpose(0, 2, 1)) / 2
        val = _povm_value(new, ws)
        improvement = val - cur_val
        cur, cur_val = new, val
        if cur_val > best_val:
            best, best_val = cur, cur_val
        if improvement < STALL_REL * max(1.0, abs(cur_val)):
            stall += 1
            if stall >= STALL_STEPS:
                break
        else:
            stall = 0
    for cand in _projective_candidates(ws):
        v = _povm_value(cand, ws)
        if v > best_val + 1e-14:
            best, best_val = cand, v
    return best


def _isometry_of(ch: Channel) -> tuple[np.ndarray, int]:
    k = ch.kraus
    return k.transpose(1, 0, 2).reshape(-1, ch.in_dim), k.shape[0]


def _channel_of(v: np.ndarray, like: Channel, env: int) -> Channel:
    return Channel.from_isometry(v, like.in_dims, like.out_dims, env_dim=env)


def _polar(g: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(g, full_matrices=False)
    return u @ vh


def optimize_isometry_block(omegas, inputs, v0: np.ndarray, env: int, steps: int = 50) -> np.ndarray:
    """Maximize sum_i Tr[(Omega_i (x) I_E) (I (x) V) P_i (I (x) V)^dag] over isometries V.

    ``inputs`` are (d_ref, d_in) matrices (pure input with a reference
    register in front); ``omegas`` act on reference (x) output.  The objective
    is convex in V, so replacing V by the polar factor of the gradient never
    lowers it.
    """
    dout_env = v0.shape[0]
    dout = dout_env // env

    def value_and_grad(v):
        val = 0.0
        g = np.zeros_like(v)
        for om, phi in zip(omegas, inputs):
            dref = phi.shape[0]
            u = (phi @ v.T).reshape(dref, dout, env)
            z = np.einsum("xoyp,ype->xoe", om.reshape(dref, dout, dref, dout), u)
            val += float(np.real(np.vdot(u, z)))
            g += z.reshape(dref, dout_env).T @ phi.conj()
        return val, g

    v = v0
    val, g = value_and_grad(v)
    for _ in range(steps):
        nv = _polar(g)
        nval, ng = value_and_grad(nv)
        if nval < val - STEP_TOL:
            break
        gain = nval - val
        v, val, g = nv, nval, ng
        if gain < STALL_REL * max(1.0, abs(val)):
            break
    return v


# ---------------------------------------------------------------------------
# cloning-game objective
# ---------------------------------------------------------------------------


def _cloning_parts(cfg: ExperimentConfig, strat: CloningStrategy):
    game = cfg.game
    q = cfg.extension.matrix(game.side_B.randomness, game.side_C.randomness)
    db, dc = strat.dim_B, strat.dim_C
    out = []
    for w, m, key, br in _instances(cfg):
        rho = strat.splitting.apply_pure(br.state).reshape(db, dc, db, dc)
        ab = accept_stack(game.side_B, _full_table(game, "B", strat.respond_B, db), key, m, br.coins)
        ac = accept_stack(game.side_C, _full_table(game, "C", strat.respond_C, dc), key, m, br.coins)
        out.append((w, m, key, br, rho, ab, ac))
    return q, out


def _full_table(game, side, table, d):
    """POVM tables with every answer label present (missing labels are zero)."""
    answers = game.side(side).answers
    res = {}
    for ch in game.challenge_space(side):
        p = table[ch]
        if tuple(p.labels) == tuple(answers):
            res[ch] = p
        else:
            res[ch] = Povm(np.stack([p.get(a) for a in answers]), answers, check=False)
    return res


def cloning_value(cfg: ExperimentConfig, strat: CloningStrategy) -> float:
    q, parts = _cloning_parts(cfg, strat)
    total = 0.0
    for w, m, key, br, rho, ab, ac in parts:
        mc = np.tensordot(q, ac, axes=(1, 0))  # per r_B
        total += w * float(np.real(np.einsum("rij,rkl,jlik->", ab, mc, rho)))
    return total


def _cloning_povm_update(cfg, strat, side):
    game = cfg.game
    q, parts = _cloning_parts(cfg, strat)
    s = game.side(side)
    answers = s.answers
    d = strat.dim_B if side == "B" else strat.dim_C
    chals = game.challenge_space(side)
    ws = {ch: np.zeros((len(answers), d, d), dtype=complex) for ch in chals}
    for w, m, key, br, rho, ab, ac in parts:
        if side == "B":
            other = np.tensordot(q, ac, axes=(1, 0))
            red = np.einsum("bcBC,rCc->rbB", rho, other)
        else:
            other = np.tensordot(q.T, ab, axes=(1, 0))
            red = np.einsum("bcBC,rBb->rcC", rho, other)
        for ri, r in enumerate(s.randomness):
            ch = s.challenge(key, m, r)
            for ai, a in enumerate(answers):
                if s.verify(key, m, br.coins, ch, a, r):
                    ws[ch][ai] += w * red[ri]
    table = strat.respond_B if side == "B" else strat.respond_C
    full = _full_table(game, side, table, d)
    new = {ch: Povm(optimize_povm_block(ws[ch], full[ch].elements), answers, check=False) for ch in chals}
    if side == "B":
        return CloningStrategy(strat.splitting, new, strat.respond_C, strat.label)
    return CloningStrategy(strat.splitting, strat.respond_B, new, strat.label)


def _cloning_split_update(cfg, strat):
    q, parts = _cloning_parts(cfg, strat)
    omegas, inputs = [], []
    for w, m, key, br, rho, ab, ac in parts:
        mc = np.tensordot(q, ac, axes=(1, 0))
        om = w * np.einsum("rij,rkl->ikjl", ab, mc).reshape(strat.dim_B * strat.dim_C, -1)
        omegas.append(om)
        inputs.append(br.state[None, :])
    v0, env = _isometry_of(strat.splitting)
    v = optimize_isometry_block(omegas, inputs, v0, env)
    return CloningStrategy(_channel_of(v, strat.splitting, env), strat.respond_B, strat.respond_C, strat.label)


# ---------------------------------------------------------------------------
# entanglement-game objective
# ---------------------------------------------------------------------------


def _moe_pieces(strat: MoEStrategy):
    lam = strat.lam
    db, dc = strat.splitting.out_dims
    rho = moe_post_split(strat)
    for theta in all_bitstrings(lam):
        h = conjugate_basis(theta)
        sig = np.einsum("ax,aobp,bx->xop", h.conj(), rho, h, optimize=True).reshape(-1, db, dc, db, dc)
        yield theta, h, sig


def _moe_omega(strat: MoEStrategy) -> np.ndarray:
    """Operator on X (x) B (x) C whose expectation is the win probability."""
    lam = strat.lam
    dx = 2**lam
    db, dc = strat.splitting.out_dims
    om = np.zeros((dx * db * dc,) * 2, dtype=complex)
    for theta in all_bitstrings(lam):
        h = conjugate_basis(theta)
        bacc = _b_accept_ops(lam, strat.guess_B, theta)
        for i, x in enumerate(all_bitstrings(lam)):
            proj = np.outer(h[:, i], h[:, i].conj())
            om += np.kron(proj, np.kron(bacc[i], strat.guess_C[theta].get(x)))
    return om / dx


def _moe_povm_update(strat: MoEStrategy, side: str) -> MoEStrategy:
    lam = strat.lam
    strings = all_bitstrings(lam)
    dx = 2**lam
    if side == "C":
        new = {}
        for theta, h, sig in _moe_pieces(strat):
            bacc = _b_accept_ops(lam, strat.guess_B, theta)
            ws = np.einsum("xbcBC,xBb->xcC", sig, bacc) / dx
            start = np.stack([strat.guess_C[theta].get(x) for x in strings])
            new[theta] = Povm(optimize_povm_block(ws, start), strings, check=False)
        return MoEStrategy(lam, strat.initial, strat.splitting, strat.guess_B, new)
    db = strat.splitting.out_dims[0]
    ws = np.zeros((len(strings), db, db), dtype=complex)
    for theta, h, sig in _moe_pieces(strat):
        cpov = strat.guess_C[theta]
        red = np.einsum("xbcBC,xCc->xbB", sig, np.stack([cpov.get(x) for x in strings])) / dx
        pos = [i for i, t in enumerate(theta) if t == "1"]
        key = ["".join(x[i] for i in pos) for x in strings]
        for j, xp in enumerate(strings):
            kp = "".join(xp[i] for i in pos)
            ws[j] += sum(red[i] for i in range(len(strings)) if key[i] == kp)
    start = np.stack([strat.guess_B.get(x) for x in strings])
    gb = Povm(optimize_povm_block(ws, start), strings, check=False)
    return MoEStrategy(lam, strat.initial, strat.splitting, gb, strat.guess_C)


def _moe_state_update(strat: MoEStrategy) -> MoEStrategy:
    """Top eigenvector of the effective operator pulled back through the splitting."""
    dx, da = strat.initial.dims
    om = _moe_omega(strat)
    k = strat.splitting.kraus
    dout = strat.splitting.out_dim
    om4 = om.reshape(dx, dout, dx, dout)
    pulled = np.einsum("koa,xoyp,kpb->xayb", k.conj(), om4, k, optimize=True).reshape(dx * da, dx * da)
    w, v = np.linalg.eigh((pulled + pulled.conj().T) / 2)
    psi = v[:, -1]
    return MoEStrategy(strat.lam, DensityMatrix(np.outer(psi, psi.conj()), (dx, da), check=False), strat.splitting,
                       strat.guess_B, strat.guess_C)


def _moe_split_update(strat: MoEStrategy) -> MoEStrategy:
    dx, da = strat.initial.dims
    rho = strat.initial.entries
    w, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    om = _moe_omega(strat)
    omegas, inputs = [], []
    for p, vec in zip(w, vecs.T):
        if p > 1e-14:
            omegas.append(p * om)
            inputs.append(vec.reshape(dx, da))
    v0, env = _isometry_of(strat.splitting)
    v = optimize_isometry_block(omegas, inputs, v0, env)
    return MoEStrategy(strat.lam, strat.initial, _channel_of(v, strat.splitting, env), strat.guess_B, strat.guess_C)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def _blocks(objective, strat):
    if isinstance(objective, MoEObjective):
        return [
            ("initial", _moe_state_update),
            ("splitting", _moe_split_update),
            ("guess_B", lambda s: _moe_povm_update(s, "B")),
            ("guess_C", lambda s: _moe_povm_update(s, "C")),
        ], (lambda s: evaluate_moe_exact(objective.lam, s))
    cfg = objective
    return [
        ("splitting", lambda s: _cloning_split_update(cfg, s)),
        ("respond_B", lambda s: _cloning_povm_update(cfg, s, "B")),
        ("respond_C", lambda s: _cloning_povm_update(cfg, s, "C")),
    ], (lambda s: cloning_value(cfg, s))


def seesaw_optimize(objective, init, max_iters: int = 50, tol: float = 1e-9) -> SeesawResult:
    """Alternate block updates from ``init`` until a full sweep gains less than ``tol``.

    ``objective`` is an ExperimentConfig (cloning experiment, exact) or a
    MoEObjective.  The trace holds the value after every accepted block step
    (starting with the initial value).  Block updates that would lower the
    value by more than STEP_TOL are rejected and listed in ``rejected``.
    """
    if isinstance(objective, ExperimentConfig):
        if objective.mode != "exact":
            objective = objective.replace(mode="exact", trials=None)
        if enumeration_size(objective) > EXACT_BUDGET:
            raise BudgetError("see-saw needs exact evaluation")
        if objective.oracle_augmented:
            raise ValueError("see-saw does not handle oracle-augmented experiments")
    blocks, value = _blocks(objective, init)
    strat = init
    val = value(strat)
    trace = [val]
    rejected = []
    converged = False
    for it in range(max_iters):
        start = val
        for name, update in blocks:
            cand = update(strat)
            cval = value(cand)
            if cval >= val - STEP_TOL:
                strat, val = cand, cval
                trace.append(val)
            else:
                rejected.append({"iteration": it, "block": name, "drop": val - cval})
                log.debug("rejected %s update at iteration %d (drop %.3g)", name, it, val - cval)
        if val - start < tol:
            converged = True
            break
    return SeesawResult(strat, val, trace, rejected, converged)


def random_init(objective, rng, dims=None):
    """Random starting strategy; ``dims`` = (dB, dC) for cloning or (dA, dB, dC) for MoE."""
    rng = as_rng(rng)
    if isinstance(objective, MoEObjective):
        lam = objective.lam
        da, db, dc = dims or (2**lam, 2**lam, 2**lam)
        check_dim(2**lam * db * dc, "MoE search space")
        return random_moe_strategy(lam, da, db, dc, rng)
    db, dc = dims or (objective.game.token_dim, objective.game.token_dim)
    return random_cloning_strategy(objective.game, db, dc, rng)


def multistart(objective, starts: int, seed, dims=None, max_iters: int = 50, tol: float = 1e-9):
    """Independent see-saw runs from seeded random starts.  Returns (best, all results)."""
    seqs = np.random.SeedSequence(seed).spawn(starts)
    results = []
    for ss in seqs:
        init = random_init(objective, np.random.default_rng(ss), dims)
        results.append(seesaw_optimize(objective, init, max_iters=max_iters, tol=tol))
    best = max(results, key=lambda r: r.value) if results else None
    return best, results
