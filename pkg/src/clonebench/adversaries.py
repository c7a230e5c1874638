"""Adversary strategies for cloning and monogamy-of-entanglement experiments,
exact evaluation, reductions between experiments, and the spectral weight
table used to relate correlated and independent challenges."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .bits import all_bitstrings, conjugate_basis, ones, to_int
from .games import (CloningGameSpec, ExperimentConfig, MessageDistribution, _instances, accept_stack, best_guess,
                    decode_challenge, encode_challenge, joint_accept, run_cloning_experiment)
from .qcore import (Channel, DensityMatrix, Povm, as_rng, check_dim, ptrace_array, random_channel,
                    random_density, random_povm)


@dataclass(frozen=True, eq=False)
class CloningStrategy:
    """Splitting channel (token -> B (x) C) plus challenge-indexed answer POVMs.

    Classical side information from the splitting step is modelled by writing
    it into the B or C register in a computational basis.
    """

    splitting: Channel
    respond_B: Mapping
    respond_C: Mapping
    label: str = ""

    def __post_init__(self):
        if len(self.splitting.out_dims) != 2:
            raise ValueError("splitting must output two registers")
        db, dc = self.splitting.out_dims
        for name, table, d in (("B", self.respond_B, db), ("C", self.respond_C, dc)):
            for ch, povm in table.items():
                if povm.dim != d:
                    raise ValueError(f"{name} POVM for challenge {ch!r} acts on dim {povm.dim}, register has {d}")

    @property
    def dim_B(self) -> int:
        return self.splitting.out_dims[0]

    @property
    def dim_C(self) -> int:
        return self.splitting.out_dims[1]


@dataclass(frozen=True, eq=False)
class MoEStrategy:
    """Initial state on X (x) A, splitting A -> B (x) C, guesses for B and C.

    ``guess_C`` maps basis strings theta to POVMs over {0,1}^lambda.
    """

    lam: int
    initial: DensityMatrix
    splitting: Channel
    guess_B: Povm
    guess_C: Mapping

    def __post_init__(self):
        dx = 2**self.lam
        if self.initial.dims[0] != dx or len(self.initial.dims) != 2:
            raise ValueError("initial state must live on X (x) A with dim X = 2^lambda")
        if self.initial.dims[1] != self.splitting.in_dim:
            raise ValueError("splitting input does not match the A register")
        if len(self.splitting.out_dims) != 2:
            raise ValueError("splitting must output two registers")
        db, dc = self.splitting.out_dims
        if self.guess_B.dim != db:
            raise ValueError("B guess POVM dimension mismatch")
        for theta in all_bitstrings(self.lam):
            if self.guess_C[theta].dim != dc:
                raise ValueError("C guess POVM dimension mismatch")


# ---------------------------------------------------------------------------
# baseline strategies
# ---------------------------------------------------------------------------


def route_token(d: int, side: str) -> Channel:
    """Isometry that hands the whole token to ``side`` and a one-dimensional
    |bot> register to the other party."""
    out = (1, d) if side == "C" else (d, 1)
    return Channel(np.eye(d, dtype=complex)[None], (d,), out, check=False)


def trivial_strategy(game: CloningGameSpec, side: str, guess: str = "best", cfg: ExperimentConfig | None = None) -> CloningStrategy:
    """Trivial attack: ``side`` receives the token and runs the honest evaluator,
    the other party receives |bot> and answers with a guess.

    ``guess="best"`` picks, per challenge, the answer maximizing the joint win
    probability (exact enumeration); ``guess="blind"`` picks one answer for all
    challenges.  ``cfg`` fixes the message distribution and extension used for
    the optimization (uniform / independent by default).
    """
    if side not in ("B", "C"):
        raise ValueError("side must be 'B' or 'C'")
    if guess not in ("best", "blind"):
        raise ValueError("guess must be 'best' or 'blind'")
    cfg = cfg or ExperimentConfig(game)
    guesser = "C" if side == "B" else "B"
    holder_side = game.side(side)
    if holder_side.honest is None:
        raise ValueError("game has no honest evaluator for the token holder")
    choice, _ = best_guess(cfg, guesser, blind=(guess == "blind"))
    holder = {ch: holder_side.honest(ch) for ch in game.challenge_space(side)}
    guesses = {ch: Povm.trivial(1, a) for ch, a in choice.items()}
    split = route_token(game.token_dim, side)
    rb, rc = (holder, guesses) if side == "B" else (guesses, holder)
    return CloningStrategy(split, rb, rc, label=f"trivial(token->{side}, {guess} guess)")


def honest_strategy_povms(game: CloningGameSpec, side: str) -> dict:
    return {ch: game.side(side).honest(ch) for ch in game.challenge_space(side)}


def measure_and_split(game: CloningGameSpec, basis_choice: str, dist: MessageDistribution | None = None) -> CloningStrategy:
    """Measure every token qubit in the given basis (0: computational,
    1: Hadamard), copy the outcome to both parties, and let each answer with
    the answer maximizing its own acceptance probability given the outcome
    and its challenge (ties go to the first answer)."""
    d = game.token_dim
    nq = int(round(np.log2(d)))
    if 2**nq != d or len(basis_choice) != nq:
        raise ValueError(f"basis string must have one entry per token qubit ({nq})")
    meas = conjugate_basis(basis_choice)
    kraus = np.zeros((d, d * d, d), dtype=complex)
    for s in range(d):
        kraus[s, s * d + s, :] = meas[:, s].conj()
    split = Channel(kraus, (d,), (d, d), check=False)
    cfg = ExperimentConfig(game, dist or MessageDistribution.uniform(game.messages))
    responders = {}
    for side in ("B", "C"):
        sd = game.side(side)
        answers = sd.answers
        scores: dict = {}
        for w, m, key, br in _instances(cfg):
            ps = np.abs(meas.conj().T @ br.state) ** 2
            for r in sd.randomness:
                ch = sd.challenge(key, m, r)
                acc = np.array([1.0 if sd.verify(key, m, br.coins, ch, a, r) else 0.0 for a in answers])
                tab = scores.setdefault(ch, np.zeros((d, len(answers))))
                tab += (w / len(sd.randomness)) * np.outer(ps, acc)
        table = {}
        for ch in game.challenge_space(side):
            tab = scores.get(ch, np.zeros((d, len(answers))))
            best = np.argmax(tab, axis=1)  # first maximum wins ties
            elems = np.zeros((len(answers), d, d), dtype=complex)
            for s in range(d):
                elems[best[s], s, s] = 1
            table[ch] = Povm(elems, answers, check=False)
        responders[side] = table
    return CloningStrategy(split, responders["B"], responders["C"], label=f"measure-and-split({basis_choice})")


def random_cloning_strategy(game: CloningGameSpec, dim_b: int, dim_c: int, rng, rank: int | None = None) -> CloningStrategy:
    rng = as_rng(rng)
    d = game.token_dim
    split = random_channel(d, dim_b * dim_c, rng, rank=rank, out_dims=(dim_b, dim_c))
    rb = {ch: random_povm(dim_b, game.side_B.answers, rng) for ch in game.challenge_space("B")}
    rc = {ch: random_povm(dim_c, game.side_C.answers, rng) for ch in game.challenge_space("C")}
    return CloningStrategy(split, rb, rc, label="random")


def ind_to_search_transform(strat: CloningStrategy, m0, m) -> CloningStrategy:
    """Wrap both responders: answer ``m`` when the original answers ``m``,
    otherwise answer ``m0``.  The pair (m0, m) must be non-degenerate."""
    if m0 == m:
        raise ValueError("degenerate message pair: m0 equals m")

    def wrap(table, d):
        out = {}
        for ch, povm in table.items():
            e_m = povm.get(m)
            out[ch] = Povm(np.stack([e_m, np.eye(d) - e_m]), (m, m0), check=False)
        return out

    return CloningStrategy(strat.splitting, wrap(strat.respond_B, strat.dim_B), wrap(strat.respond_C, strat.dim_C),
                           label=f"{strat.label}|to-search({m0},{m})")


# ---------------------------------------------------------------------------
# exact evaluation
# ---------------------------------------------------------------------------


def evaluate_exact(cfg: ExperimentConfig, strat) -> float:
    if cfg.mode != "exact":
        cfg = cfg.replace(mode="exact", trials=None)
    return run_cloning_experiment(cfg, strat).win_probability


def _b_accept_ops(lam: int, guess_b: Povm, theta: str) -> np.ndarray:
    """For each referee outcome x, the sum of B's elements x' agreeing with x on theta's 1-positions."""
    strings = all_bitstrings(lam)
    pos = ones(theta)
    keyed: dict = {}
    for lab, e in zip(guess_b.labels, guess_b.elements):
        if len(lab) != lam:
            continue
        k = "".join(lab[i] for i in pos)
        keyed[k] = keyed.get(k, 0) + e
    d = guess_b.dim
    zero = np.zeros((d, d), dtype=complex)
    return np.stack([keyed.get("".join(x[i] for i in pos), zero) for x in strings])


def moe_post_split(strat: MoEStrategy) -> np.ndarray:
    """(I_X (x) splitting)(initial) as an (X, BC, X, BC) tensor."""
    dx, da = strat.initial.dims
    dout = strat.splitting.out_dim
    rho = strat.initial.entries.reshape(dx, da, dx, da)
    k = strat.splitting.kraus
    return np.einsum("kob,xbyc,kpc->xoyp", k, rho, k.conj(), optimize=True)


def evaluate_moe_exact(lam: int, strat: MoEStrategy) -> float:
    """Exact winning probability: theta uniform, referee measures X in the
    H^theta basis, C must output x and B must match x on theta's 1-positions."""
    if strat.lam != lam:
        raise ValueError("strategy was built for a different lambda")
    strings = all_bitstrings(lam)
    db, dc = strat.splitting.out_dims
    check_dim(2**lam * db * dc, "MoE state")
    rho = moe_post_split(strat)
    total = 0.0
    for theta in strings:
        h = conjugate_basis(theta)
        sig = np.einsum("ax,aobp,bx->xop", h.conj(), rho, h, optimize=True)
        bacc = _b_accept_ops(lam, strat.guess_B, theta)
        cpovm = strat.guess_C[theta]
        for i, x in enumerate(strings):
            total += joint_accept(sig[i], db, dc, bacc[i][None], cpovm.get(x)[None])[0, 0]
    return float(total) / 2**lam


def epr_state(lam: int) -> np.ndarray:
    """lambda EPR pairs across X (x) A, pairing qubit i of X with qubit i of A."""
    d = 2**lam
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * d + np.arange(d)] = 1 / np.sqrt(d)
    return v


def cloning_to_moe(strat: CloningStrategy, lam: int) -> MoEStrategy:
    """Entanglement-based version of a certified-deletion attack: the token
    register is replaced by halves of lambda EPR pairs, everything else is reused."""
    d = 2**lam
    if strat.splitting.in_dim != d:
        raise ValueError("strategy does not take a lambda-qubit token")
    v = epr_state(lam)
    init = DensityMatrix(np.outer(v, v.conj()), (d, d), check=False)
    guess_b = strat.respond_B[()]
    guess_c = {theta: strat.respond_C[(theta,)] for theta in all_bitstrings(lam)}
    return MoEStrategy(lam, init, strat.splitting, guess_b, guess_c)


def random_moe_strategy(lam: int, dim_a: int, dim_b: int, dim_c: int, rng) -> MoEStrategy:
    rng = as_rng(rng)
    strings = all_bitstrings(lam)
    dx = 2**lam
    init = DensityMatrix(random_density(dx * dim_a, rng, rank=1), (dx, dim_a), check=False)
    split = random_channel(dim_a, dim_b * dim_c, rng, out_dims=(dim_b, dim_c))
    gb = random_povm(dim_b, strings, rng)
    gc = {t: random_povm(dim_c, strings, rng) for t in strings}
    return MoEStrategy(lam, init, split, gb, gc)


# ---------------------------------------------------------------------------
# spectral weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralWeights:
    """Overlap weights of a bipartite state in the eigenbases of the averaged
    acceptance operators P_B and P_C, with the three-way split at eta.

    ``weights[i, j]`` is the diagonal entry of the state on
    |phi_i> (x) |sigma_j>; because P_B (x) P_C is diagonal in this product
    basis, the independent-challenge value is sum_ij weights * lam_i * gam_j
    for pure and mixed states alike.
    """

    lam: np.ndarray
    gam: np.ndarray
    weights: np.ndarray
    eta: float
    p_ind: float
    bucket_c: float  # gam_j <= eta
    bucket_b: float  # lam_i <= eta < gam_j
    bucket_bc: float  # both above eta

    @property
    def weight_bound(self) -> float:
        if self.eta > 0:
            return self.p_ind / self.eta**2
        return 0.0 if self.p_ind <= 0 else np.inf

    @property
    def weight_bound_holds(self) -> bool:
        return self.bucket_bc <= self.weight_bound + 1e-12


def spectral_weights_from_operators(p_b: np.ndarray, p_c: np.ndarray, rho: np.ndarray, eta: float) -> SpectralWeights:
    db, dc = p_b.shape[0], p_c.shape[0]
    lb, vb = np.linalg.eigh((p_b + p_b.conj().T) / 2)
    lc, vc = np.linalg.eigh((p_c + p_c.conj().T) / 2)
    lb = np.clip(lb, 0.0, 1.0)
    lc = np.clip(lc, 0.0, 1.0)
    u = np.kron(vb, vc)
    diag = np.real(np.einsum("ai,ab,bi->i", u.conj(), rho, u)).reshape(db, dc)
    w = np.clip(diag, 0.0, None)
    p_ind = float(np.einsum("ij,i,j->", w, lb, lc))
    hi_b = lb > eta
    hi_c = lc > eta
    bucket_c = float(w[:, ~hi_c].sum())
    bucket_b = float(w[np.ix_(~hi_b, hi_c)].sum())
    bucket_bc = float(w[np.ix_(hi_b, hi_c)].sum())
    return SpectralWeights(lb, lc, w, float(eta), p_ind, bucket_c, bucket_b, bucket_bc)


def spectral_weights(cfg: ExperimentConfig, strat: CloningStrategy, eta: float, message=None, key=None,
                     branch: int = 0) -> SpectralWeights:
    """Spectral weight table for one game instance (message, key, token branch).

    Defaults to the first message in the distribution's support and the
    first key.  P_B and P_C average the accept operators over each party's
    challenge randomness.
    """
    game = cfg.game
    m = cfg.message_dist.support[0] if message is None else message
    k = game.keys[0] if key is None else key
    br = game.token_mixture(k, m)[branch]
    rho = strat.splitting.apply_pure(br.state)
    ab = accept_stack(game.side_B, strat.respond_B, k, m, br.coins)
    ac = accept_stack(game.side_C, strat.respond_C, k, m, br.coins)
    return spectral_weights_from_operators(ab.mean(axis=0), ac.mean(axis=0), rho, eta)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

FORMAT_TAG = "clonebench-strategy/1"


def _enc_matrix(a: np.ndarray) -> dict:
    a = np.asarray(a)
    return {"shape": list(a.shape), "data": [[float(z.real), float(z.imag)] for z in a.ravel()]}


def _dec_matrix(d: dict) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in d["data"]], dtype=complex)
    return flat.reshape(d["shape"])


def _enc_povm(p: Povm) -> dict:
    return {"labels": list(p.labels), "elements": [_enc_matrix(e) for e in p.elements]}


def _dec_povm(d: dict) -> Povm:
    return Povm(np.stack([_dec_matrix(e) for e in d["elements"]]), d["labels"])


def _enc_channel(ch: Channel) -> dict:
    return {"in_dims": list(ch.in_dims), "out_dims": list(ch.out_dims), "kraus": [_enc_matrix(k) for k in ch.kraus]}


def _dec_channel(d: dict) -> Channel:
    return Channel(np.stack([_dec_matrix(k) for k in d["kraus"]]), d["in_dims"], d["out_dims"])


def strategy_to_dict(strat) -> dict:
    if isinstance(strat, CloningStrategy):
        return {
            "format": FORMAT_TAG,
            "kind": "cloning",
            "label": strat.label,
            "splitting": _enc_channel(strat.splitting),
            "respond_B": {encode_challenge(ch): _enc_povm(p) for ch, p in strat.respond_B.items()},
            "respond_C": {encode_challenge(ch): _enc_povm(p) for ch, p in strat.respond_C.items()},
        }
    if isinstance(strat, MoEStrategy):
        return {
            "format": FORMAT_TAG,
            "kind": "moe",
            "lambda": strat.lam,
            "initial": {"dims": list(strat.initial.dims), "matrix": _enc_matrix(strat.initial.entries)},
            "splitting": _enc_channel(strat.splitting),
            "guess_B": _enc_povm(strat.guess_B),
            "guess_C": {t: _enc_povm(p) for t, p in strat.guess_C.items()},
        }
    raise TypeError(f"cannot serialize {type(strat).__name__}")


def strategy_from_dict(d: dict):
    if d.get("format") != FORMAT_TAG:
        raise ValueError(f"unknown strategy format {d.get('format')!r}")
    if d["kind"] == "cloning":
        return CloningStrategy(
            _dec_channel(d["splitting"]),
            {decode_challenge(k): _dec_povm(v) for k, v in d["respond_B"].items()},
            {decode_challenge(k): _dec_povm(v) for k, v in d["respond_C"].items()},
            d.get("label", ""),
        )
    if d["kind"] == "moe":
        init = DensityMatrix(_dec_matrix(d["initial"]["matrix"]), d["initial"]["dims"])
        return MoEStrategy(int(d["lambda"]), init, _dec_channel(d["splitting"]), _dec_povm(d["guess_B"]),
                           {t: _dec_povm(v) for t, v in d["guess_C"].items()})
    raise ValueError(f"unknown strategy kind {d['kind']!r}")


def dumps_strategy(strat) -> str:
    return json.dumps(strategy_to_dict(strat), sort_keys=True, separators=(",", ":"))


def loads_strategy(text: str):
    return strategy_from_dict(json.loads(text))
