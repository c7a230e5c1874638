"""Cloning games, message distributions, challenge extensions and the exact /
sampled cloning experiment.

Representation
--------------
Messages, keys and challenge randomness are canonical bitstrings (or tuples
of them).  A challenge is a tuple of bitstrings; the empty tuple is the
"no challenge" value used by deletion parties.  Token generation returns an
explicit mixture of pure states so the experiment can be enumerated exactly.

Key spaces are always uniform; a game whose setup has a non-uniform
distribution would list keys with multiplicity.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .bits import (all_bitstrings, basis_vector, conjugate_basis, conjugate_state, from_int, inner, ones,
                   to_int, xor)
from .qcore import Povm, as_rng, check_dim, ptrace_array
from .qrom import OracleTable
from .reports import InequalityReport

Challenge = tuple
NO_CHALLENGE: Challenge = ()
FLAVORS = ("search", "decision", "general")


class BudgetError(RuntimeError):
    """Exact enumeration would exceed the configured budget."""


EXACT_BUDGET = 2**20


def encode_challenge(ch: Challenge) -> str:
    """Length-prefixed canonical text form: ('10', '1') -> '2:10|1:1'."""
    return "|".join(f"{len(f)}:{f}" for f in ch)


def decode_challenge(text: str) -> Challenge:
    if text == "":
        return ()
    out = []
    for part in text.split("|"):
        n, _, bits = part.partition(":")
        if int(n) != len(bits):
            raise ValueError(f"malformed challenge field {part!r}")
        out.append(bits)
    return tuple(out)


# ---------------------------------------------------------------------------
# game data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TokenBranch:
    """One pure component of GenT's output mixture."""

    prob: float
    state: np.ndarray
    coins: Any = None


@dataclass(frozen=True, eq=False)
class Side:
    """Challenge generation, verification and honest evaluation for one party.

    ``challenge(key, msg, r)``; ``verify(key, msg, coins, ch, ans, r)``;
    ``honest(ch)`` returns a POVM on the token space.
    """

    randomness: tuple
    challenge: Callable
    verify: Callable
    answers: tuple
    honest: Callable | None = None


@dataclass(frozen=True, eq=False)
class CloningGameSpec:
    name: str
    security_param: int
    messages: tuple
    keys: tuple
    token: Callable
    token_dims: tuple
    side_B: Side
    side_C: Side
    flavor: str = "general"
    asymmetric: bool = False
    stateful: bool = False
    info: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if not self.keys:
            raise ValueError("key space is empty")
        object.__setattr__(self, "_token_cache", {})
        object.__setattr__(self, "_chal_cache", {})
        check_dim(self.token_dim, "token")

    @property
    def token_dim(self) -> int:
        return int(np.prod(self.token_dims))

    def side(self, name: str) -> Side:
        if name == "B":
            return self.side_B
        if name == "C":
            return self.side_C
        raise ValueError(f"side must be 'B' or 'C', got {name!r}")

    def token_mixture(self, key, msg) -> tuple[TokenBranch, ...]:
        cache = self._token_cache
        k = (key, msg)
        if k not in cache:
            cache[k] = tuple(self.token(key, msg))
        return cache[k]

    def challenge_space(self, side: str) -> tuple:
        """Every challenge the side can receive, in first-seen order."""
        cache = self._chal_cache
        if side not in cache:
            s = self.side(side)
            seen = {}
            for key in self.keys:
                for m in self.messages:
                    for r in s.randomness:
                        seen.setdefault(s.challenge(key, m, r), None)
            cache[side] = tuple(seen)
        return cache[side]

    def replace(self, **changes) -> "CloningGameSpec":
        return dataclasses.replace(self, **changes)

    def pin_keys(self, predicate: Callable[[Any], bool]) -> "CloningGameSpec":
        """Restrict setup to the keys satisfying ``predicate`` (still uniform)."""
        keys = tuple(k for k in self.keys if predicate(k))
        if not keys:
            raise ValueError("no key satisfies the predicate")
        return self.replace(keys=keys)


def with_token_noise(game: CloningGameSpec, p: float) -> CloningGameSpec:
    """Depolarize every token: rho -> (1-p) rho + p I/d (as a pure-state mixture)."""
    if not 0 <= p <= 1:
        raise ValueError("noise parameter must lie in [0, 1]")
    d = game.token_dim
    basis = np.eye(d, dtype=complex)
    inner_token = game.token

    def token(key, msg):
        out = []
        for br in inner_token(key, msg):
            if p < 1:
                out.append(TokenBranch(br.prob * (1 - p), br.state, br.coins))
            if p > 0:
                out.extend(TokenBranch(br.prob * p / d, basis[i], br.coins) for i in range(d))
        return out

    return game.replace(name=f"{game.name}+noise({p})", token=token)


def with_constant_verifier(game: CloningGameSpec, accept: bool) -> CloningGameSpec:
    """Same game with both verifiers replaced by a constant."""

    def const(*_):
        return accept

    sb = dataclasses.replace(game.side_B, verify=const)
    sc = sb if game.side_C is game.side_B else dataclasses.replace(game.side_C, verify=const)
    tag = "always-accept" if accept else "always-reject"
    return game.replace(name=f"{game.name}+{tag}", side_B=sb, side_C=sc, flavor="general")


def _grouped_povm(basis: np.ndarray, col_labels: Sequence[str], answers: Sequence[str]) -> Povm:
    """Projective POVM summing rank-one basis projectors by label."""
    d = basis.shape[0]
    elems = np.zeros((len(answers), d, d), dtype=complex)
    index = {a: i for i, a in enumerate(answers)}
    for j, lab in enumerate(col_labels):
        v = basis[:, j]
        elems[index[lab]] += np.outer(v, v.conj())
    return Povm(elems, answers, check=False)


def _dim_guard(lam: int):
    if lam < 1:
        raise ValueError("security parameter must be at least 1")
    if lam > 12:
        raise ValueError("security parameter above 12 rejected by the dimension guard")
    check_dim(2**lam, "token")


# ---------------------------------------------------------------------------
# concrete games
# ---------------------------------------------------------------------------


def make_bb84_game(lam: int) -> CloningGameSpec:
    """Wiesner-state search game: token H^theta|m>, both parties get theta."""
    _dim_guard(lam)
    msgs = all_bitstrings(lam)

    def token(theta, m):
        return (TokenBranch(1.0, conjugate_state(m, theta)),)

    def challenge(theta, m, r):
        return (theta,)

    def verify(theta, m, coins, ch, ans, r):
        return ans == m

    def honest(ch):
        (theta,) = ch
        return Povm.from_basis(conjugate_basis(theta), msgs)

    side = Side(("",), challenge, verify, msgs, honest)
    return CloningGameSpec("bb84", lam, msgs, msgs, token, (2,) * lam, side, side, "search")


def _cd_verify_b(theta: str, target: str, ans: str) -> bool:
    return len(ans) == len(target) and all(ans[i] == target[i] for i in ones(theta))


def make_bb84_cd_game(lam: int) -> CloningGameSpec:
    """Certified-deletion variant: B returns a Hadamard-basis certificate with no
    challenge; C receives theta and must output m."""
    _dim_guard(lam)
    msgs = all_bitstrings(lam)
    had = "1" * lam

    def token(theta, m):
        return (TokenBranch(1.0, conjugate_state(m, theta)),)

    side_b = Side(
        ("",),
        lambda theta, m, r: NO_CHALLENGE,
        lambda theta, m, coins, ch, ans, r: _cd_verify_b(theta, m, ans),
        msgs,
        lambda ch: Povm.from_basis(conjugate_basis(had), msgs),
    )
    side_c = Side(
        ("",),
        lambda theta, m, r: (theta,),
        lambda theta, m, coins, ch, ans, r: ans == m,
        msgs,
        lambda ch: Povm.from_basis(conjugate_basis(ch[0]), msgs),
    )
    return CloningGameSpec("bb84-cd", lam, msgs, msgs, token, (2,) * lam, side_b, side_c, "general", asymmetric=True)


def make_bb84_cd_ui_game(lam: int) -> CloningGameSpec:
    """One-bit version: the token encodes a random x with <r, x> = m.

    Keys are (theta, r) with r non-zero; token coins record x.
    """
    if lam < 2:
        raise ValueError("the inner-product variant needs lambda >= 2")
    _dim_guard(lam)
    strings = all_bitstrings(lam)
    keys = tuple((theta, r) for theta in strings for r in strings if "1" in r)
    had = "1" * lam

    def token(key, m):
        theta, r = key
        xs = [x for x in strings if str(inner(r, x)) == m]
        p = 1.0 / len(xs)
        return tuple(TokenBranch(p, conjugate_state(x, theta), x) for x in xs)

    def honest_c(ch):
        theta, r = ch
        return _grouped_povm(conjugate_basis(theta), [str(inner(r, x)) for x in strings], ("0", "1"))

    side_b = Side(
        ("",),
        lambda key, m, r: NO_CHALLENGE,
        lambda key, m, coins, ch, ans, r: _cd_verify_b(key[0], coins, ans),
        strings,
        lambda ch: Povm.from_basis(conjugate_basis(had), strings),
    )
    side_c = Side(
        ("",),
        lambda key, m, r: key,
        lambda key, m, coins, ch, ans, r: ans == str(inner(key[1], coins)),
        ("0", "1"),
        honest_c,
    )
    return CloningGameSpec("bb84-cd-ui", lam, ("0", "1"), keys, token, (2,) * lam, side_b, side_c, "general",
                           asymmetric=True)


def make_sde_game(lam: int) -> CloningGameSpec:
    """Single-decryptor encryption of one bit as a stateful decision game.

    Key (m, theta); token |m^theta>; challenge randomness r||b gives the
    ciphertext (r, <r,m> xor b, theta); the right answer is b.
    """
    _dim_guard(lam)
    strings = all_bitstrings(lam)
    keys = tuple((m, theta) for m in strings for theta in strings)
    rand = tuple(r + b for r in strings for b in "01")

    def token(key, msg):
        m, theta = key
        return (TokenBranch(1.0, conjugate_state(m, theta)),)

    def challenge(key, msg, rb):
        m, theta = key
        r, b = rb[:-1], rb[-1]
        return (r, str(inner(r, m) ^ int(b)), theta)

    def verify(key, msg, coins, ch, ans, rb):
        return ans == rb[-1]

    def honest(ch):
        r, c, theta = ch
        labels = [str(inner(r, m) ^ int(c)) for m in strings]
        return _grouped_povm(conjugate_basis(theta), labels, ("0", "1"))

    side = Side(rand, challenge, verify, ("0", "1"), honest)
    return CloningGameSpec("sde", lam, ("",), keys, token, (2,) * lam, side, side, "decision", stateful=True)


def make_ue_qrom_game(lam: int, n: int, oracle: OracleTable) -> CloningGameSpec:
    """Search game on m' with token |m^theta> (x) |m' xor H(m)>, m uniform."""
    if lam > 6:
        raise ValueError("inner game limited to lambda <= 6")
    if n > 8:
        raise ValueError("message length limited to n <= 8")
    if oracle.domain_bits != lam or oracle.range_bits != n:
        raise ValueError("oracle must map lambda bits to n bits")
    _dim_guard(lam)
    check_dim(2 ** (lam + n), "token")
    inner_strings = all_bitstrings(lam)
    msgs = all_bitstrings(n)
    h = {m: oracle(m) for m in inner_strings}

    def token(theta, mp):
        p = 1.0 / len(inner_strings)
        return tuple(
            TokenBranch(p, np.kron(conjugate_state(m, theta), basis_vector(xor(mp, h[m]))), m)
            for m in inner_strings
        )

    def honest(ch):
        (theta,) = ch
        basis = np.kron(conjugate_basis(theta), np.eye(2**n))
        labels = [xor(from_int(y, n), h[m]) for m in inner_strings for y in range(2**n)]
        return _grouped_povm(basis, labels, msgs)

    side = Side(("",), lambda theta, mp, r: (theta,), lambda theta, mp, coins, ch, ans, r: ans == mp, msgs, honest)
    info = {"oracle_collisions": oracle.collisions()}
    return CloningGameSpec("ue-qrom", lam, msgs, inner_strings, token, (2,) * (lam + n), side, side, "search",
                           info=info)


def make_cp_point_game(lam: int, n: int, H: OracleTable, G: OracleTable, challenge_mode: str = "half") -> CloningGameSpec:
    """Point-function decision game built on the hashed Wiesner token.

    Token |m^{G(m')}> (x) |H(m)> with m uniform.  The challenge ch' is drawn
    according to ``challenge_mode``: "half" (ch' = m' or uniform, each with
    probability 1/2), "uniform", or "equal" (ch' = m').  The right answer is
    the bit [ch' == m'].
    """
    k = G.domain_bits
    if k > 6:
        raise ValueError("point-function domain limited to k <= 6")
    if G.range_bits != lam:
        raise ValueError("G must map k bits to lambda bits")
    if H.domain_bits != lam or H.range_bits != n:
        raise ValueError("H must map lambda bits to n bits")
    _dim_guard(lam)
    check_dim(2 ** (lam + n), "token")
    inner_strings = all_bitstrings(lam)
    msgs = all_bitstrings(k)
    h = {m: H(m) for m in inner_strings}
    g = {mp: G(mp) for mp in msgs}
    if not G.is_injective():
        warnings.warn("G is not injective: distinct point-function messages share a key", UserWarning, stacklevel=2)

    if challenge_mode == "half":
        rand = tuple(c + u for c in "01" for u in msgs)

        def pick(mp, r):
            return mp if r[0] == "0" else r[1:]
    elif challenge_mode == "uniform":
        rand = msgs

        def pick(mp, r):
            return r
    elif challenge_mode == "equal":
        rand = ("",)

        def pick(mp, r):
            return mp
    else:
        raise ValueError(f"unknown challenge mode {challenge_mode!r}")

    def token(key, mp):
        theta = g[mp]
        p = 1.0 / len(inner_strings)
        return tuple(TokenBranch(p, np.kron(conjugate_state(m, theta), basis_vector(h[m])), m) for m in inner_strings)

    def honest(ch):
        (chp,) = ch
        basis = np.kron(conjugate_basis(g[chp]), np.eye(2**n))
        labels = ["1" if h[m] == from_int(y, n) else "0" for m in inner_strings for y in range(2**n)]
        return _grouped_povm(basis, labels, ("0", "1"))

    side = Side(
        rand,
        lambda key, mp, r: (pick(mp, r),),
        lambda key, mp, coins, ch, ans, r: ans == ("1" if ch[0] == mp else "0"),
        ("0", "1"),
        honest,
    )
    info = {"h_collisions": H.collisions(), "g_collisions": G.collisions(), "challenge_mode": challenge_mode}
    return CloningGameSpec("cp-point", lam, msgs, ("",), token, (2,) * (lam + n), side, side, "decision", info=info)


GAME_CATALOG = {
    "bb84": make_bb84_game,
    "bb84-cd": make_bb84_cd_game,
    "bb84-cd-ui": make_bb84_cd_ui_game,
    "sde": make_sde_game,
    "ue-qrom": make_ue_qrom_game,
    "cp-point": make_cp_point_game,
}


def make_game(name: str, lam: int, **params) -> CloningGameSpec:
    """Catalog constructor; oracle games take ``n`` and seeds for their tables."""
    if name not in GAME_CATALOG:
        raise KeyError(f"unknown game {name!r}; known: {', '.join(GAME_CATALOG)}")
    if name == "ue-qrom":
        n = int(params.get("n", 2))
        oracle = params.get("oracle") or OracleTable.random(lam, n, int(params.get("oracle_seed", 0)))
        return make_ue_qrom_game(lam, n, oracle)
    if name == "cp-point":
        n = int(params.get("n", 2))
        k = int(params.get("k", 2))
        H = params.get("H") or OracleTable.random(lam, n, int(params.get("h_seed", 0)))
        G = params.get("G") or OracleTable.random(k, lam, int(params.get("g_seed", 1)))
        return make_cp_point_game(lam, n, H, G, params.get("challenge_mode", "half"))
    return GAME_CATALOG[name](lam)


# ---------------------------------------------------------------------------
# distributions and extensions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MessageDistribution:
    kind: str
    messages: tuple
    support: tuple
    probs: tuple

    def __post_init__(self):
        if sum(self.probs) != 1:
            raise ValueError("message probabilities must sum to exactly 1")
        if any(p < 0 for p in self.probs):
            raise ValueError("negative probability")
        if not set(self.support) <= set(self.messages):
            raise ValueError("support outside the message space")

    @classmethod
    def uniform(cls, messages: Sequence) -> "MessageDistribution":
        messages = tuple(messages)
        p = Fraction(1, len(messages))
        return cls("uniform", messages, messages, (p,) * len(messages))

    @classmethod
    def two_point(cls, messages: Sequence, m0, m1) -> "MessageDistribution":
        if m0 == m1:
            raise ValueError("two-point distribution needs distinct messages")
        return cls("two_point", tuple(messages), (m0, m1), (Fraction(1, 2), Fraction(1, 2)))

    @classmethod
    def uniform_on_subset(cls, messages: Sequence, subset: Iterable) -> "MessageDistribution":
        sub = tuple(dict.fromkeys(subset))
        if not sub:
            raise ValueError("empty subset")
        p = Fraction(1, len(sub))
        return cls("uniform_on_subset", tuple(messages), sub, (p,) * len(sub))

    @classmethod
    def point_mass(cls, messages: Sequence, m) -> "MessageDistribution":
        return cls("uniform_on_subset", tuple(messages), (m,), (Fraction(1),))

    def prob(self, m) -> Fraction:
        for s, p in zip(self.support, self.probs):
            if s == m:
                return p
        return Fraction(0)

    def items(self):
        return zip(self.support, self.probs)

    @property
    def max_prob(self) -> Fraction:
        return max(self.probs)

    @property
    def min_entropy(self) -> float:
        return float(-np.log2(float(self.max_prob)))

    def sample(self, rng, size: int | None = None):
        rng = as_rng(rng)
        idx = rng.choice(len(self.support), size=size, p=[float(p) for p in self.probs])
        if size is None:
            return self.support[int(idx)]
        return [self.support[int(i)] for i in idx]


class NonUniformMarginalError(ValueError):
    def __init__(self, msg, row=None, side=None):
        super().__init__(msg)
        self.row = row
        self.side = side


@dataclass(frozen=True)
class ChallengeExtension:
    """Joint distribution of (r_B, r_C).  ``table`` maps pairs to probabilities
    for the correlated kind; identical/independent are derived on demand."""

    kind: str
    table: Mapping | None = None

    @classmethod
    def identical(cls) -> "ChallengeExtension":
        return cls("identical")

    @classmethod
    def independent(cls) -> "ChallengeExtension":
        return cls("independent")

    @classmethod
    def correlated(cls, table: Mapping) -> "ChallengeExtension":
        return cls("correlated", dict(table))

    def matrix(self, rand_b: Sequence, rand_c: Sequence) -> np.ndarray:
        nb, nc = len(rand_b), len(rand_c)
        if self.kind == "independent":
            return np.full((nb, nc), 1.0 / (nb * nc))
        if self.kind == "identical":
            if tuple(rand_b) != tuple(rand_c):
                raise ValueError("identical extension needs equal randomness spaces")
            return np.eye(nb) / nb
        ib = {r: i for i, r in enumerate(rand_b)}
        ic = {r: i for i, r in enumerate(rand_c)}
        q = np.zeros((nb, nc))
        for (rb, rc), p in self.table.items():
            q[ib[rb], ic[rc]] += float(p)
        return q

    def exact_table(self, rand_b: Sequence, rand_c: Sequence) -> dict:
        nb, nc = len(rand_b), len(rand_c)
        if self.kind == "independent":
            p = Fraction(1, nb * nc)
            return {(a, b): p for a in rand_b for b in rand_c}
        if self.kind == "identical":
            if tuple(rand_b) != tuple(rand_c):
                raise ValueError("identical extension needs equal randomness spaces")
            return {(a, a): Fraction(1, nb) for a in rand_b}
        return {k: Fraction(v) for k, v in self.table.items()}

    def sample(self, rand_b, rand_c, rng, size):
        q = self.matrix(rand_b, rand_c).ravel()
        idx = as_rng(rng).choice(q.size, size=size, p=q / q.sum())
        return idx // len(rand_c), idx % len(rand_c)


@dataclass(frozen=True)
class ExtensionReport:
    kind: str
    marginals_uniform: bool
    is_identical: bool
    is_independent: bool


def check_extension(ext: ChallengeExtension, randomness_space: Sequence, randomness_space_c: Sequence | None = None) -> ExtensionReport:
    """Verify both marginals are exactly uniform; raise with the offending row otherwise."""
    rb = tuple(randomness_space)
    rc = tuple(randomness_space_c) if randomness_space_c is not None else rb
    table = ext.exact_table(rb, rc)
    for (a, b) in table:
        if a not in rb or b not in rc:
            raise ValueError(f"table entry {(a, b)} outside the randomness space")
    if sum(table.values()) != 1:
        raise NonUniformMarginalError("joint table does not sum to 1")
    for a in rb:
        row = sum((p for (x, _), p in table.items() if x == a), Fraction(0))
        if row != Fraction(1, len(rb)):
            raise NonUniformMarginalError(f"B-marginal of {a!r} is {row}, expected 1/{len(rb)}", row=a, side="B")
    for b in rc:
        col = sum((p for (_, y), p in table.items() if y == b), Fraction(0))
        if col != Fraction(1, len(rc)):
            raise NonUniformMarginalError(f"C-marginal of {b!r} is {col}, expected 1/{len(rc)}", row=b, side="C")
    support = {k for k, p in table.items() if p != 0}
    identical = rb == rc and support == {(a, a) for a in rb}
    independent = all(table.get((a, b), 0) == Fraction(1, len(rb) * len(rc)) for a in rb for b in rc)
    return ExtensionReport(ext.kind, True, identical, independent)


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    game: CloningGameSpec
    message_dist: MessageDistribution | None = None
    extension: ChallengeExtension = field(default_factory=ChallengeExtension.independent)
    oracle_augmented: bool = False
    mode: str = "exact"
    trials: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError("mode must be 'exact' or 'sampled'")
        if self.mode == "sampled" and (self.trials is None or self.trials < 1):
            raise ValueError("sampled mode needs a positive trial count")
        if self.mode == "exact" and self.trials is not None:
            raise ValueError("exact mode takes no trial count")
        if self.message_dist is None:
            object.__setattr__(self, "message_dist", MessageDistribution.uniform(self.game.messages))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ExperimentOutcome:
    win_probability: float
    stderr: float
    b_accept: float
    c_accept: float
    joint: float
    mode: str = "exact"
    trials: int = 0


def point_oracle(m) -> Callable[[Any], bool]:
    """Classical point function P_m handed to oracle-augmented adversaries."""
    return lambda x: x == m


def _strategy_for(cfg: ExperimentConfig, strat, m):
    if cfg.oracle_augmented:
        if not callable(strat):
            raise TypeError("oracle-augmented experiments take a strategy factory P_m -> strategy")
        return strat(point_oracle(m))
    return strat


def _check_strategy_dims(game: CloningGameSpec, strat):
    ch = strat.splitting
    if ch.in_dim != game.token_dim:
        raise ValueError(f"splitting expects input dim {ch.in_dim}, token has dim {game.token_dim}")
    if len(ch.out_dims) != 2:
        raise ValueError("splitting must output exactly two registers (B, C)")


def accept_stack(side: Side, povms: Mapping, key, msg, coins) -> np.ndarray:
    """Accept operators A(r) = sum of POVM elements of accepted answers, one per r."""
    out = []
    for r in side.randomness:
        ch = side.challenge(key, msg, r)
        povm = povms[ch]
        mask = np.array([1.0 if side.verify(key, msg, coins, ch, a, r) else 0.0 for a in povm.labels])
        out.append(np.tensordot(mask, povm.elements, axes=1))
    return np.stack(out)


def joint_accept(rho: np.ndarray, db: int, dc: int, ab: np.ndarray, ac: np.ndarray) -> np.ndarray:
    """Tr[(A_B(i) (x) A_C(j)) rho] for every pair (i, j)."""
    x = rho.reshape(db, dc, db, dc).transpose(2, 0, 3, 1).reshape(db * db, dc * dc)
    fb = ab.reshape(ab.shape[0], -1)
    fc = ac.reshape(ac.shape[0], -1)
    return np.real(fb @ x @ fc.T)


def _instances(cfg: ExperimentConfig):
    game = cfg.game
    pk = 1.0 / len(game.keys)
    for m, pm in cfg.message_dist.items():
        if pm == 0:
            continue
        for key in game.keys:
            for br in game.token_mixture(key, m):
                yield float(pm) * pk * br.prob, m, key, br


def enumeration_size(cfg: ExperimentConfig) -> int:
    game = cfg.game
    q = cfg.extension.matrix(game.side_B.randomness, game.side_C.randomness)
    k0 = game.keys[0]
    m0 = cfg.message_dist.support[0]
    branches = len(game.token_mixture(k0, m0))
    return len(cfg.message_dist.support) * len(game.keys) * branches * int(np.count_nonzero(q))


def _instance_tables(cfg: ExperimentConfig, strat, m, key, br):
    """(joint accept matrix over (r_B, r_C), B accept per r_B, C accept per r_C)."""
    game = cfg.game
    db, dc = strat.splitting.out_dims
    rho = strat.splitting.apply_pure(br.state)
    ab = accept_stack(game.side_B, strat.respond_B, key, m, br.coins)
    ac = accept_stack(game.side_C, strat.respond_C, key, m, br.coins)
    j = joint_accept(rho, db, dc, ab, ac)
    rho_b = ptrace_array(rho, (db, dc), [0])
    rho_c = ptrace_array(rho, (db, dc), [1])
    pb = np.real(np.einsum("rij,ji->r", ab, rho_b))
    pc = np.real(np.einsum("rij,ji->r", ac, rho_c))
    return j, pb, pc


def run_cloning_experiment(cfg: ExperimentConfig, strat) -> ExperimentOutcome:
    """Win probability of ``strat`` in the cloning experiment described by ``cfg``.

    Exact mode enumerates messages, keys, token branches and the joint
    challenge randomness; sampled mode draws ``trials`` runs, including the
    measurement outcomes, and reports the binomial standard error.
    """
    game = cfg.game
    q = cfg.extension.matrix(game.side_B.randomness, game.side_C.randomness)
    if cfg.mode == "exact":
        size = enumeration_size(cfg)
        if size > EXACT_BUDGET:
            raise BudgetError(f"exact enumeration needs {size} terms, budget is {EXACT_BUDGET}")
    strat_cache: dict = {}

    def strat_for(m):
        if m not in strat_cache:
            s = _strategy_for(cfg, strat, m)
            _check_strategy_dims(game, s)
            strat_cache[m] = s
        return strat_cache[m]

    qb = q.sum(axis=1)
    qc = q.sum(axis=0)
    if cfg.mode == "exact":
        win = pb_tot = pc_tot = 0.0
        for w, m, key, br in _instances(cfg):
            j, pb, pc = _instance_tables(cfg, strat_for(m), m, key, br)
            win += w * float(np.sum(q * j))
            pb_tot += w * float(qb @ pb)
            pc_tot += w * float(qc @ pc)
        return ExperimentOutcome(win, 0.0, pb_tot, pc_tot, win, "exact", 0)
    return _run_sampled(cfg, strat_for, q)


def _run_sampled(cfg: ExperimentConfig, strat_for, q) -> ExperimentOutcome:
    game = cfg.game
    rng = as_rng(cfg.seed)
    n = cfg.trials
    dist = cfg.message_dist
    mi = rng.choice(len(dist.support), size=n, p=[float(p) for p in dist.probs])
    ki = rng.integers(0, len(game.keys), size=n)
    flat = q.ravel() / q.sum()
    pair = rng.choice(flat.size, size=n, p=flat)
    rbi, rci = pair // q.shape[1], pair % q.shape[1]
    u_branch = rng.random(n)
    u_meas = rng.random(n)
    both = np.zeros(n, dtype=bool)
    acc_b = np.zeros(n, dtype=bool)
    acc_c = np.zeros(n, dtype=bool)
    groups: dict = {}
    for t in range(n):
        groups.setdefault((int(mi[t]), int(ki[t])), []).append(t)
    for (a, b), idx in sorted(groups.items()):
        idx = np.array(idx)
        m, key = dist.support[a], game.keys[b]
        branches = game.token_mixture(key, m)
        cum = np.cumsum([br.prob for br in branches])
        bsel = np.minimum(np.searchsorted(cum / cum[-1], u_branch[idx], side="right"), len(branches) - 1)
        for bi in np.unique(bsel):
            sub = idx[bsel == bi]
            j, pb, pc = _instance_tables(cfg, strat_for(m), m, key, branches[int(bi)])
            p11 = j[rbi[sub], rci[sub]]
            p1x = pb[rbi[sub]]
            px1 = pc[rci[sub]]
            u = u_meas[sub]
            b11 = u < p11
            b10 = (u >= p11) & (u < p1x)
            b01 = (u >= p1x) & (u < p1x + px1 - p11)
            both[sub] = b11
            acc_b[sub] = b11 | b10
            acc_c[sub] = b11 | b01
    p = float(both.mean())
    se = float(np.sqrt(p * (1 - p) / n))
    return ExperimentOutcome(p, se, float(acc_b.mean()), float(acc_c.mean()), p, "sampled", n)


# ---------------------------------------------------------------------------
# honest correctness and trivial baselines
# ---------------------------------------------------------------------------


def _honest_povms(game: CloningGameSpec, side: str) -> dict:
    s = game.side(side)
    if s.honest is None:
        raise ValueError(f"game {game.name} declares no honest evaluator for side {side}")
    return {ch: s.honest(ch) for ch in game.challenge_space(side)}


def honest_acceptance(game: CloningGameSpec, side: str, dist: MessageDistribution | None = None) -> float:
    """Exact probability that the honest evaluator, holding the whole token, passes ``side``'s check."""
    dist = dist or MessageDistribution.uniform(game.messages)
    povms = _honest_povms(game, side)
    s = game.side(side)
    total = 0.0
    cfg = ExperimentConfig(game, dist)
    for w, m, key, br in _instances(cfg):
        acc = accept_stack(s, povms, key, m, br.coins)
        v = br.state
        total += w * float(np.mean(np.real(np.einsum("i,rij,j->r", v.conj(), acc, v))))
    return total


def honest_correctness(game: CloningGameSpec, dist: MessageDistribution | None = None) -> tuple[float, float]:
    """(delta_B, delta_C); the two coincide for symmetric games."""
    db = honest_acceptance(game, "B", dist)
    dc = db if game.side_C is game.side_B else honest_acceptance(game, "C", dist)
    return db, dc


def guess_scores(cfg: ExperimentConfig, guesser: str) -> dict:
    """score[ch][a]: joint win weight when the token-less ``guesser`` answers a on
    challenge ch and the other party runs the honest evaluator on the token."""
    game = cfg.game
    holder = "C" if guesser == "B" else "B"
    sg, sh = game.side(guesser), game.side(holder)
    hpovms = _honest_povms(game, holder)
    q = cfg.extension.matrix(game.side_B.randomness, game.side_C.randomness)
    if guesser == "C":
        q = q.T  # rows: guesser randomness
    scores: dict = {}
    for w, m, key, br in _instances(cfg):
        v = br.state
        acc = accept_stack(sh, hpovms, key, m, br.coins)
        ph = np.real(np.einsum("i,rij,j->r", v.conj(), acc, v))
        for gi, rg in enumerate(sg.randomness):
            weight = w * float(q[gi] @ ph)
            if weight == 0:
                continue
            ch = sg.challenge(key, m, rg)
            row = scores.setdefault(ch, {a: 0.0 for a in sg.answers})
            for a in sg.answers:
                if sg.verify(key, m, br.coins, ch, a, rg):
                    row[a] += weight
    return scores


def best_guess(cfg: ExperimentConfig, guesser: str, blind: bool = False) -> tuple[dict, float]:
    """Optimal deterministic answers of the token-less party and the resulting value.

    With ``blind`` the answer may not depend on the challenge.  Ties go to the
    first answer in the game's answer order.
    """
    game = cfg.game
    scores = guess_scores(cfg, guesser)
    answers = game.side(guesser).answers
    chals = game.challenge_space(guesser)
    if blind:
        totals = {a: sum(row[a] for row in scores.values()) for a in answers}
        a_star = max(answers, key=lambda a: (totals[a], -answers.index(a)))
        return {ch: a_star for ch in chals}, totals[a_star]
    choice, value = {}, 0.0
    for ch in chals:
        row = scores.get(ch)
        if row is None:
            choice[ch] = answers[0]
            continue
        a_star = max(answers, key=lambda a: (row[a], -answers.index(a)))
        choice[ch] = a_star
        value += row[a_star]
    return choice, value


def opt_guess(cfg: ExperimentConfig, side: str = "C") -> float:
    """OPT(m | ch): best probability of guessing the message from ``side``'s challenge."""
    game = cfg.game
    s = game.side(side)
    joint: dict = {}
    pk = Fraction(1, len(game.keys))
    pr = Fraction(1, len(s.randomness))
    for m, pm in cfg.message_dist.items():
        for key in game.keys:
            for r in s.randomness:
                ch = s.challenge(key, m, r)
                row = joint.setdefault(ch, {})
                row[m] = row.get(m, Fraction(0)) + pm * pk * pr
    return float(sum(max(row.values()) for row in joint.values()))


@dataclass(frozen=True)
class TrivialSuccess:
    value: float
    lower: float
    upper: float
    p_b: float
    p_c: float
    opt: float | None = None
    delta: float | None = None


def trivial_success(cfg: ExperimentConfig) -> TrivialSuccess:
    """Trivial success probability with certificates.

    ``p_b`` is the value of the attack where B gets nothing and plays the exact
    best guess while C holds the token and runs the honest evaluator; ``p_c``
    is the mirror image.  For search games the value is OPT(m | ch) with the
    sandwich lower bound built from the honest correctness; otherwise it is
    max(p_b, p_c), which is a lower bound on the supremum over trivial attacks.
    """
    if cfg.mode != "exact":
        cfg = cfg.replace(mode="exact", trials=None)
    if enumeration_size(cfg) > EXACT_BUDGET:
        raise BudgetError("trivial success needs exact enumeration")
    _, p_b = best_guess(cfg, "B")
    _, p_c = best_guess(cfg, "C")
    if cfg.game.flavor == "search" and not cfg.game.asymmetric:
        opt = opt_guess(cfg, "C")
        delta = min(honest_correctness(cfg.game, cfg.message_dist))
        s = float(np.sqrt(max(0.0, 1 - delta)))
        lower = (1 - s) * (opt - s)
        return TrivialSuccess(opt, lower, opt, p_b, p_c, opt, delta)
    v = max(p_b, p_c)
    return TrivialSuccess(v, v, 1.0, p_b, p_c)


def min_entropy_factor_check(game: CloningGameSpec, dist: MessageDistribution, strat) -> InequalityReport:
    """win(D) <= |M| * max_m D(m) * win(uniform), both sides exact."""
    w_d = run_cloning_experiment(ExperimentConfig(game, dist), strat).win_probability
    w_u = run_cloning_experiment(ExperimentConfig(game, MessageDistribution.uniform(game.messages)), strat).win_probability
    factor = len(game.messages) * dist.max_prob
    return InequalityReport(
        lhs=w_d,
        rhs=float(factor) * w_u,
        instance={"game": game.name, "lambda": game.security_param, "distribution": dist.kind},
        extra={"factor": str(factor), "min_entropy": dist.min_entropy, "win_uniform": w_u},
    )
