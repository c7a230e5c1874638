"""Small quantum random oracles: explicit tables, XOR-oracle unitaries,
reprogramming, query-weight accounting and hybrid-argument experiments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .bits import from_int, to_int
from .qcore import Operator, as_rng, check_dim
from .reports import InequalityReport

MAX_DOMAIN_BITS = 10


@dataclass(frozen=True)
class OracleTable:
    """Explicit function table ``{0,1}^m -> {0,1}^n`` (values stored as ints).

    ``patches`` records every reprogramming as ``(x, old, new)`` so that the
    base table can always be recovered.
    """

    domain_bits: int
    range_bits: int
    table: tuple[int, ...]
    provenance: str = "explicit"
    seed: int | None = None
    patches: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        if not 0 <= self.domain_bits <= MAX_DOMAIN_BITS:
            raise ValueError(f"domain bits must lie in [0, {MAX_DOMAIN_BITS}]")
        if self.range_bits < 0:
            raise ValueError("range bits must be non-negative")
        if len(self.table) != 2**self.domain_bits:
            raise ValueError("table length must be 2^m")
        top = 2**self.range_bits
        if any(not 0 <= v < top for v in self.table):
            raise ValueError("table value out of range")

    @classmethod
    def random(cls, m: int, n: int, seed: int) -> "OracleTable":
        rng = np.random.default_rng(seed)
        vals = rng.integers(0, 2**n, size=2**m) if n > 0 else np.zeros(2**m, dtype=int)
        return cls(m, n, tuple(int(v) for v in vals), f"random({seed})", seed)

    @classmethod
    def constant(cls, m: int, n: int, value: int = 0) -> "OracleTable":
        return cls(m, n, (int(value),) * 2**m, f"constant({value})")

    @classmethod
    def from_function(cls, m: int, n: int, fn) -> "OracleTable":
        return cls(m, n, tuple(int(fn(x)) for x in range(2**m)), "explicit")

    @classmethod
    def point_function(cls, m: int, points) -> "OracleTable":
        """Indicator of a subset of the domain (range one bit)."""
        pts = {p if isinstance(p, int) else to_int(p) for p in points}
        return cls(m, 1, tuple(1 if x in pts else 0 for x in range(2**m)), "explicit")

    def __call__(self, x: str) -> str:
        """Evaluate on a bitstring, returning a bitstring."""
        if len(x) != self.domain_bits:
            raise ValueError(f"oracle input must have {self.domain_bits} bits")
        return from_int(self.table[to_int(x)], self.range_bits)

    def value(self, x: int) -> int:
        return self.table[x]

    def is_injective(self) -> bool:
        return len(set(self.table)) == len(self.table)

    def collisions(self) -> int:
        """Number of unordered input pairs mapping to the same output."""
        counts: dict[int, int] = {}
        for v in self.table:
            counts[v] = counts.get(v, 0) + 1
        return sum(c * (c - 1) // 2 for c in counts.values())

    def as_array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)

    # -- serialization ---------------------------------------------------

    def to_hex(self) -> str:
        width = max(1, -(-self.range_bits // 4))
        head = [
            "# clonebench oracle table",
            f"m={self.domain_bits} n={self.range_bits} seed={'-' if self.seed is None else self.seed}"
            f" provenance={self.provenance}",
        ]
        if self.patches:
            head.append("patches=" + ",".join(f"{x}:{o}:{v}" for x, o, v in self.patches))
        vals = [format(v, f"0{width}x") for v in self.table]
        lines = [" ".join(vals[i:i + 16]) for i in range(0, len(vals), 16)]
        return "\n".join(head + lines) + "\n"

    @classmethod
    def from_hex(cls, text: str) -> "OracleTable":
        m = n = None
        seed = None
        prov = "explicit"
        patches: tuple = ()
        vals: list[int] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("m="):
                fields = dict(tok.split("=", 1) for tok in line.split())
                m, n = int(fields["m"]), int(fields["n"])
                seed = None if fields.get("seed", "-") == "-" else int(fields["seed"])
                prov = fields.get("provenance", "explicit")
            elif line.startswith("patches="):
                body = line[len("patches="):]
                patches = tuple(tuple(int(p) for p in item.split(":")) for item in body.split(",") if item)
            else:
                vals.extend(int(tok, 16) for tok in line.split())
        if m is None:
            raise ValueError("oracle file lacks the m=/n= header")
        return cls(m, n, tuple(vals), prov, seed, patches)


def reprogram(t: OracleTable, x0, value: int) -> OracleTable:
    """Copy of ``t`` with ``x0`` mapped to ``value``."""
    x = x0 if isinstance(x0, int) else to_int(x0)
    if not 0 <= x < len(t.table):
        raise ValueError("point outside the oracle domain")
    table = list(t.table)
    old = table[x]
    table[x] = int(value)
    base = t.provenance if t.provenance.startswith("programmed(") else f"programmed({t.provenance})"
    return OracleTable(t.domain_bits, t.range_bits, tuple(table), base, t.seed, t.patches + ((x, old, int(value)),))


def puncture_to_fresh(t: OracleTable, x0, seed) -> OracleTable:
    """Reprogram ``x0`` to a fresh value, drawn uniformly among values that differ
    from the current one so the punctured table always changes at ``x0``."""
    if t.range_bits < 1:
        raise ValueError("cannot puncture a zero-bit oracle")
    x = x0 if isinstance(x0, int) else to_int(x0)
    rng = as_rng(seed)
    old = t.table[x]
    fresh = int(rng.integers(0, 2**t.range_bits - 1))
    if fresh >= old:
        fresh += 1
    return reprogram(t, x, fresh)


def oracle_unitary(t: OracleTable) -> Operator:
    """Permutation matrix of |x>|y> -> |x>|y xor H(x)> (x register first)."""
    m, n = t.domain_bits, t.range_bits
    dim = 2 ** (m + n)
    check_dim(dim, "oracle unitary")
    u = np.zeros((dim, dim), dtype=complex)
    for x in range(2**m):
        hx = t.table[x]
        for y in range(2**n):
            u[(x << n) | (y ^ hx), (x << n) | y] = 1
    return Operator(u, "unitary", check=False)


def apply_oracle(state: np.ndarray, t: OracleTable, work_dim: int) -> np.ndarray:
    """Apply O^H to a vector laid out as (query, answer, work)."""
    m, n = t.domain_bits, t.range_bits
    psi = state.reshape(2**m, 2**n, work_dim)
    xs = np.arange(2**m)[:, None]
    ys = np.arange(2**n)[None, :] ^ t.as_array()[:, None]
    return psi[xs, ys].reshape(-1)


# ---------------------------------------------------------------------------
# oracle circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OracleCircuit:
    """Alternating description ``U_T O U_{T-1} ... O U_0 |init>``.

    Registers are ordered (query: m qubits, answer: n qubits, work: work_dim).
    ``accept`` optionally holds a projector (or a 0/1 diagonal as a vector)
    used to read out a bit at the end.
    """

    domain_bits: int
    range_bits: int
    work_dim: int
    initial: np.ndarray
    unitaries: tuple
    accept: np.ndarray | None = None

    def __post_init__(self):
        dim = self.dim
        check_dim(dim, "oracle circuit")
        if self.initial.shape != (dim,):
            raise ValueError(f"initial state must have dimension {dim}")
        if len(self.unitaries) < 1:
            raise ValueError("circuit needs at least the initial unitary")
        for u in self.unitaries:
            if u.shape != (dim, dim):
                raise ValueError("every circuit unitary must act on the full register")

    @property
    def dim(self) -> int:
        return 2 ** (self.domain_bits + self.range_bits) * self.work_dim

    @property
    def num_queries(self) -> int:
        return len(self.unitaries) - 1


def _oracle_for_call(oracles, i: int) -> OracleTable:
    if isinstance(oracles, OracleTable):
        return oracles
    return oracles[i]


def run_circuit(circuit: OracleCircuit, oracles) -> tuple[np.ndarray, list[np.ndarray]]:
    """Final state and the list of pre-call states |phi_i>, i = 0..T-1.

    ``oracles`` is one table or a per-call sequence of tables.
    """
    psi = circuit.unitaries[0] @ circuit.initial
    pre = []
    for i, u in enumerate(circuit.unitaries[1:]):
        pre.append(psi)
        t = _oracle_for_call(oracles, i)
        if (t.domain_bits, t.range_bits) != (circuit.domain_bits, circuit.range_bits):
            raise ValueError("oracle shape does not match the circuit registers")
        psi = u @ apply_oracle(psi, t, circuit.work_dim)
    return psi, pre


def point_weights(circuit: OracleCircuit, state: np.ndarray) -> np.ndarray:
    """W_y(state) for every domain point y: mass of the query register on y."""
    psi = state.reshape(2**circuit.domain_bits, -1)
    return np.sum(np.abs(psi) ** 2, axis=1)


def query_weight(circuit: OracleCircuit, inputs, oracle: OracleTable) -> list[float]:
    """Per-call query mass on the set ``inputs`` in the pre-call states."""
    idx = sorted({x if isinstance(x, int) else to_int(x) for x in inputs})
    _, pre = run_circuit(circuit, oracle)
    return [float(point_weights(circuit, phi)[idx].sum()) if idx else 0.0 for phi in pre]


def pure_trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    ov = abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)
    return float(np.sqrt(max(0.0, 1.0 - ov)))


def bbbv_check(circuit: OracleCircuit, t: OracleTable, patches: Mapping[tuple[int, int], int]) -> InequalityReport:
    """Reprogramming experiment: trace distance between the final states with the
    original oracle and with per-call patched oracles, against eps/2 where
    eps^2 / T = sum over patched (call, input) pairs of the query mass.

    The report also carries ``safe_bound = min(1, 2 eps)``, which follows from
    the hybrid argument for the XOR oracle without further assumptions.
    """
    T = circuit.num_queries
    final, pre = run_circuit(circuit, t)
    weights = [point_weights(circuit, phi) for phi in pre]
    total = 0.0
    per_call: list[OracleTable] = []
    for i in range(T):
        ti = t
        for (call, x), v in sorted(patches.items()):
            if call == i:
                ti = reprogram(ti, x, v)
        per_call.append(ti)
    for (call, x) in patches:
        if not 0 <= call < T:
            raise ValueError(f"patch refers to call {call}, circuit makes {T} queries")
        total += float(weights[call][x])
    eps = float(np.sqrt(T * total))
    patched, _ = run_circuit(circuit, per_call)
    td = pure_trace_distance(final, patched)
    return InequalityReport(
        lhs=td,
        rhs=eps / 2,
        instance={"queries": T, "patched_pairs": len(patches)},
        extra={
            "eps": eps,
            "query_mass": total,
            "euclidean": float(np.linalg.norm(final - patched)),
            "safe_bound": min(1.0, 2 * eps),
            "safe_pass": td <= min(1.0, 2 * eps) + 1e-9,
        },
    )


def random_oracle_circuit(m: int, n: int, work_dim: int, queries: int, rng) -> OracleCircuit:
    from .qcore import random_unitary_array

    rng = as_rng(rng)
    dim = 2 ** (m + n) * work_dim
    init = np.zeros(dim, dtype=complex)
    init[0] = 1
    us = tuple(random_unitary_array(dim, rng) for _ in range(queries + 1))
    return OracleCircuit(m, n, work_dim, init, us)


@dataclass(frozen=True)
class SubsetHidingResult:
    advantage: float
    stderr: float
    p_subset: float
    p_superset_mean: float
    counting_bound: float
    hybrid_bound: float
    trials: int


def subset_hiding_experiment(distinguisher: OracleCircuit, subset, m_extra: int, trials: int, seed) -> SubsetHidingResult:
    """Advantage of a distinguisher between P_S and P_T with T a random superset.

    The acceptance probability for each oracle is computed exactly; only the
    choice of T is sampled.  Two reference bounds are reported: the counting
    bound ``m_extra / (N - |S|)`` and the hybrid bound
    ``2 q sqrt(m_extra / (N - |S|))`` valid for any q-query distinguisher.
    """
    m = distinguisher.domain_bits
    if distinguisher.range_bits != 1:
        raise ValueError("point-function oracles have a one-bit range")
    if distinguisher.accept is None:
        raise ValueError("distinguisher needs an accept projector")
    N = 2**m
    S = sorted({x if isinstance(x, int) else to_int(x) for x in subset})
    rest = np.array([x for x in range(N) if x not in set(S)])
    if m_extra < 0 or m_extra > rest.size:
        raise ValueError("m_extra out of range")
    rng = as_rng(seed)

    def p_accept(points) -> float:
        final, _ = run_circuit(distinguisher, OracleTable.point_function(m, points))
        acc = distinguisher.accept
        if acc.ndim == 1:
            return float(np.sum(acc * np.abs(final) ** 2))
        return float(np.real(np.vdot(final, acc @ final)))

    p_s = p_accept(S)
    samples = np.empty(trials)
    for k in range(trials):
        extra = rng.choice(rest, size=m_extra, replace=False) if m_extra else []
        samples[k] = p_accept(list(S) + [int(e) for e in extra])
    mean = float(samples.mean())
    se = float(samples.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    frac = m_extra / (N - len(S))
    q = distinguisher.num_queries
    return SubsetHidingResult(abs(p_s - mean), se, p_s, mean, frac, min(1.0, 2 * q * np.sqrt(frac)), trials)
