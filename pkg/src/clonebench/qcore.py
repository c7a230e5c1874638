"""Dense quantum-object primitives.

Everything here is a thin, validated wrapper around complex numpy arrays.
Values are immutable after construction (the underlying arrays are marked
read-only), so they can be shared freely.  Hot loops elsewhere in the package
work on raw arrays and only wrap at API boundaries.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TOL_STRUCT = 1e-9
TOL_RECON = 1e-8
TOL_EQ = 1e-10

DEFAULT_MAX_DIM = 2**12

OPERATOR_KINDS = ("general", "hermitian", "unitary", "projector", "psd")


class DimensionError(ValueError):
    """Raised when a Hilbert space would exceed the dimension guard."""


def max_dim() -> int:
    """Dimension guard, overridable through ``CLONEBENCH_MAX_DIM``."""
    raw = os.environ.get("CLONEBENCH_MAX_DIM")
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError as exc:
        raise DimensionError(f"CLONEBENCH_MAX_DIM must be an integer, got {raw!r}") from exc
    if value < 1:
        raise DimensionError("CLONEBENCH_MAX_DIM must be positive")
    return value


def check_dim(dim: int, what: str = "Hilbert space") -> None:
    limit = max_dim()
    if dim > limit:
        raise DimensionError(f"{what} dimension {dim} exceeds the guard {limit} (set CLONEBENCH_MAX_DIM to override)")


def as_rng(seed) -> np.random.Generator:
    """Accept an int seed, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


def _norm_dims(dims, total: int) -> tuple[int, ...]:
    if dims is None:
        return (total,)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError(f"tensor factor dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != total:
        raise ValueError(f"dims {dims} do not multiply to {total}")
    return dims


def is_hermitian(a: np.ndarray, tol: float = TOL_STRUCT) -> bool:
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def is_psd(a: np.ndarray, tol: float = TOL_STRUCT) -> bool:
    if not is_hermitian(a, tol):
        return False
    h = (a + a.conj().T) / 2
    return bool(np.linalg.eigvalsh(h).min(initial=0.0) >= -tol)


def is_projector(a: np.ndarray, tol: float = TOL_STRUCT) -> bool:
    return is_hermitian(a, tol) and bool(np.max(np.abs(a @ a - a), initial=0.0) <= tol)


def is_unitary(a: np.ndarray, tol: float = TOL_STRUCT) -> bool:
    d = a.shape[0]
    return a.shape == (d, d) and bool(np.max(np.abs(a.conj().T @ a - np.eye(d)), initial=0.0) <= tol)


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------


class StateVector:
    """Pure state with explicit tensor-factor dimensions."""

    __slots__ = ("amplitudes", "dims", "subnormalized")

    def __init__(self, amplitudes, dims=None, subnormalized: bool = False):
        amps = _frozen(np.ravel(amplitudes))
        dims = _norm_dims(dims, amps.size)
        check_dim(amps.size)
        nrm = float(np.linalg.norm(amps))
        if subnormalized:
            if nrm > 1 + TOL_EQ:
                raise ValueError(f"subnormalized state has norm {nrm} > 1")
        elif abs(nrm - 1) > TOL_EQ:
            raise ValueError(f"state vector norm {nrm} differs from 1")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "subnormalized", bool(subnormalized))

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.dims, subnormalized=self.subnormalized)

    def __repr__(self):
        return f"StateVector(dims={self.dims})"


class DensityMatrix:
    """Mixed state; the eigenvalue check is skipped above 512 dimensions for speed."""

    __slots__ = ("entries", "dims", "subnormalized")

    def __init__(self, entries, dims=None, subnormalized: bool = False, check: bool = True):
        rho = _frozen(entries)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        dims = _norm_dims(dims, rho.shape[0])
        check_dim(rho.shape[0])
        if check:
            if not is_hermitian(rho, TOL_EQ * max(1, rho.shape[0])):
                raise ValueError("density matrix is not Hermitian")
            tr = float(np.real(np.trace(rho)))
            if subnormalized:
                if tr > 1 + TOL_STRUCT or tr < -TOL_STRUCT:
                    raise ValueError(f"subnormalized trace {tr} outside [0, 1]")
            elif abs(tr - 1) > TOL_STRUCT:
                raise ValueError(f"trace {tr} differs from 1")
            if rho.shape[0] <= 512:
                lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
                if lo < -TOL_STRUCT:
                    raise ValueError(f"density matrix has negative eigenvalue {lo}")
        object.__setattr__(self, "entries", rho)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "subnormalized", bool(subnormalized))

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims})"


class Operator:
    """Square matrix tagged with the property it is promised to satisfy."""

    __slots__ = ("entries", "kind", "dims")

    def __init__(self, entries, kind: str = "general", dims=None, check: bool = True):
        if kind not in OPERATOR_KINDS:
            raise ValueError(f"unknown operator kind {kind!r}")
        a = _frozen(entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("operator must be square")
        dims = _norm_dims(dims, a.shape[0])
        if check:
            ok = {
                "general": lambda m: True,
                "hermitian": is_hermitian,
                "unitary": is_unitary,
                "projector": is_projector,
                "psd": is_psd,
            }[kind](a)
            if not ok:
                raise ValueError(f"matrix is not {kind}")
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "dims", dims)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __repr__(self):
        return f"Operator(kind={self.kind!r}, dims={self.dims})"


def _entries(x) -> np.ndarray:
    if isinstance(x, (Operator, DensityMatrix)):
        return x.entries
    return np.asarray(x, dtype=complex)


class Povm:
    """Labelled POVM.  Elements are kept as one ``(k, d, d)`` array."""

    __slots__ = ("elements", "labels", "_index")

    def __init__(self, elements, labels: Sequence[str] | None = None, check: bool = True):
        if isinstance(elements, np.ndarray) and elements.ndim == 3:
            stack = elements
        else:
            stack = np.stack([_entries(e) for e in elements])
        stack = _frozen(stack)
        if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
            raise ValueError("POVM elements must be square matrices of equal size")
        if labels is None:
            labels = [str(i) for i in range(stack.shape[0])]
        labels = tuple(labels)
        if len(labels) != stack.shape[0]:
            raise ValueError("one label per POVM element required")
        if len(set(labels)) != len(labels):
            raise ValueError("POVM labels must be distinct")
        if check:
            d = stack.shape[1]
            total = stack.sum(axis=0)
            if np.max(np.abs(total - np.eye(d)), initial=0.0) > TOL_STRUCT:
                raise ValueError("POVM elements do not sum to the identity")
            for lab, e in zip(labels, stack):
                if not is_psd(e):
                    raise ValueError(f"POVM element {lab!r} is not positive semidefinite")
        object.__setattr__(self, "elements", stack)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    def __setattr__(self, name, value):
        raise AttributeError("Povm is immutable")

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, label) -> np.ndarray:
        return self.elements[self._index[label]]

    def get(self, label) -> np.ndarray:
        """Element for ``label``, or the zero matrix if the label is absent."""
        i = self._index.get(label)
        if i is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return self.elements[i]

    @property
    def operators(self) -> list[Operator]:
        return [Operator(e, "psd", check=False) for e in self.elements]

    def mask(self, accepted: Iterable[str]) -> np.ndarray:
        acc = set(accepted)
        return np.array([lab in acc for lab in self.labels], dtype=float)

    def is_projective(self, tol: float = TOL_STRUCT) -> bool:
        return all(is_projector(e, tol) for e in self.elements)

    def __repr__(self):
        return f"Povm(dim={self.dim}, labels={self.labels})"

    @classmethod
    def from_basis(cls, basis: np.ndarray, labels: Sequence[str] | None = None) -> "Povm":
        """Rank-one projective measurement onto the columns of ``basis``."""
        basis = np.asarray(basis, dtype=complex)
        elems = np.einsum("ik,jk->kij", basis, basis.conj())
        return cls(elems, labels)

    @classmethod
    def trivial(cls, dim: int, label: str) -> "Povm":
        """Single-outcome measurement that always reports ``label``."""
        return cls(np.eye(dim, dtype=complex)[None], [label], check=False)


class Channel:
    """CPTP map in Kraus form, ``in_dims -> out_dims``."""

    __slots__ = ("kraus", "in_dims", "out_dims")

    def __init__(self, kraus, in_dims, out_dims, check: bool = True):
        if isinstance(kraus, np.ndarray) and kraus.ndim == 3:
            stack = kraus
        else:
            stack = np.stack([_entries(k) for k in kraus])
        stack = _frozen(stack)
        din = int(np.prod(in_dims))
        dout = int(np.prod(out_dims))
        in_dims = _norm_dims(in_dims, din)
        out_dims = _norm_dims(out_dims, dout)
        if stack.shape[1:] != (dout, din):
            raise ValueError(f"Kraus operators have shape {stack.shape[1:]}, expected {(dout, din)}")
        check_dim(dout, "channel output")
        if check:
            tp = np.einsum("kji,kjl->il", stack.conj(), stack)
            if np.max(np.abs(tp - np.eye(din)), initial=0.0) > TOL_STRUCT:
                raise ValueError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", stack)
        object.__setattr__(self, "in_dims", in_dims)
        object.__setattr__(self, "out_dims", out_dims)

    def __setattr__(self, name, value):
        raise AttributeError("Channel is immutable")

    @property
    def in_dim(self) -> int:
        return int(np.prod(self.in_dims))

    @property
    def out_dim(self) -> int:
        return int(np.prod(self.out_dims))

    def apply_matrix(self, rho: np.ndarray) -> np.ndarray:
        """Raw ``sum_k K rho K^dag`` on arrays."""
        k = self.kraus
        return np.einsum("kij,jl,kml->im", k, rho, k.conj())

    def apply_pure(self, psi: np.ndarray) -> np.ndarray:
        """Output density matrix for a pure input vector."""
        w = self.kraus @ psi  # (k, dout)
        return w.T @ w.conj()

    def __repr__(self):
        return f"Channel({self.in_dims} -> {self.out_dims}, rank {self.kraus.shape[0]})"

    @classmethod
    def identity(cls, dim: int) -> "Channel":
        return cls(np.eye(dim, dtype=complex)[None], (dim,), (dim,), check=False)

    @classmethod
    def from_isometry(cls, v: np.ndarray, in_dims, out_dims, env_dim: int = 1) -> "Channel":
        """Stinespring form: ``v`` maps the input into ``out (x) env`` (env last)."""
        v = np.asarray(v, dtype=complex)
        dout = int(np.prod(out_dims))
        din = int(np.prod(in_dims))
        kraus = v.reshape(dout, env_dim, din).transpose(1, 0, 2)
        return cls(kraus, in_dims, out_dims)

    @classmethod
    def depolarizing(cls, dim: int, p: float) -> "Channel":
        """``rho -> (1-p) rho + p I/d`` built from the d^2 Weyl operators."""
        if not 0 <= p <= 1:
            raise ValueError("depolarizing parameter must lie in [0, 1]")
        shift = np.roll(np.eye(dim), 1, axis=0)
        omega = np.exp(2j * np.pi / dim)
        clock = np.diag(omega ** np.arange(dim))
        ops = []
        for a in range(dim):
            for b in range(dim):
                w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
                weight = p / dim**2 + (1 - p if a == b == 0 else 0.0)
                ops.append(np.sqrt(weight) * w)
        return cls(np.stack(ops), (dim,), (dim,))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def tensor(a, b):
    """Kronecker product of two objects of the same kind."""
    if type(a) is not type(b):
        raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    if isinstance(a, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims,
                           subnormalized=a.subnormalized or b.subnormalized)
    if isinstance(a, DensityMatrix):
        return DensityMatrix(np.kron(a.entries, b.entries), a.dims + b.dims,
                             subnormalized=a.subnormalized or b.subnormalized, check=False)
    if isinstance(a, Operator):
        kind = a.kind if a.kind == b.kind else "general"
        if {a.kind, b.kind} == {"projector", "psd"}:
            kind = "psd"
        return Operator(np.kron(a.entries, b.entries), kind, a.dims + b.dims, check=False)
    raise TypeError(f"tensor does not support {type(a).__name__}")


def ptrace_array(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace on a raw array; ``keep`` lists factor indices in order."""
    n = len(dims)
    t = np.asarray(rho).reshape(tuple(dims) + tuple(dims))
    rows = list(range(n))
    cols = [i if i not in keep else n + i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    red = np.einsum(t, rows + cols, out)
    dk = int(np.prod([dims[i] for i in keep]))
    return red.reshape(dk, dk)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must be non-empty")
    if keep[0] < 0 or keep[-1] >= len(rho.dims):
        raise ValueError(f"keep indices {keep} out of range for dims {rho.dims}")
    red = ptrace_array(rho.entries, rho.dims, keep)
    return DensityMatrix(red, tuple(rho.dims[i] for i in keep), subnormalized=rho.subnormalized, check=False)


def apply_channel(ch: Channel, rho: DensityMatrix) -> DensityMatrix:
    if rho.dim != ch.in_dim:
        raise ValueError(f"channel expects input dim {ch.in_dim}, state has {rho.dim}")
    out = ch.apply_matrix(rho.entries)
    return DensityMatrix(out, ch.out_dims, subnormalized=rho.subnormalized, check=False)


@dataclass(frozen=True)
class MeasurementResult:
    probabilities: dict
    post_states: dict


def measure_povm(povm: Povm, rho) -> MeasurementResult:
    """Born probabilities plus Lueders post-measurement states.

    For projective elements the Lueders state coincides with the state obtained
    from a purified dilation; for general elements the square-root instrument
    is used.  Zero-probability outcomes get ``None``.
    """
    if not isinstance(povm, Povm):
        raise TypeError("measure_povm needs a Povm")
    if isinstance(rho, StateVector):
        rho = rho.density()
    r = _entries(rho)
    if r.shape[0] != povm.dim:
        raise ValueError(f"POVM acts on dim {povm.dim}, state has dim {r.shape[0]}")
    dims = rho.dims if isinstance(rho, DensityMatrix) else None
    probs, posts = {}, {}
    for lab, e in zip(povm.labels, povm.elements):
        p = float(np.real(np.einsum("ij,ji->", e, r)))
        probs[lab] = p
        if p <= TOL_EQ:
            posts[lab] = None
            continue
        if is_projector(e):
            k = e
        else:
            w, v = np.linalg.eigh((e + e.conj().T) / 2)
            k = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
        post = k @ r @ k.conj().T / p
        posts[lab] = DensityMatrix(post, dims, check=False)
    return MeasurementResult(probs, posts)


def herm_eig(op) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns)."""
    a = _entries(op)
    if not is_hermitian(a):
        raise ValueError("herm_eig needs a Hermitian operator")
    return np.linalg.eigh((a + a.conj().T) / 2)


def operator_norm(op) -> float:
    """Largest singular value."""
    a = _entries(op)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, ord=2))


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def psd_inv_sqrt(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Pseudo-inverse square root (zero on the kernel)."""
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    inv = np.where(w > tol, 1 / np.sqrt(np.where(w > tol, w, 1)), 0.0)
    return (v * inv) @ v.conj().T


# ---------------------------------------------------------------------------
# seeded random objects
# ---------------------------------------------------------------------------


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_state(dim: int, seed=None) -> StateVector:
    if dim < 1:
        raise ValueError("dim must be at least 1")
    rng = as_rng(seed)
    v = _ginibre(rng, dim, 1)[:, 0]
    return StateVector(v / np.linalg.norm(v))


def random_unitary_array(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(rng, dim, dim))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_unitary(dim: int, seed=None) -> Operator:
    if dim < 1:
        raise ValueError("dim must be at least 1")
    return Operator(random_unitary_array(dim, as_rng(seed)), "unitary", check=False)


def random_projector(dim: int, rank: int, seed=None) -> Operator:
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if not 0 <= rank <= dim:
        raise ValueError(f"rank {rank} outside [0, {dim}]")
    u = random_unitary_array(dim, as_rng(seed))
    cols = u[:, :rank]
    return Operator(cols @ cols.conj().T, "projector", check=False)


def random_isometry(din: int, dout: int, rng: np.random.Generator) -> np.ndarray:
    if dout < din:
        raise ValueError("isometry needs dout >= din")
    q, r = np.linalg.qr(_ginibre(rng, dout, din))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = _ginibre(rng, dim, rank or dim)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_contraction(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random operator with ``0 <= A <= I`` and a spread-out spectrum."""
    u = random_unitary_array(dim, rng)
    w = rng.random(dim)
    return (u * w) @ u.conj().T


def random_povm(dim: int, labels: Sequence[str], rng: np.random.Generator) -> Povm:
    """Full-rank random POVM: normalized random positive operators."""
    k = len(labels)
    gs = [(_g := _ginibre(rng, dim, dim)) @ _g.conj().T for _ in range(k)]
    s = psd_inv_sqrt(sum(gs))
    elems = np.stack([s @ g @ s for g in gs])
    elems = (elems + elems.conj().transpose(0, 2, 1)) / 2
    return Povm(elems, labels, check=False)


def random_channel(din: int, dout: int, rng: np.random.Generator, rank: int | None = None,
                   in_dims=None, out_dims=None) -> Channel:
    rank = rank or din
    v = random_isometry(din, dout * rank, rng)
    return Channel.from_isometry(v, in_dims or (din,), out_dims or (dout,), env_dim=rank)
