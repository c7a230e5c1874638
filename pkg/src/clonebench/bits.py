"""Bitstring helpers.  Bitstrings are plain ``str`` of '0'/'1' with explicit length."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@lru_cache(maxsize=None)
def all_bitstrings(n: int) -> tuple[str, ...]:
    if n < 0:
        raise ValueError("length must be non-negative")
    if n == 0:
        return ("",)
    return tuple(format(i, f"0{n}b") for i in range(2**n))


def to_int(s: str) -> int:
    return int(s, 2) if s else 0


def from_int(v: int, n: int) -> str:
    return format(v, f"0{n}b") if n else ""


def xor(a: str, b: str) -> str:
    if len(a) != len(b):
        raise ValueError("xor of bitstrings of different length")
    return "".join("1" if x != y else "0" for x, y in zip(a, b))


def inner(r: str, x: str) -> int:
    """Inner product mod 2."""
    if len(r) != len(x):
        raise ValueError("inner product of bitstrings of different length")
    return sum(1 for a, b in zip(r, x) if a == "1" and b == "1") % 2


def weight(s: str) -> int:
    return s.count("1")


def ones(s: str) -> tuple[int, ...]:
    """Positions holding a 1."""
    return tuple(i for i, c in enumerate(s) if c == "1")


def is_bitstring(s, n: int | None = None) -> bool:
    return isinstance(s, str) and set(s) <= {"0", "1"} and (n is None or len(s) == n)


@lru_cache(maxsize=None)
def _basis_matrix(theta: str) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for t in theta:
        m = np.kron(m, _H if t == "1" else np.eye(2, dtype=complex))
    m.setflags(write=False)
    return m


def conjugate_basis(theta: str) -> np.ndarray:
    """Columns are |a^theta> = H^theta |a>, indexed by the integer value of a."""
    return _basis_matrix(theta)


def conjugate_state(m: str, theta: str) -> np.ndarray:
    """Wiesner state H^theta |m>; qubit 0 is the leftmost (most significant) bit."""
    if len(m) != len(theta):
        raise ValueError("message and basis string must have equal length")
    return conjugate_basis(theta)[:, to_int(m)].copy()


def basis_vector(s: str) -> np.ndarray:
    v = np.zeros(2 ** len(s), dtype=complex)
    v[to_int(s)] = 1
    return v
